#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "instances.hpp"
#include "ree/oracles.hpp"
#include "ree/penalties.hpp"

namespace ree {
namespace {

Vector vec(std::initializer_list<double> xs) {
  return Eigen::Map<const Vector>(xs.begin(), static_cast<Index>(xs.size()));
}

double max_abs(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

// Convex penalties over p = 3 used by the property tests.
std::vector<PenaltySpec> convex_specs() {
  const GroupPartition part({{0, 1}, {2}});
  const GroupPartition weighted({{0}, {1, 2}}, {0.5, 2.0});
  return {PenaltySpec::ridge(),
          PenaltySpec::lasso(),
          PenaltySpec::elastic_net(0.7),
          PenaltySpec::group_lasso(part),
          PenaltySpec::group_lasso(weighted),
          PenaltySpec::sparse_group_lasso(part, 0.3),
          PenaltySpec::ball_indicator(BallConstraint::l1(1.0)),
          PenaltySpec::ball_indicator(BallConstraint::l2(1.5)),
          PenaltySpec::ball_indicator(BallConstraint::box(vec({-1, -0.5, 0}), vec({1, 0.5, 2})))};
}

TEST(PenaltyValue, Examples) {
  EXPECT_EQ(penalty_value(PenaltySpec::lasso(), Vector::Zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltySpec::group_lasso(GroupPartition::from_one_based({{1, 2}, {3}})),
                                 vec({3, 4, 1})),
                   6.0);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltySpec::ridge(), vec({1, -2})), 5.0);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltySpec::elastic_net(0.5), vec({1, -2})), 3.0 + 2.5);
  EXPECT_EQ(penalty_value(PenaltySpec::ball_indicator(BallConstraint::l2(1.0)), vec({0.6, 0.8})), 0.0);
  EXPECT_EQ(penalty_value(PenaltySpec::ball_indicator(BallConstraint::l2(1.0)), vec({1, 1})), kInfinitePenalty);
}

TEST(PenaltyValue, SparseGroupAlphaOneIsLasso) {
  std::mt19937_64 rng(3);
  const auto spec = PenaltySpec::sparse_group_lasso(GroupPartition({{0, 1}, {2}}), 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vector b = testing::uniform_vector(rng, 3, -5, 5);
    EXPECT_DOUBLE_EQ(penalty_value(spec, b), penalty_value(PenaltySpec::lasso(), b));
  }
}

TEST(PenaltyValue, MatchesDefinitionOracle) {
  std::mt19937_64 rng(5);
  for (const auto& spec : convex_specs()) {
    for (int i = 0; i < 50; ++i) {
      const Vector b = testing::uniform_vector(rng, 3, -2, 2);
      const double a = penalty_value(spec, b);
      const double o = oracle::penalty_by_definition(spec, b);
      if (std::isinf(o)) {
        EXPECT_TRUE(std::isinf(a));
      } else {
        EXPECT_NEAR(a, o, 1e-12 * (1 + o)) << spec.name();
      }
    }
  }
}

TEST(PenaltyValue, DimensionMismatch) {
  const auto spec = PenaltySpec::group_lasso(GroupPartition({{0, 1}, {2}}));
  EXPECT_THROW(penalty_value(spec, Vector::Zero(2)), Error);
}

TEST(Prox, LassoExample) { EXPECT_EQ(prox(PenaltySpec::lasso(), vec({3, -0.5, 0}), 1.0).point, vec({2, 0, 0})); }

TEST(Prox, GroupLassoExample) {
  const auto spec = PenaltySpec::group_lasso(GroupPartition::from_one_based({{1, 2}, {3}}));
  EXPECT_LE(max_abs(prox(spec, vec({3, 4, 1}), 2.5).point - vec({1.5, 2.0, 0})), 1e-15);
}

TEST(Prox, SparseGroupLassoExample) {
  const auto spec = PenaltySpec::sparse_group_lasso(GroupPartition::from_one_based({{1, 2}}), 0.5);
  EXPECT_LE(max_abs(prox(spec, vec({3, -1}), 2.0).point - vec({1, 0})), 1e-15);
}

TEST(Prox, RidgeExample) { EXPECT_DOUBLE_EQ(prox(PenaltySpec::ridge(), vec({4}), 1.0).point[0], 4.0 / 3.0); }

TEST(Prox, ElasticNetIsSoftThresholdThenShrink) {
  EXPECT_LE(max_abs(prox(PenaltySpec::elastic_net(0.5), vec({3, -0.2}), 1.0).point - vec({1, 0})), 1e-15);
}

TEST(Prox, ZeroScaleIsIdentity) {
  std::mt19937_64 rng(8);
  for (const auto& spec : convex_specs()) {
    if (spec.is_indicator()) continue;
    const Vector v = testing::uniform_vector(rng, 3, -3, 3);
    EXPECT_EQ(prox(spec, v, 0.0).point, v) << spec.name();
  }
}

TEST(Prox, ZeroGroupNormMapsToZero) {
  const auto spec = PenaltySpec::group_lasso(GroupPartition({{0, 1}, {2}}));
  EXPECT_EQ(prox(spec, vec({0, 0, 5}), 1.0).point, vec({0, 0, 4}));
}

TEST(Prox, NegativeScaleAndMismatch) {
  try {
    prox(PenaltySpec::lasso(), vec({1}), -0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeScale);
  }
  EXPECT_THROW(prox(PenaltySpec::group_lasso(GroupPartition({{0, 1}})), vec({1, 2, 3}), 1.0), Error);
}

TEST(Prox, IsNonexpansive) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> scale(0.0, 2.0);
  for (const auto& spec : convex_specs()) {
    for (int i = 0; i < 500; ++i) {
      const Vector u = testing::uniform_vector(rng, 3, -3, 3);
      const Vector v = testing::uniform_vector(rng, 3, -3, 3);
      const double s = scale(rng);
      EXPECT_LE((prox(spec, u, s).point - prox(spec, v, s).point).norm(), (u - v).norm() * (1 + 1e-12))
          << spec.name();
    }
  }
}

// v - z must lie in scale * dOmega(z); checked through each penalty's case split.
TEST(Prox, SatisfiesSubgradientInclusion) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> sdist(0.05, 2.0);
  const GroupPartition part({{0, 1}, {2}}, {1.0, 1.5});
  for (int i = 0; i < 500; ++i) {
    const Vector v = testing::uniform_vector(rng, 3, -3, 3);
    const double s = sdist(rng);

    const Vector zl = prox(PenaltySpec::lasso(), v, s).point;
    for (Index j = 0; j < 3; ++j) {
      const double g = v[j] - zl[j];
      if (zl[j] != 0.0) EXPECT_NEAR(g, s * (zl[j] > 0 ? 1 : -1), 1e-12);
      else EXPECT_LE(std::abs(g), s + 1e-12);
    }

    const Vector zg = prox(PenaltySpec::group_lasso(part), v, s).point;
    for (std::size_t k = 0; k < part.size(); ++k) {
      Vector zk(part.groups()[k].size()), gk(part.groups()[k].size());
      for (std::size_t t = 0; t < part.groups()[k].size(); ++t) {
        const Index j = part.groups()[k][t];
        zk[static_cast<Index>(t)] = zg[j];
        gk[static_cast<Index>(t)] = v[j] - zg[j];
      }
      const double w = part.weight(k);
      if (zk.norm() > 0) EXPECT_LE((gk - s * w * zk / zk.norm()).norm(), 1e-12);
      else EXPECT_LE(gk.norm(), s * w + 1e-12);
    }

    const double alpha = 0.4;
    const Vector zs = prox(PenaltySpec::sparse_group_lasso(part, alpha), v, s).point;
    for (std::size_t k = 0; k < part.size(); ++k) {
      const auto& g = part.groups()[k];
      Vector zk(g.size());
      for (std::size_t t = 0; t < g.size(); ++t) zk[static_cast<Index>(t)] = zs[g[t]];
      const double group_level = s * (1 - alpha) * part.weight(k);
      if (zk.norm() > 0) {
        for (std::size_t t = 0; t < g.size(); ++t) {
          const Index j = g[t];
          const double residual = v[j] - zs[j] - group_level * zs[j] / zk.norm();
          if (zs[j] != 0) EXPECT_NEAR(residual, s * alpha * (zs[j] > 0 ? 1 : -1), 1e-12);
          else EXPECT_LE(std::abs(residual), s * alpha + 1e-12);
        }
      } else {
        double sq = 0;
        for (Index j : g) sq += std::pow(std::max(std::abs(v[j]) - s * alpha, 0.0), 2);
        EXPECT_LE(std::sqrt(sq), group_level + 1e-12);
      }
    }

    const Vector zr = prox(PenaltySpec::ridge(), v, s).point;
    EXPECT_LE(max_abs(v - zr - 2 * s * zr), 1e-12);
  }
}

TEST(Prox, SparseGroupReductionsAreExact) {
  std::mt19937_64 rng(19);
  const GroupPartition part({{0, 1}, {2}});
  for (int i = 0; i < 200; ++i) {
    const Vector v = testing::uniform_vector(rng, 3, -3, 3);
    const double s = std::uniform_real_distribution<double>(0, 2)(rng);
    EXPECT_EQ(prox(PenaltySpec::sparse_group_lasso(part, 1.0), v, s).point, prox(PenaltySpec::lasso(), v, s).point);
    EXPECT_EQ(prox(PenaltySpec::sparse_group_lasso(part, 0.0), v, s).point,
              prox(PenaltySpec::group_lasso(part), v, s).point);
  }
}

TEST(Prox, CommutesWithPermutations) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Vector v = testing::uniform_vector(rng, 4, -3, 3);
    std::vector<Index> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Vector pv(4);
    for (Index j = 0; j < 4; ++j) pv[j] = v[perm[j]];
    const Vector z = prox(PenaltySpec::lasso(), v, 1.0).point;
    const Vector pz = prox(PenaltySpec::lasso(), pv, 1.0).point;
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(pz[j], z[perm[j]]);

    // Swapping the two groups of size 2 swaps the output blocks.
    const auto spec = PenaltySpec::group_lasso(GroupPartition({{0, 1}, {2, 3}}));
    const Vector swapped = (Vector(4) << v[2], v[3], v[0], v[1]).finished();
    const Vector zg = prox(spec, v, 1.0).point;
    const Vector zs = prox(spec, swapped, 1.0).point;
    EXPECT_EQ(zs, (Vector(4) << zg[2], zg[3], zg[0], zg[1]).finished());
  }
}

TEST(Prox, MatchesGridOracle) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> sdist(0.0, 2.0);
  const GroupPartition part({{0, 1}});
  const std::vector<PenaltySpec> specs = {PenaltySpec::lasso(), PenaltySpec::ridge(), PenaltySpec::elastic_net(0.5),
                                          PenaltySpec::group_lasso(part),
                                          PenaltySpec::sparse_group_lasso(part, 0.5)};
  for (const auto& spec : specs) {
    for (int i = 0; i < 10; ++i) {
      const Vector v = testing::uniform_vector(rng, 2, -3, 3);
      const double s = sdist(rng);
      const Vector z = prox(spec, v, s).point;
      const Vector g = oracle::grid_prox(spec, v, s, 4.0, 1e-3);
      EXPECT_LE(max_abs(z - g), 2e-3) << spec.name();
    }
  }
}

TEST(ProjectBall, Examples) {
  EXPECT_LE(max_abs(project_ball(BallConstraint::l2(1.0), vec({3, 4})) - vec({0.6, 0.8})), 1e-15);
  EXPECT_LE(max_abs(project_ball(BallConstraint::l1(1.0), vec({1, 1})) - vec({0.5, 0.5})), 1e-15);
  EXPECT_EQ(project_ball(BallConstraint::box(vec({-1, -1}), vec({1, 2})), vec({3, -4})), vec({1, -1}));
}

TEST(ProjectBall, InsideIsFixed) {
  const Vector y = vec({0.1, -0.2, 0.3});
  for (const auto& spec : convex_specs()) {
    if (!spec.is_indicator()) continue;
    EXPECT_EQ(project_ball(std::get<BallIndicatorPenalty>(spec.kind).ball, y), y);
  }
}

TEST(ProjectBall, L1ProjectionHitsRadiusAndMatchesOracle) {
  std::mt19937_64 rng(31);
  const auto ball = BallConstraint::l1(1.0);
  for (int i = 0; i < 20; ++i) {
    const Vector y = testing::uniform_vector(rng, 3, -2, 2);
    const Vector x = project_ball(ball, y);
    if (y.lpNorm<1>() > 1.0) EXPECT_NEAR(x.lpNorm<1>(), 1.0, 1e-12);
    const Vector g = oracle::grid_prox(PenaltySpec::ball_indicator(ball), y, 1.0, 2.0, 1e-3);
    EXPECT_LE(max_abs(x - g), 2e-3);
  }
}

TEST(ProjectBall, IsIdempotent) {
  std::mt19937_64 rng(37);
  for (const auto& spec : convex_specs()) {
    if (!spec.is_indicator()) continue;
    const auto& ball = std::get<BallIndicatorPenalty>(spec.kind).ball;
    for (int i = 0; i < 200; ++i) {
      const Vector once = project_ball(ball, testing::uniform_vector(rng, 3, -4, 4));
      const Vector twice = project_ball(ball, once);
      EXPECT_LE((twice - once).norm(), 1e-12 * std::max(1.0, once.norm()));
    }
  }
}

TEST(ProjectBall, RadiusZeroIsOrigin) {
  EXPECT_EQ(project_ball(BallConstraint::l1(0.0), vec({1, -2})), Vector::Zero(2));
  EXPECT_EQ(project_ball(BallConstraint::l2(0.0), vec({1, -2})), Vector::Zero(2));
}

TEST(Scad, Branches) {
  EXPECT_EQ(scad_derivative(0.5, 1.0, 3.7), 1.0);
  EXPECT_EQ(scad_derivative(0.5 * 2.0, 2.0, 3.7), 2.0);
  EXPECT_EQ(scad_derivative(3.7, 1.0, 3.7), 0.0);
  EXPECT_EQ(scad_derivative(10.0, 1.0, 3.7), 0.0);
  EXPECT_NEAR(scad_derivative(2.0, 1.0, 3.7), 1.7 / 2.7, 1e-15);
}

TEST(Scad, InvalidA) {
  try {
    scad_derivative(1.0, 1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidA);
  }
}

TEST(LqaWeights, Examples) {
  EXPECT_NEAR(lqa_weight_diag(LqaLasso{}, vec({1}), 2.0, 1e-300)[0], 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(lqa_weight_diag(LqaLasso{}, vec({0}), 1.0, 1e-6)[0], 1e6);
  EXPECT_EQ(lqa_weight_diag(LqaScad{3.7}, vec({3.7, -5}), 1.0, 1e-6), Vector::Zero(2));
}

TEST(LqaWeights, Errors) {
  EXPECT_THROW(lqa_weight_diag(LqaLasso{}, vec({1}), 1.0, 0.0), Error);
  EXPECT_THROW(lqa_weight_diag(LqaScad{1.5}, vec({1}), 0.0, 1e-6), Error);
  try {
    lqa_penalty_from_spec(PenaltySpec::group_lasso(GroupPartition(std::vector<std::vector<Index>>{{0}})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedPenalty);
  }
  EXPECT_TRUE(std::holds_alternative<LqaLasso>(lqa_penalty_from_spec(PenaltySpec::lasso())));
}

}  // namespace
}  // namespace ree

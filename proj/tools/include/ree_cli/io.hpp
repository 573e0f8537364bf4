#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ree/types.hpp"

namespace ree::cli {

/// Input problem with a file, a field or a flag. Maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Headerless CSV of reals, one row per line.
Matrix read_csv_matrix(const std::filesystem::path& path);
/// A single CSV column or a single CSV row.
Vector read_csv_vector(const std::filesystem::path& path);

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
void write_csv_vector(const std::filesystem::path& path, const Vector& v);

/// %.17g, with inf / -inf / nan spelled out.
std::string format_real(double x);

/// JSON text where every floating value carries 17 significant digits.
/// Non-finite values are written as the strings "inf", "-inf", "nan".
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Inverse of the non-finite spelling used by dump_json.
double json_real(const nlohmann::json& j, const std::string& field);

nlohmann::json to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parses "1.5,2,-3" into reals; the flag name appears in the error.
std::vector<double> parse_real_list(const std::string& text, const std::string& flag);

}  // namespace ree::cli

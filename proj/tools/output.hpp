#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spec_io.hpp"

namespace stabcert::cli {

inline constexpr int kSchemaVersion = 1;

/// Finite doubles as numbers, non-finite ones as the strings "inf", "-inf", "nan".
Json num(double v);
Json to_json(const Vector& v);
Json to_json(const Matrix& m);

/// Comma-separated table with a header row; floats use 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  CsvTable& row();
  CsvTable& cell(double v);
  CsvTable& cell(long long v);
  CsvTable& cell(const std::string& v);
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable matrix_table(const Matrix& m, const std::string& prefix);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace stabcert::cli

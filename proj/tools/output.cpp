#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace stabcert::cli {

namespace {

void ensure_parent(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw InputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
  return a;
}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  rows_.back().emplace_back(buf);
  return *this;
}

CsvTable& CsvTable::cell(long long v) {
  rows_.back().push_back(std::to_string(v));
  return *this;
}

CsvTable& CsvTable::cell(const std::string& v) {
  rows_.back().push_back(v);
  return *this;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out = open_out(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  if (!out) throw InputError("failed writing " + path.string());
}

CsvTable matrix_table(const Matrix& m, const std::string& prefix) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < m.cols(); ++j) header.push_back(prefix + std::to_string(j));
  CsvTable t(header);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    t.row();
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.cell(m(i, j));
  }
  return t;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace stabcert::cli

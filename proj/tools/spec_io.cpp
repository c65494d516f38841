#include "spec_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace stabcert::cli {

namespace {

double number_or(const Json& spec, const char* key, double fallback) {
  if (!spec.contains(key)) return fallback;
  if (!spec.at(key).is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return spec.at(key).get<double>();
}

int count_or(const Json& spec, const char* key, int fallback) {
  if (!spec.contains(key)) return fallback;
  if (!spec.at(key).is_number_integer() || spec.at(key).get<int>() < 1) {
    throw InputError(std::string("field '") + key + "' must be a positive integer");
  }
  return spec.at(key).get<int>();
}

std::vector<Interval> control_set(const Json& spec) {
  if (!spec.contains("control_set")) throw InputError("field 'control_set' is required");
  std::vector<Interval> out;
  for (const Json& iv : spec.at("control_set")) {
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
      throw InputError("control_set entries must be [lo, hi] pairs");
    }
    out.push_back({iv[0].get<double>(), iv[1].get<double>()});
  }
  return out;
}

Json intervals_json(const std::vector<Interval>& set) {
  Json a = Json::array();
  for (const auto& iv : set) a.push_back({iv.lo, iv.hi});
  return a;
}

}  // namespace

Json read_spec(const std::string& arg) {
  std::string text = arg;
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || arg[first] != '{') {
    std::ifstream in(arg);
    if (!in) throw InputError("cannot open system spec '" + arg + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed JSON system spec: ") + e.what());
  }
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw InputError(std::string(what) + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(std::string(what) + " rows must have equal length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) throw InputError(std::string(what) + " entries must be numbers");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

LoadedSystem load_system(const Json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string()) {
    throw InputError("system spec needs a string field 'kind'");
  }
  LoadedSystem out;
  out.kind = spec.at("kind").get<std::string>();
  Json& echo = out.echo;
  echo["kind"] = out.kind;
  try {
    if (out.kind == "matrix") {
      if (!spec.contains("A") || !spec.contains("B")) throw InputError("matrix spec needs 'A' and 'B'");
      const Matrix a = matrix_from_json(spec.at("A"), "A");
      const Matrix b = matrix_from_json(spec.at("B"), "B");
      const std::string label = spec.value("label", std::string("matrix"));
      out.lti = build_system(a, b, label);
      echo["A"] = spec.at("A");
      echo["B"] = spec.at("B");
      echo["label"] = label;
    } else if (out.kind == "point_heat") {
      const int modes = count_or(spec, "modes", 8);
      const double c = number_or(spec, "c", 12.0);
      double x0 = 0.0;
      if (spec.contains("x0") && spec.at("x0").is_string()) {
        if (spec.at("x0").get<std::string>() != "cf") throw InputError("x0 must be a number or \"cf\"");
        const int depth = count_or(spec, "depth", 3);
        out.continued_fraction = continued_fraction_x0(depth);
        x0 = out.continued_fraction->value;
        echo["x0"] = "cf";
        echo["depth"] = depth;
      } else {
        x0 = number_or(spec, "x0", 0.5);
        echo["x0"] = x0;
      }
      out.x0 = x0;
      out.c = c;
      out.spectral = point_control_heat(x0, c, modes);
      echo["c"] = c;
      echo["modes"] = modes;
    } else if (out.kind == "hermite") {
      const int modes = count_or(spec, "modes", 8);
      const double c = number_or(spec, "c", 1.0);
      const auto set = control_set(spec);
      out.c = c;
      out.spectral = hermite_heat(c, set, modes);
      echo["c"] = c;
      echo["control_set"] = intervals_json(set);
      echo["modes"] = modes;
    } else if (out.kind == "fractional") {
      const int modes = count_or(spec, "modes", 8);
      const double s = number_or(spec, "s", 1.0);
      const double c = number_or(spec, "c", 0.0);
      const auto set = control_set(spec);
      out.c = c;
      out.spectral = fractional_heat(s, c, set, modes);
      echo["s"] = s;
      echo["c"] = c;
      echo["control_set"] = intervals_json(set);
      echo["modes"] = modes;
    } else if (out.kind == "periodic_l2") {
      const int modes = count_or(spec, "modes", 10);
      const int terms = count_or(spec, "series_terms", std::max(12, modes + 2));
      out.periodic = build_example4(modes, terms);
      echo["modes"] = modes;
      echo["series_terms"] = terms;
    } else {
      throw InputError("unknown system kind '" + out.kind + "'");
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("bad system spec: ") + e.what());
  } catch (const stabcert::Error& e) {
    throw InputError(std::string("invalid system parameters: ") + e.what());
  }
  if (out.spectral) out.lti = out.spectral->to_lti();
  return out;
}

}  // namespace stabcert::cli

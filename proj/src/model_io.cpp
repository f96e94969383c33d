#include "bloch2q/model_io.hpp"

#include <cstdio>
#include <fstream>

namespace bloch2q {

using nlohmann::json;

namespace {

double number(const json& j, const char* what) {
  if (!j.is_number()) throw ModelFormatError(std::string(what) + " must be a number");
  return j.get<double>();
}

Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2)
    throw ModelFormatError("complex entries are [re, im] pairs");
  return {number(j[0], "real part"), number(j[1], "imaginary part")};
}

Mat3 lambda_from_json(const json& j) {
  Mat3 l;
  if (j.is_array() && j.size() == 9) {
    for (int k = 0; k < 9; ++k) l(k / 3, k % 3) = number(j[k], "lambda entry");
    return l;
  }
  if (!j.is_array() || j.size() != 3) throw ModelFormatError("lambda must be 3x3 or 9 numbers");
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw ModelFormatError("lambda rows must have 3 entries");
    for (int c = 0; c < 3; ++c) l(r, c) = number(j[r][c], "lambda entry");
  }
  return l;
}

void append_number(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g,", x);
  out += buf;
}

}  // namespace

Mat2c matrix2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ModelFormatError("2x2 matrix must have 2 rows");
  Mat2c m;
  for (int r = 0; r < 2; ++r) {
    if (!j[r].is_array() || j[r].size() != 2) throw ModelFormatError("2x2 matrix rows must have 2 entries");
    for (int c = 0; c < 2; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

json matrix2_to_json(const Mat2c& m) {
  json rows = json::array();
  for (int r = 0; r < 2; ++r) {
    json row = json::array();
    for (int c = 0; c < 2; ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

TwoQubitModel model_from_json(const json& doc) {
  if (!doc.is_object()) throw ModelFormatError("model document must be a JSON object");
  TwoQubitModel m;
  if (doc.contains("omega_a")) m.omega_a = number(doc["omega_a"], "omega_a");
  if (doc.contains("omega_b")) m.omega_b = number(doc["omega_b"], "omega_b");

  if (doc.contains("lambda")) {
    m.lambda = lambda_from_json(doc["lambda"]);
  } else if (doc.contains("coupling")) {
    const json& c = doc["coupling"];
    if (!c.is_object() || !c.contains("case") || !c["case"].is_string())
      throw ModelFormatError("coupling needs a string \"case\"");
    const auto tag = parse_coupling(c["case"].get<std::string>());
    if (!tag) throw ModelFormatError("unknown coupling case " + c["case"].get<std::string>());
    m.lambda = CouplingCase{*tag, number(c.value("g", json(1.0)), "g")}.lambda();
  }

  if (doc.contains("jumps")) {
    if (!doc["jumps"].is_array()) throw ModelFormatError("jumps must be a list");
    for (const auto& j : doc["jumps"]) m.jumps_on_A.push_back(matrix2_from_json(j));
  }
  if (doc.contains("controls")) {
    const json& c = doc["controls"];
    if (!c.is_array() || c.size() != 3) throw ModelFormatError("controls must list 3 matrices");
    for (int k = 0; k < 3; ++k) m.control_hams[k] = matrix2_from_json(c[k]);
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(e.what());
  }
  return m;
}

json model_to_json(const TwoQubitModel& m) {
  json doc;
  doc["omega_a"] = m.omega_a;
  doc["omega_b"] = m.omega_b;
  json lam = json::array();
  for (int r = 0; r < 3; ++r) lam.push_back({m.lambda(r, 0), m.lambda(r, 1), m.lambda(r, 2)});
  doc["lambda"] = lam;
  doc["jumps"] = json::array();
  for (const auto& l : m.jumps_on_A) doc["jumps"].push_back(matrix2_to_json(l));
  doc["controls"] = json::array();
  for (const auto& h : m.control_hams) doc["controls"].push_back(matrix2_to_json(h));
  return doc;
}

TwoQubitModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ModelFormatError("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

std::uint64_t model_hash(const TwoQubitModel& m) {
  std::string text;
  append_number(text, m.omega_a);
  append_number(text, m.omega_b);
  for (int k = 0; k < 9; ++k) append_number(text, m.lambda(k / 3, k % 3));
  auto add = [&](const Mat2c& x) {
    for (int k = 0; k < 4; ++k) {
      append_number(text, x(k / 2, k % 2).real());
      append_number(text, x(k / 2, k % 2).imag());
    }
  };
  for (const auto& h : m.control_hams) add(h);
  text += "|";
  for (const auto& l : m.jumps_on_A) add(l);

  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace bloch2q

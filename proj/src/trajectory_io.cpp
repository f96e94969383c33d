#include "bloch2q/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace bloch2q {

namespace {

std::vector<double> row_values(const Trajectory& traj, std::size_t k) {
  const BlochVector& v = traj.states[k];
  std::vector<double> row;
  row.reserve(23);
  row.push_back(traj.times[k]);
  for (int j = 0; j < 3; ++j) row.push_back(traj.controls[k][j]);
  for (int j = 0; j < 16; ++j) row.push_back(v.coordinates()[j]);
  row.push_back(v.squared_norm());
  row.push_back(reduced_purity_A(v));
  row.push_back(reduced_purity_B(v));
  return row;
}

std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"t", "u1", "u2", "u3", "c0"};
    for (int i = 1; i <= 3; ++i) c.push_back("vA" + std::to_string(i));
    for (int i = 1; i <= 9; ++i) c.push_back("vAB" + std::to_string(i));
    for (int i = 1; i <= 3; ++i) c.push_back("vB" + std::to_string(i));
    c.insert(c.end(), {"purity_full", "purity_A", "purity_B"});
    return c;
  }();
  return cols;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out;
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto row = row_values(traj, k);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json trajectory_metadata(const Trajectory& traj) {
  nlohmann::json m;
  m["model_hash"] = hex64(traj.model_hash);
  m["step"] = traj.step;
  m["records"] = traj.size();
  m["max_bound_excess"] = traj.max_bound_excess;
  m["min_eigenvalue"] = traj.min_eigenvalue;
  m["aborted"] = !traj.ok();
  if (traj.abort_reason) m["abort_reason"] = *traj.abort_reason;
  return m;
}

std::string trajectory_json(const Trajectory& traj, const nlohmann::json& metadata) {
  const auto& cols = trajectory_columns();
  std::string out = "{\"metadata\":" + metadata.dump() + ",\"columns\":[";
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? ",\"" : "\"") + cols[i] + "\"";
  out += "],\"records\":[";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto row = row_values(traj, k);
    out += k ? ",\n{" : "\n{";
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += "\"" + cols[i] + "\":" + format_double(row[i]);
    }
    out += '}';
  }
  out += "]}\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace bloch2q

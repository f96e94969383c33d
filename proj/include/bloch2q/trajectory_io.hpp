// trajectory_io.hpp: CSV / JSON export of trajectories and atomic file output.
#pragma once

#include "bloch2q/dynamics.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bloch2q {

/// t,u1,u2,u3,c0,vA1,vA2,vA3,vAB1..vAB9,vB1,vB2,vB3,purity_full,purity_A,purity_B
const std::vector<std::string>& trajectory_columns();

/// %.17g rendering, the only number format used in exports.
std::string format_double(double x);

/// Header line plus one line per recorded state, '\n' terminated.
std::string trajectory_csv(const Trajectory& traj);

/// {"metadata": {...}, "columns": [...], "records": [{column: value, ...}, ...]}
/// Numbers use the same 17-digit rendering as the CSV.
std::string trajectory_json(const Trajectory& traj, const nlohmann::json& metadata);

nlohmann::json trajectory_metadata(const Trajectory& traj);

/// Writes to a temporary sibling and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace bloch2q

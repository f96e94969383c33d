// model_io.hpp: JSON model files.
//
//   {
//     "omega_a": 1.0,
//     "omega_b": 0.5,
//     "lambda":  [[0,0,0],[0,0,0],[0,0,1]],        // or 9 numbers, row-major
//     "jumps":   [ [[[0,0],[0,0]], [[2,0],[0,0]]] ],  // rows of [re, im] pairs
//     "controls": [ ...three 2x2 matrices... ]       // optional, default sigma_1..3
//   }
//
// "coupling": {"case": "dispersive", "g": 1.0} may replace "lambda".

#pragma once

#include "bloch2q/generator.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace bloch2q {

struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TwoQubitModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const TwoQubitModel& model);
TwoQubitModel load_model(const std::filesystem::path& path);

Mat2c matrix2_from_json(const nlohmann::json& doc);
nlohmann::json matrix2_to_json(const Mat2c& m);

/// FNV-1a over a canonical 17-digit rendering of every model parameter.
std::uint64_t model_hash(const TwoQubitModel& model);

}  // namespace bloch2q

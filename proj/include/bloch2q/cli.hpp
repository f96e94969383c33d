// cli.hpp: the `bloch2q` command-line front end.
//
//   bloch2q simulate           --model m.json --horizon 20 --step 1e-3 --u0 0,0,0
//   bloch2q analyze-w          --case resonant --g 1
//   bloch2q purification-scan  --model m.json --laws 10 --horizons 10,20,40
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
// Errors are written to the error stream as one JSON object.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bloch2q {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Default output directory when --out is not given.
inline constexpr const char* kOutDirEnv = "BLOCH2Q_OUT_DIR";

/// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bloch2q

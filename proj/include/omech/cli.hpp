#pragma once

// Command-line front end. Subcommands: device, psd, cool, asymmetry, amplify,
// thermalize, squeeze, dephase, g0fit, budget, limits, reproduce.
//
// Exit codes: 0 success, 1 acceptance failure, 2 configuration error or bad
// usage, 3 numerical failure. Relative output paths are resolved against
// $OMECH_OUTPUT_DIR when it is set. Every output carries the name of the run
// manifest written next to it.

#include <string>
#include <vector>

namespace omech::cli {

inline constexpr const char* kVersion = "0.1.0";

// Built-in configuration describing the reference device and drives.
const std::string& paper_config_text();

int run(int argc, char** argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace omech::cli

#pragma once

#include <string>
#include <vector>

namespace accelcal::cli {

// Runs the command-line tool in-process and returns its exit code:
// 0 success, 1 usage error, 2 malformed input, 3 ill-posed dataset,
// 4 fit did not converge.
int run(int argc, const char* const* argv);

// Same, for tests: args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace accelcal::cli

#pragma once

#include <string>
#include <vector>

namespace gdf::cli {

// Exit codes: 0 ok, 1 malformed config/usage, 2 numerical failure,
// 3 precondition verdict "fails" without --force.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, char** argv);

}  // namespace gdf::cli

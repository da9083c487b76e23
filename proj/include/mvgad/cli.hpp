#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvgad::cli {

// args excludes the program name. 0 success, 1 validation or usage, 2 runtime.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvgad::cli

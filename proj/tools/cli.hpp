#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace calorie::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on usage errors and 2 on data errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace calorie::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phi4::cli {

/// Runs one command. `args` excludes the program name. Returns the process
/// exit code: 0 ok, 1 internal, 2 usage or input, 3 divergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phi4::cli

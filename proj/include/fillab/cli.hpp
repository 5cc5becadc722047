#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fillab::cli {

/// Runs one subcommand. Exit codes: 0 success, 1 domain error (one
/// diagnostic line on err naming the subcommand), 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fillab::cli

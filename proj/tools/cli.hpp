#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hamext::cli {

enum Exit : int {
    ok = 0,
    usage = 1,
    failed = 2,
    unsupported = 3,
    io_error = 4,
};

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace hamext::cli

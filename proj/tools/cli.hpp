#pragma once

namespace sojourn::cli {

/// Entry point of the sojourn-lab command line tool.
/// Exit codes: 0 success, 2 argument/precondition errors, 3 numeric or
/// regime errors (including failed validation criteria).
int run(int argc, const char* const* argv);

}  // namespace sojourn::cli

#pragma once

#include <iosfwd>

namespace director::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kIoFailure = 2, kStepLimit = 3 };

/// Entire command-line program; main() only forwards to this.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace director::cli

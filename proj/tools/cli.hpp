#pragma once

#include <iosfwd>

namespace kangle::cli {

/// Exit status: 0 success, 1 failed residuals or an evaluation error,
/// 2 usage, parse or I/O errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace kangle::cli

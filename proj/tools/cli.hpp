#pragma once

#include <iosfwd>

namespace decmetrics::cli {

// Exit status: 0 success, 1 validation or usage error, 2 backend error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace decmetrics::cli

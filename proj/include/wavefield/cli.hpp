#pragma once

#include <iosfwd>

namespace wavefield {

// Entry point of the `wavefield` tool. Reports go to `out` as JSON, a short
// human-readable summary goes to `err`.
// Returns 0 on success, 1 on a usage error, 2 on a data or store error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavefield

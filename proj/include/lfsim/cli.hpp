#pragma once

#include <iosfwd>

namespace lfsim {

// Entry point for the `run`, `compare`, `tune` and `sweep` subcommands.
// Returns the process exit status; diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lfsim

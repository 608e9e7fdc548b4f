#pragma once

#include <iosfwd>

namespace tcam {

/**
 * Entry point of the `tcam` command line tool.
 *
 * Subcommands: synth, mask, approx, complete, reme, sweep. Returns 0 on
 * success; on failure prints a one-line diagnostic to `err` and returns
 * nonzero.
 */
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tcam

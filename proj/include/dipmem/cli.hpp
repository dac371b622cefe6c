#pragma once

#include <iosfwd>

namespace dipmem {

/// Entry point of the dipmem command: run, design, sweep and verify.
/// Errors go to `err` as one JSON object; the return value is the exit code.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dipmem

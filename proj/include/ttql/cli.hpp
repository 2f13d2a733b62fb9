#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ttql {

/**
 * Entry point of the ttql command-line tool. `args[0]` is the program name.
 *
 * Returns 0 on success, 2 for usage errors (bad flags, unreadable or invalid
 * config, invariant violations in inputs) and 1 for runtime failures. Errors
 * are reported on `err` as one JSON object per line.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ttql

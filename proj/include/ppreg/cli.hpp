#pragma once

#include <iosfwd>

namespace ppreg {

/// Entry point of the `ppreg` command. Returns the process exit status:
/// 0 on success, 1 for model/fitting errors, 2 for I/O and input-format errors.
/// Errors are reported on `err` as a single line `error: E_CODE: message`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ppreg

#pragma once

namespace darn {

// Entry point behind the `darn` binary. Exit codes: 0 success, 1 usage,
// 2 data error, 3 numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace darn

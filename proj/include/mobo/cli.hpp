#pragma once

namespace mobo {

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 on success, 2 for configuration or usage errors, 1 for runtime
/// failures. An aborted run saves its state and prints the path.
int cli_main(int argc, const char* const* argv);

}  // namespace mobo

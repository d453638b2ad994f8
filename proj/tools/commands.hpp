#pragma once

/// CLI entry point, split from main() so the subcommands are testable
/// in-process. Returns the process exit code: 0 success, 1 user error,
/// 2 broken internal invariant.
int run_cli(int argc, const char* const* argv);

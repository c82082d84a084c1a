#pragma once

namespace fcnv {

// Subcommands: analyze, train, eval, bench, export, ladder.
// Machine-readable key<TAB>value lines go to stdout; human tables and
// progress go to stderr. Exit codes: 0 success, 2 usage/config errors,
// 3 data errors, 4 artifact checksum/version/truncation errors.
int run_cli(int argc, const char* const* argv);

}  // namespace fcnv

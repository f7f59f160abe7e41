#pragma once

// Command-line entry points: simulate, track, eval, sweep and fitcov
// subcommands operating on JSON/JSONL files. run() is callable in-process
// so the commands are testable without spawning a binary.

#include <string>
#include <vector>

namespace fgtrack::cli {

int run(const std::vector<std::string>& args);
int run_main(int argc, char** argv);

}  // namespace fgtrack::cli

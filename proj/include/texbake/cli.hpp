#pragma once

namespace texbake {

// Entry point for the command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace texbake

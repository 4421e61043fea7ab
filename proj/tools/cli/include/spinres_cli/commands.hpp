#pragma once

// `spinres <subcommand> --config <path> [--out <dir>] [--seed <int>]`

#include <ostream>
#include <string>
#include <vector>

namespace spinres::cli
{
enum ExitCode : int
{
    exit_ok = 0,
    exit_usage = 1,
    exit_fit_failure = 2,
    exit_parse_failure = 3
};

const std::vector<std::string> &subcommands();

/// Full command-line entry point; never throws.
int run_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
} // namespace spinres::cli

#pragma once

// Subcommand dispatch for the command-line tool: config resolution, artifact
// writing and the exit-code contract.

#include "pil/experiments.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pil {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitCheck = 4;

struct RunOptions {
    std::string subcommand;
    std::string config_path;             // empty: all defaults
    std::string out_dir;                 // empty: out/<subcommand>
    std::optional<std::uint64_t> seed;   // overrides run.seed
    std::optional<int> threads;          // overrides run.threads
    bool quiet = false;
};

const std::vector<std::string>& subcommands();

// Runs one subcommand, writes its artifacts and returns the exit code. Errors
// never escape; they land in <out>/error.json.
int run(const RunOptions& opt, std::ostream& log);

// %.12g, with nan/inf spelled out.
std::string format_number(double v);

std::string to_csv(const ExperimentResult& r);

} // namespace pil

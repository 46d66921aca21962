#include "pil/config.hpp"
#include "pil/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Physical-intelligence numerical laboratory"};
    app.require_subcommand(1);

    pil::RunOptions opt;
    std::uint64_t seed = 0;
    int threads = 1;
    auto* run = app.add_subcommand("run", "Run one subcommand and write its artifacts");
    run->add_option("subcommand", opt.subcommand, "exp1|exp2|exp3|exp4|gates|bitflip|erasure|checks|monitor")
        ->required()
        ->check(CLI::IsMember(pil::subcommands()));
    run->add_option("--config", opt.config_path, "Config file (key = value sections)");
    auto* seed_opt = run->add_option("--seed", seed, "Seed; overrides run.seed");
    auto* thr_opt = run->add_option("--threads", threads, "Parallelism cap")->check(CLI::PositiveNumber);
    run->add_option("--out", opt.out_dir, "Output directory (default out/<subcommand>)");
    run->add_flag("--quiet", opt.quiet, "Suppress the summary line");

    auto* keys = app.add_subcommand("keys", "List config keys with their valid ranges");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : pil::kExitConfig;
    }

    if (*keys) {
        for (const auto& k : pil::config_keys()) std::cout << k << "\n";
        return 0;
    }
    if (*seed_opt) opt.seed = seed;
    if (*thr_opt) opt.threads = threads;
    return pil::run(opt, std::cerr);
}

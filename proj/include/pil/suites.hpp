#pragma once

// Verification suites shared by the command-line runner and the acceptance
// binary.

#include "pil/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pil {

struct GateCheck {
    std::string gate;
    double noise = 0.0;
    bool pass = false;
    std::size_t rows = 0;
    double max_settle_time = 0.0;
    std::string detail;
};

struct FlipFlopCheck {
    double noise = 0.0;
    double settle_time = -1.0;        // after the set pulse ends
    bool hold_ok = false;             // bit stays 1 for the whole hold
    std::vector<int> set_reset;       // stored bits after set, then reset
    double preserved_information = 0.0;
    bool pass = false;
};

struct GateSuite {
    std::vector<GateCheck> gates;
    std::vector<FlipFlopCheck> flipflop;
    bool pass = false;
};

GateSuite gate_suite(const GatesConfig& c, std::uint64_t seed);

FlipFlopCheck flipflop_check(const GatesConfig& c, double noise, std::uint64_t seed);

struct BitflipSweep {
    std::vector<double> durations;
    std::vector<BitFlipReport> reports;
    std::vector<PowerBoundResult> power;
    bool dissipation_nonincreasing = false;
    bool first_law = false;
    bool power_bound = false;
};

// W_diss(T) may rise between neighbours by at most twice the combined
// standard error. The first-law residual is compared against the standard
// error of the work estimator.
BitflipSweep bitflip_sweep(const ThermoConfig& c, std::uint64_t seed);

struct ErasureSuite {
    BitFlipReport slow;
    BitFlipReport nothing;            // starts in basin 1
    BitFlipReport fast;
    PowerBoundResult power_slow;
    PowerBoundResult power_fast;
    double kT_ln2 = 0.0;
    bool landauer = false;            // slow heat >= kT ln 2 - 3 se
    bool nothing_zero = false;        // |heat| <= 3 se
    bool fast_exceeds_slow = false;
    bool first_law = false;
    bool power_bound = false;
};

ErasureSuite erasure_suite(const ThermoConfig& c, std::uint64_t seed);

// Irreversible information released by an erasure-style run, nats.
double logical_information_erased(const BitFlipReport& rep);

// TUR on seeded biased walks, trace bound on the Gaussian and random
// logistic channels, classical power bound on Langevin runs and on a
// synthetic reversible series. Row names start with the check family.
std::vector<CheckResult> run_checks(const ChecksConfig& c, const ThermoConfig& thermo,
                                    std::uint64_t seed, int threads);

} // namespace pil

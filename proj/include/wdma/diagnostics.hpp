#pragma once

// Self-checks behind the `grad-check` and `oracle-check` subcommands.

#include "wdma/harness.hpp"

#include <cstdint>

namespace wdma {

struct GradCheckReport {
    int configurations = 0;
    double max_relative_error = 0.0; // worst over configurations
    double seconds = 0.0;
};

// Random K = 2 problems with N in {1, 2, 4} and beta in {0, 1, 100}; the
// analytic latent gradient is compared with a fourth-order central
// difference of step h. Error per problem: max|a - fd| / max(max|fd|, 1e-8).
GradCheckReport gradient_check(int configurations, std::uint64_t seed, double h = 1e-6);

struct OracleReport {
    int drops = 0;
    double mean_ratio = 0.0;   // mean of U(matching) / U(exhaustive) at equal powers
    double worst_ratio = 1.0;
    int unstable = 0;          // matching results failing the stability check
    double seconds = 0.0;
};

OracleReport oracle_check(const SystemConfig& config, int drops, std::uint64_t seed);

} // namespace wdma

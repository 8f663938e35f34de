#pragma once

// Alternating optimisation of PA positions and powers, Monte Carlo drops,
// experiment sweeps and their CSV / JSON plumbing.

#include "wdma/baselines.hpp"
#include "wdma/pinch_continuous.hpp"
#include "wdma/pinch_discrete.hpp"
#include "wdma/power_alloc.hpp"
#include "wdma/scene.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wdma {

enum class Scheme { gaa, matching, es, gaa_discrete, mrt, conventional };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

struct AoParams {
    ScaParams sca;
    GaaParams gaa;
    int max_rounds = 30;
    double tolerance = 1e-6;
    std::uint64_t matching_seed = 0;
    double enumeration_budget = kDefaultEnumerationBudget;
    // GAA is also started from the MRT layout and the better result kept.
    bool gaa_mrt_start = true;
};

struct AoResult {
    PinchingLayout layout;
    Vector powers;
    Vector rates;
    std::vector<double> trace; // sum rate after every round
    int rounds = 0;
    bool feasible = false;
    bool zf_fallback = false;  // conventional scheme only
    double seconds = 0.0;
    std::optional<MatchingState> matching; // discrete schemes
};

AoResult ao_optimize(Scheme scheme, const Deployment& deployment, const SystemConfig& config,
                     const AoParams& params = {});

// Snap a finished continuous result onto the slot grid and re-allocate power.
AoResult discretized_result(const AoResult& continuous, const Deployment& deployment,
                            const SystemConfig& config, const AoParams& params = {});

// User k uniform over [0, L] x strip k at ground level.
Deployment drop_users(const SystemConfig& config, std::uint64_t seed);

enum class SweepVar { pmax, pas, length, slots };

SweepVar parse_sweep_var(const std::string& name);
std::string sweep_var_name(SweepVar var); // "P_max", "N", "L", "A"

// P_max values are in dBm.
SystemConfig apply_sweep(SystemConfig config, SweepVar var, double value);

struct ExperimentSpec {
    std::vector<Scheme> schemes{Scheme::gaa};
    SweepVar sweep_var = SweepVar::pmax;
    std::vector<double> values{20.0};
    int drops = 100;
    std::uint64_t seed = 1;
    int workers = 1;
    bool timing = false; // record wall time; off keeps output files reproducible

    void validate() const;
};

struct ResultRow {
    std::string sweep_var;
    double sweep_value = 0.0;
    int drop = 0;
    std::string scheme;
    double sum_rate = 0.0;
    std::vector<double> rates;
    bool feasible = false;
    int ao_rounds = 0;
    double seconds = 0.0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
    int num_users = 2;
    std::vector<ResultRow> rows;

    friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

struct SummaryRow {
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string scheme;
    int drops = 0;
    int failed = 0;
    double mean = 0.0;          // over every drop
    double std_error = 0.0;
    double feasible_mean = 0.0; // over feasible drops only
    double feasible_std_error = 0.0;
    bool flagged = false;       // more than 10% of drops failed
};

ResultTable run_experiment(const ExperimentSpec& spec, const SystemConfig& config, const AoParams& params = {});

std::vector<SummaryRow> summarize(const ResultTable& table);

std::string results_header(int num_users);
void export_results(const ResultTable& table, const std::string& path);
ResultTable read_results(const std::string& path);
void export_summary(const std::vector<SummaryRow>& summary, const std::string& path);

// Columns x, y, gain_db_wg1 .. gain_db_wgK over the whole service area.
void export_heatmap(const PinchingLayout& layout, const Deployment& deployment, const SystemConfig& config,
                    const GridSpec& grid, const std::string& path);

struct RunConfig {
    SystemConfig system = SystemConfig::table_defaults();
    AoParams ao;
    ExperimentSpec experiment;
    bool explicit_spacing = false; // min_spacing given; otherwise lambda / 2 of the final carrier

    // Re-derive Delta after carrier overrides unless it was set explicitly.
    void finalize();
};

// JSON with optional sections "system", "sca", "gaa", "ao", "experiment".
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

} // namespace wdma

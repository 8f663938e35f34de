// Command-line front end: solve one drop, run sweeps, export heatmaps and
// run the built-in checks.

#include "wdma/diagnostics.hpp"
#include "wdma/errors.hpp"
#include "wdma/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace wdma;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<double> pmax_dbm;
    std::optional<int> n_pas;
    std::optional<int> n_slots;
    std::optional<double> freq_ghz;
    std::optional<double> width;
    std::optional<double> length;
    std::optional<double> min_rate;
    std::optional<int> drops;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> schemes;
    std::string out;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("--pmax-dbm", pmax_dbm, "BS power budget [dBm]");
        app->add_option("--n-pas", n_pas, "PAs per waveguide (N)");
        app->add_option("--n-slots", n_slots, "candidate slots per waveguide (A)");
        app->add_option("--freq-ghz", freq_ghz, "carrier frequency [GHz]");
        app->add_option("--width", width, "strip width W [m]");
        app->add_option("--length", length, "waveguide length L [m]");
        app->add_option("--min-rate", min_rate, "minimum rate per user [bit/s/Hz]");
        app->add_option("--drops", drops, "drops per sweep point");
        app->add_option("--seed", seed, "base RNG seed");
        app->add_option("--scheme", schemes, "gaa|matching|es|gaa-discrete|mrt|conventional (repeatable)")
            ->delimiter(',');
        app->add_option("--out", out, "output file");
    }

    RunConfig resolve() const {
        RunConfig rc = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        SystemConfig& c = rc.system;
        if (pmax_dbm) c.max_power = dbm_to_watts(*pmax_dbm);
        if (n_pas) c.pas_per_waveguide = *n_pas;
        if (n_slots) c.num_slots = *n_slots;
        if (freq_ghz) c.carrier_freq = *freq_ghz * 1e9;
        if (width) c.strip_width = *width;
        if (length) c.strip_length = *length;
        if (min_rate) c.min_rate.assign(static_cast<std::size_t>(c.num_users), *min_rate);
        if (drops) rc.experiment.drops = *drops;
        if (seed) rc.experiment.seed = *seed;
        if (!schemes.empty()) {
            rc.experiment.schemes.clear();
            for (const auto& s : schemes) rc.experiment.schemes.push_back(parse_scheme(s));
        }
        rc.finalize();
        return rc;
    }
};

Deployment deployment_for(const SystemConfig& config, const std::vector<double>& users, std::uint64_t seed) {
    if (users.empty()) return drop_users(config, seed);
    if (static_cast<int>(users.size()) != 2 * config.num_users)
        throw InvalidConfig("--users needs one x y pair per user");
    std::vector<Point3> pts;
    for (std::size_t k = 0; k < users.size(); k += 2) pts.push_back({users[k], users[k + 1], 0.0});
    return make_deployment(config, std::move(pts));
}

void print_row(const char* label, const Vector& v) {
    std::printf("%s", label);
    for (Eigen::Index i = 0; i < v.size(); ++i) std::printf(" %.9g", v(i));
    std::printf("\n");
}

int run_solve(const Overrides& ov, const std::vector<double>& users) {
    const RunConfig rc = ov.resolve();
    const Deployment dep = deployment_for(rc.system, users, rc.experiment.seed);
    AoParams ap = rc.ao;
    ap.matching_seed = rc.experiment.seed;

    ResultTable table;
    table.num_users = rc.system.num_users;
    for (Scheme scheme : rc.experiment.schemes) {
        const AoResult res = ao_optimize(scheme, dep, rc.system, ap);
        std::printf("scheme %s\n", scheme_name(scheme).c_str());
        for (int k = 0; k < dep.num_users(); ++k)
            std::printf("user %d at (%.6f, %.6f)\n", k + 1, dep.users[static_cast<std::size_t>(k)].x,
                        dep.users[static_cast<std::size_t>(k)].y);
        for (std::size_t r = 0; r < res.trace.size(); ++r) std::printf("round %zu sum_rate %.12g\n", r + 1, res.trace[r]);
        print_row("rates", res.rates);
        print_row("powers_w", res.powers);
        for (int k = 0; k < res.layout.num_waveguides(); ++k) {
            std::printf("waveguide %d x", k + 1);
            for (int n = 0; n < res.layout.num_pas(); ++n) std::printf(" %.9f", res.layout.positions(k, n));
            std::printf("\n");
        }
        if (res.zf_fallback) std::printf("zf_fallback 1\n");
        std::printf("feasible %d\n\n", res.feasible ? 1 : 0);

        ResultRow row;
        row.sweep_var = "P_max";
        row.sweep_value = watts_to_dbm(rc.system.max_power);
        row.scheme = scheme_name(scheme);
        row.sum_rate = res.rates.sum();
        row.rates.assign(res.rates.data(), res.rates.data() + res.rates.size());
        row.feasible = res.feasible;
        row.ao_rounds = res.rounds;
        table.rows.push_back(row);
    }
    if (!ov.out.empty()) export_results(table, ov.out);
    return 0;
}

int run_sweep(const Overrides& ov, const std::optional<std::string>& var, const std::vector<double>& values,
              const std::optional<int>& workers, bool timing, const std::string& summary_path) {
    RunConfig rc = ov.resolve();
    if (var) rc.experiment.sweep_var = parse_sweep_var(*var);
    if (!values.empty()) rc.experiment.values = values;
    if (workers) rc.experiment.workers = *workers;
    if (timing) rc.experiment.timing = true;
    rc.experiment.validate();

    const ResultTable table = run_experiment(rc.experiment, rc.system, rc.ao);
    const auto summary = summarize(table);
    if (!ov.out.empty()) export_results(table, ov.out);
    if (!summary_path.empty()) export_summary(summary, summary_path);
    for (const SummaryRow& s : summary)
        std::printf("%s=%g %-13s mean %.6f (se %.6f) feasible-mean %.6f failed %d/%d%s\n", s.sweep_var.c_str(),
                    s.sweep_value, s.scheme.c_str(), s.mean, s.std_error, s.feasible_mean, s.failed, s.drops,
                    s.flagged ? " FLAGGED" : "");
    return 0;
}

int run_heatmap(const Overrides& ov, const std::vector<double>& users, int nx, int ny) {
    RunConfig rc = ov.resolve();
    const Deployment dep = deployment_for(rc.system, users, rc.experiment.seed);
    const Scheme scheme = ov.schemes.empty() ? Scheme::gaa : rc.experiment.schemes.front();
    if (scheme == Scheme::conventional) throw InvalidConfig("heatmap needs a pinching scheme");
    AoParams ap = rc.ao;
    ap.matching_seed = rc.experiment.seed;
    const AoResult res = ao_optimize(scheme, dep, rc.system, ap);
    const std::string path = ov.out.empty() ? "heatmap.csv" : ov.out;
    export_heatmap(res.layout, dep, rc.system, GridSpec::service_area(rc.system, nx, ny), path);
    std::printf("wrote %s (%d x %d, scheme %s, sum rate %.6f)\n", path.c_str(), nx, ny, scheme_name(scheme).c_str(),
                res.rates.sum());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sum-rate optimisation for waveguide-division pinching-antenna systems"};
    app.require_subcommand(1);

    Overrides solve_ov;
    std::vector<double> solve_users;
    auto* solve = app.add_subcommand("solve", "optimise one drop and print the traces");
    solve_ov.attach(solve);
    solve->add_option("--users", solve_users, "user positions x1 y1 x2 y2 ... [m]");

    Overrides sweep_ov;
    std::optional<std::string> sweep_var;
    std::vector<double> sweep_values;
    std::optional<int> workers;
    bool timing = false;
    std::string summary_path;
    auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep and export CSV");
    sweep_ov.attach(sweep);
    sweep->add_option("--sweep-var", sweep_var, "P_max | N | L | A");
    sweep->add_option("--values", sweep_values, "sweep values (P_max in dBm)")->delimiter(',');
    sweep->add_option("--workers", workers, "worker threads");
    sweep->add_flag("--timing", timing, "record wall time per drop (output no longer reproducible)");
    sweep->add_option("--summary", summary_path, "per-point summary CSV");

    Overrides heat_ov;
    std::vector<double> heat_users;
    int nx = 101;
    int ny = 61;
    auto* heat = app.add_subcommand("heatmap", "export channel-gain maps of an optimised layout");
    heat_ov.attach(heat);
    heat->add_option("--users", heat_users, "user positions x1 y1 x2 y2 ... [m]");
    heat->add_option("--nx", nx, "grid points along x")->check(CLI::PositiveNumber);
    heat->add_option("--ny", ny, "grid points along y")->check(CLI::PositiveNumber);

    int grad_configs = 100;
    std::uint64_t grad_seed = 1;
    double grad_tol = 1e-5;
    auto* grad = app.add_subcommand("grad-check", "compare the analytic gradient with finite differences");
    grad->add_option("--configs", grad_configs, "random configurations")->check(CLI::PositiveNumber);
    grad->add_option("--seed", grad_seed, "RNG seed");
    grad->add_option("--tol", grad_tol, "pass threshold on the relative error");

    Overrides oracle_ov;
    auto* oracle = app.add_subcommand("oracle-check", "compare matching with exhaustive search");
    oracle_ov.attach(oracle);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(solve_ov, solve_users);
        if (sweep->parsed()) return run_sweep(sweep_ov, sweep_var, sweep_values, workers, timing, summary_path);
        if (heat->parsed()) return run_heatmap(heat_ov, heat_users, nx, ny);
        if (grad->parsed()) {
            const GradCheckReport r = gradient_check(grad_configs, grad_seed);
            std::printf("configurations %d max_relative_error %.3e seconds %.2f\n", r.configurations,
                        r.max_relative_error, r.seconds);
            return r.max_relative_error <= grad_tol ? 0 : 1;
        }
        if (oracle->parsed()) {
            if (!oracle_ov.n_pas) oracle_ov.n_pas = 2;
            if (!oracle_ov.n_slots) oracle_ov.n_slots = 6;
            const RunConfig rc = oracle_ov.resolve();
            const OracleReport r = oracle_check(rc.system, rc.experiment.drops, rc.experiment.seed);
            std::printf("drops %d mean_ratio %.6f worst_ratio %.6f unstable %d seconds %.2f\n", r.drops, r.mean_ratio,
                        r.worst_ratio, r.unstable, r.seconds);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

#include "wdma/harness.hpp"
#include "wdma/errors.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace wdma {

namespace {

constexpr double kRateSlack = 1e-6;

struct Allocation {
    Vector powers;
    Vector rates;
};

Allocation allocate(const PinchingLayout& layout, const Vector& p_init, const Deployment& deployment,
                    const SystemConfig& config, const ScaParams& params) {
    const PowerProblem problem = PowerProblem::from_gains(effective_gains(layout, deployment, config), config);
    ScaTrace trace;
    try {
        trace = sca_power_allocation(p_init, problem, params);
    } catch (const InfeasibleStart&) {
        ScaParams relaxed = params;
        relaxed.relax_min_rate = true;
        trace = sca_power_allocation(p_init, problem, relaxed);
    }
    return {trace.powers, problem.rates(trace.powers)};
}

bool rates_met(const Vector& rates, const SystemConfig& config) {
    for (Eigen::Index k = 0; k < rates.size(); ++k)
        if (rates(k) < config.required_rate(static_cast<int>(k)) - kRateSlack) return false;
    return true;
}

// A candidate layout replaces the incumbent when it keeps the minimum rates
// (if the incumbent had them) and does not lower the sum rate.
bool improves(const Vector& cand_rates, const Vector& inc_rates, const SystemConfig& config) {
    const bool cand_ok = rates_met(cand_rates, config);
    const bool inc_ok = rates_met(inc_rates, config);
    if (inc_ok && !cand_ok) return false;
    return cand_rates.sum() >= inc_rates.sum();
}

// Round-1 preference among starts: feasibility first, then sum rate.
bool better_start(const Vector& cand_rates, const Vector& inc_rates, const SystemConfig& config) {
    const bool cand_ok = rates_met(cand_rates, config);
    const bool inc_ok = rates_met(inc_rates, config);
    if (cand_ok != inc_ok) return cand_ok;
    return cand_rates.sum() > inc_rates.sum();
}

void finish(AoResult& res, const Deployment& deployment, const SystemConfig& config) {
    res.rates = user_rates(res.layout, res.powers, deployment, config);
    res.rounds = static_cast<int>(res.trace.size());
    const bool placed = res.layout.mode == LayoutMode::continuous ? is_feasible_continuous(res.layout, config)
                                                                  : is_feasible_discrete(res.layout, config);
    res.feasible = placed && rates_met(res.rates, config) && powers_feasible(res.powers, config);
}

bool converged(const std::vector<double>& trace, double tol) {
    const auto n = trace.size();
    return n >= 2 && trace[n - 1] - trace[n - 2] < tol;
}

AoResult run_gaa(const Deployment& deployment, const SystemConfig& config, const AoParams& params) {
    AoResult res;
    Vector p = equal_power_split(config);

    std::vector<PinchingLayout> starts{uniform_layout(config)};
    if (params.gaa_mrt_start) starts.push_back(mrt_continuous(deployment, config));
    PinchingLayout x;
    Vector x_rates;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        const ContinuousResult cr = penalty_outer(starts[s], p, deployment, config, params.gaa);
        const Vector r = user_rates(cr.layout, p, deployment, config);
        if (s == 0 || better_start(r, x_rates, config)) {
            x = cr.layout;
            x_rates = r;
        }
    }

    for (int round = 0; round < params.max_rounds; ++round) {
        if (round > 0) {
            const ContinuousResult cr = penalty_outer(x, p, deployment, config, params.gaa);
            const Vector inc = user_rates(x, p, deployment, config);
            const Vector cand = user_rates(cr.layout, p, deployment, config);
            if (improves(cand, inc, config)) x = cr.layout;
        }
        p = allocate(x, p, deployment, config, params.sca).powers;
        res.trace.push_back(sum_rate(x, p, deployment, config));
        if (converged(res.trace, params.tolerance)) break;
    }
    res.layout = x;
    res.powers = p;
    finish(res, deployment, config);
    return res;
}

AoResult run_matching(const Deployment& deployment, const SystemConfig& config, const AoParams& params) {
    AoResult res;
    Vector p = equal_power_split(config);
    MatchingState state = init_matching(config, deployment, p, params.matching_seed).state;
    for (int round = 0; round < params.max_rounds; ++round) {
        state = matching_search(state, p, deployment, config).state;
        p = allocate(state.layout(config), p, deployment, config, params.sca).powers;
        res.trace.push_back(utility(state, p, deployment, config));
        if (converged(res.trace, params.tolerance)) break;
    }
    res.layout = state.layout(config);
    res.powers = p;
    res.matching = state;
    finish(res, deployment, config);
    return res;
}

AoResult run_exhaustive(const Deployment& deployment, const SystemConfig& config, const AoParams& params) {
    AoResult res;
    Vector p = equal_power_split(config);
    MatchingState state;
    for (int round = 0; round < params.max_rounds; ++round) {
        const ExhaustiveResult es = exhaustive_search(p, deployment, config, params.enumeration_budget);
        if (round == 0 || improves(user_rates(es.state.layout(config), p, deployment, config),
                                   user_rates(state.layout(config), p, deployment, config), config))
            state = es.state;
        p = allocate(state.layout(config), p, deployment, config, params.sca).powers;
        res.trace.push_back(utility(state, p, deployment, config));
        if (converged(res.trace, params.tolerance)) break;
    }
    res.layout = state.layout(config);
    res.powers = p;
    res.matching = state;
    finish(res, deployment, config);
    return res;
}

AoResult run_mrt(const Deployment& deployment, const SystemConfig& config, const AoParams& params) {
    AoResult res;
    res.layout = mrt_continuous(deployment, config);
    res.powers = allocate(res.layout, equal_power_split(config), deployment, config, params.sca).powers;
    res.trace.push_back(sum_rate(res.layout, res.powers, deployment, config));
    finish(res, deployment, config);
    return res;
}

AoResult run_conventional(const Deployment& deployment, const SystemConfig& config, const AoParams& params) {
    const ConventionalResult c = conventional_fixed(deployment, config, params.sca);
    AoResult res;
    res.layout.positions.resize(config.num_users, 0);
    res.powers = c.powers;
    res.rates = c.rates;
    res.trace.push_back(c.sum_rate);
    res.rounds = 1;
    res.feasible = c.feasible && powers_feasible(c.powers, config);
    res.zf_fallback = c.zf_fallback;
    return res;
}

} // namespace

Scheme parse_scheme(const std::string& name) {
    static const std::map<std::string, Scheme> names{
        {"gaa", Scheme::gaa},
        {"matching", Scheme::matching},
        {"es", Scheme::es},
        {"gaa-discrete", Scheme::gaa_discrete},
        {"mrt", Scheme::mrt},
        {"conventional", Scheme::conventional},
    };
    const auto it = names.find(name);
    if (it == names.end()) throw InvalidConfig("unknown scheme '" + name + "'");
    return it->second;
}

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
    case Scheme::gaa: return "gaa";
    case Scheme::matching: return "matching";
    case Scheme::es: return "es";
    case Scheme::gaa_discrete: return "gaa-discrete";
    case Scheme::mrt: return "mrt";
    case Scheme::conventional: return "conventional";
    }
    return "?";
}

AoResult ao_optimize(Scheme scheme, const Deployment& deployment, const SystemConfig& config,
                     const AoParams& params) {
    config.validate();
    if (params.max_rounds < 1 || !(params.tolerance > 0.0)) throw InvalidConfig("invalid AO parameters");
    const auto t0 = std::chrono::steady_clock::now();
    AoResult res;
    switch (scheme) {
    case Scheme::gaa: res = run_gaa(deployment, config, params); break;
    case Scheme::matching: res = run_matching(deployment, config, params); break;
    case Scheme::es: res = run_exhaustive(deployment, config, params); break;
    case Scheme::gaa_discrete:
        res = discretized_result(run_gaa(deployment, config, params), deployment, config, params);
        break;
    case Scheme::mrt: res = run_mrt(deployment, config, params); break;
    case Scheme::conventional: res = run_conventional(deployment, config, params); break;
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

AoResult discretized_result(const AoResult& continuous, const Deployment& deployment, const SystemConfig& config,
                            const AoParams& params) {
    AoResult res;
    const MatchingState state = discretize_continuous(continuous.layout, config);
    res.layout = state.layout(config);
    res.matching = state;
    res.powers = allocate(res.layout, continuous.powers, deployment, config, params.sca).powers;
    res.trace.push_back(sum_rate(res.layout, res.powers, deployment, config));
    finish(res, deployment, config);
    return res;
}

Deployment drop_users(const SystemConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point3> users;
    for (int k = 0; k < config.num_users; ++k) {
        const auto [lo, hi] = service_strip(k, config);
        const double x = config.strip_length * unit(rng);
        const double y = lo + (hi - lo) * unit(rng);
        users.push_back({x, y, 0.0});
    }
    return make_deployment(config, std::move(users));
}

SweepVar parse_sweep_var(const std::string& name) {
    if (name == "P_max" || name == "pmax") return SweepVar::pmax;
    if (name == "N") return SweepVar::pas;
    if (name == "L") return SweepVar::length;
    if (name == "A") return SweepVar::slots;
    throw InvalidConfig("unknown sweep variable '" + name + "'");
}

std::string sweep_var_name(SweepVar var) {
    switch (var) {
    case SweepVar::pmax: return "P_max";
    case SweepVar::pas: return "N";
    case SweepVar::length: return "L";
    case SweepVar::slots: return "A";
    }
    return "?";
}

SystemConfig apply_sweep(SystemConfig config, SweepVar var, double value) {
    auto as_count = [value](const char* what) {
        if (value < 1.0 || std::floor(value) != value) throw InvalidConfig(std::string(what) + " must be a positive integer");
        return static_cast<int>(value);
    };
    switch (var) {
    case SweepVar::pmax: config.max_power = dbm_to_watts(value); break;
    case SweepVar::pas: config.pas_per_waveguide = as_count("N"); break;
    case SweepVar::length: config.strip_length = value; break;
    case SweepVar::slots: config.num_slots = as_count("A"); break;
    }
    config.validate();
    return config;
}

void ExperimentSpec::validate() const {
    if (drops < 1) throw InvalidConfig("drops must be >= 1");
    if (workers < 1) throw InvalidConfig("workers must be >= 1");
    if (schemes.empty()) throw InvalidConfig("at least one scheme is required");
    if (values.empty()) throw InvalidConfig("at least one sweep value is required");
}

ResultTable run_experiment(const ExperimentSpec& spec, const SystemConfig& config, const AoParams& params) {
    spec.validate();
    config.validate();
    std::vector<SystemConfig> configs;
    for (double v : spec.values) configs.push_back(apply_sweep(config, spec.sweep_var, v));

    const std::size_t units = spec.values.size() * static_cast<std::size_t>(spec.drops);
    std::vector<std::vector<ResultRow>> slots(units);
    const std::string var = sweep_var_name(spec.sweep_var);

    auto run_unit = [&](std::size_t u) {
        const std::size_t vi = u / static_cast<std::size_t>(spec.drops);
        const int drop = static_cast<int>(u % static_cast<std::size_t>(spec.drops));
        const SystemConfig& cfg = configs[vi];
        const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(drop);
        const Deployment dep = drop_users(cfg, seed);
        AoParams ap = params;
        ap.matching_seed = seed;

        std::optional<AoResult> gaa_cache;
        for (Scheme scheme : spec.schemes) {
            ResultRow row;
            row.sweep_var = var;
            row.sweep_value = spec.values[vi];
            row.drop = drop;
            row.scheme = scheme_name(scheme);
            try {
                AoResult res;
                const auto t0 = std::chrono::steady_clock::now();
                if (scheme == Scheme::gaa || scheme == Scheme::gaa_discrete) {
                    if (!gaa_cache) gaa_cache = ao_optimize(Scheme::gaa, dep, cfg, ap);
                    res = scheme == Scheme::gaa ? *gaa_cache : discretized_result(*gaa_cache, dep, cfg, ap);
                } else {
                    res = ao_optimize(scheme, dep, cfg, ap);
                }
                const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                row.sum_rate = res.rates.sum();
                row.rates.assign(res.rates.data(), res.rates.data() + res.rates.size());
                row.feasible = res.feasible;
                row.ao_rounds = res.rounds;
                row.seconds = spec.timing ? elapsed : 0.0;
            } catch (const std::exception&) {
                row.sum_rate = std::nan("");
                row.rates.assign(static_cast<std::size_t>(cfg.num_users), std::nan(""));
                row.feasible = false;
            }
            slots[u].push_back(std::move(row));
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t u = next++; u < units; u = next++) run_unit(u);
    };
    const int threads = std::min<int>(spec.workers, static_cast<int>(units));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ResultTable table;
    table.num_users = config.num_users;
    for (auto& unit : slots)
        for (auto& row : unit) table.rows.push_back(std::move(row));
    return table;
}

namespace {

struct Moments {
    double mean = 0.0;
    double std_error = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) {
        m.mean = std::nan("");
        m.std_error = std::nan("");
        return m;
    }
    double s = 0.0;
    for (double x : xs) s += x;
    m.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return m;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("malformed number '" + s + "'");
    return v;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void close_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace

std::vector<SummaryRow> summarize(const ResultTable& table) {
    std::vector<SummaryRow> out;
    std::vector<std::vector<double>> all;
    std::vector<std::vector<double>> feasible;
    for (const ResultRow& row : table.rows) {
        std::size_t i = 0;
        while (i < out.size() && !(out[i].sweep_var == row.sweep_var && out[i].sweep_value == row.sweep_value &&
                                   out[i].scheme == row.scheme))
            ++i;
        if (i == out.size()) {
            SummaryRow s;
            s.sweep_var = row.sweep_var;
            s.sweep_value = row.sweep_value;
            s.scheme = row.scheme;
            out.push_back(s);
            all.emplace_back();
            feasible.emplace_back();
        }
        ++out[i].drops;
        if (!row.feasible || !std::isfinite(row.sum_rate)) ++out[i].failed;
        if (std::isfinite(row.sum_rate)) all[i].push_back(row.sum_rate);
        if (row.feasible && std::isfinite(row.sum_rate)) feasible[i].push_back(row.sum_rate);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Moments a = moments(all[i]);
        const Moments f = moments(feasible[i]);
        out[i].mean = a.mean;
        out[i].std_error = a.std_error;
        out[i].feasible_mean = f.mean;
        out[i].feasible_std_error = f.std_error;
        out[i].flagged = out[i].failed * 10 > out[i].drops;
    }
    return out;
}

std::string results_header(int num_users) {
    std::string h = "sweep_var,sweep_value,drop,scheme,sum_rate";
    for (int k = 1; k <= num_users; ++k) h += ",rate_user" + std::to_string(k);
    h += ",feasible,ao_rounds,seconds";
    return h;
}

void export_results(const ResultTable& table, const std::string& path) {
    std::ofstream out = open_output(path);
    out << results_header(table.num_users) << '\n';
    for (const ResultRow& row : table.rows) {
        if (static_cast<int>(row.rates.size()) != table.num_users)
            throw std::invalid_argument("result row has the wrong number of user rates");
        out << row.sweep_var << ',' << fmt(row.sweep_value) << ',' << row.drop << ',' << row.scheme << ','
            << fmt(row.sum_rate);
        for (double r : row.rates) out << ',' << fmt(r);
        out << ',' << (row.feasible ? 1 : 0) << ',' << row.ao_rounds << ',' << fmt(row.seconds) << '\n';
    }
    close_output(out, path);
}

ResultTable read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
    const auto head = split_csv(line);
    const int users = static_cast<int>(head.size()) - 8;
    if (users < 1 || line != results_header(users)) throw std::runtime_error("unexpected header in '" + path + "'");

    ResultTable table;
    table.num_users = users;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != head.size()) throw std::runtime_error("row with wrong column count in '" + path + "'");
        ResultRow row;
        std::size_t c = 0;
        row.sweep_var = cells[c++];
        row.sweep_value = parse_double(cells[c++]);
        row.drop = std::stoi(cells[c++]);
        row.scheme = cells[c++];
        row.sum_rate = parse_double(cells[c++]);
        for (int k = 0; k < users; ++k) row.rates.push_back(parse_double(cells[c++]));
        row.feasible = cells[c++] == "1";
        row.ao_rounds = std::stoi(cells[c++]);
        row.seconds = parse_double(cells[c++]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

void export_summary(const std::vector<SummaryRow>& summary, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "sweep_var,sweep_value,scheme,drops,failed,mean,std_error,feasible_mean,feasible_std_error,flagged\n";
    for (const SummaryRow& s : summary)
        out << s.sweep_var << ',' << fmt(s.sweep_value) << ',' << s.scheme << ',' << s.drops << ',' << s.failed << ','
            << fmt(s.mean) << ',' << fmt(s.std_error) << ',' << fmt(s.feasible_mean) << ','
            << fmt(s.feasible_std_error) << ',' << (s.flagged ? 1 : 0) << '\n';
    close_output(out, path);
}

void export_heatmap(const PinchingLayout& layout, const Deployment& deployment, const SystemConfig& config,
                    const GridSpec& grid, const std::string& path) {
    std::vector<Matrix> maps;
    for (int k = 0; k < layout.num_waveguides(); ++k)
        maps.push_back(channel_gain_map(k, layout, grid, deployment, config));
    std::ofstream out = open_output(path);
    out << "x,y";
    for (int k = 1; k <= layout.num_waveguides(); ++k) out << ",gain_db_wg" << k;
    out << '\n';
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            out << fmt(grid.x(i)) << ',' << fmt(grid.y(j));
            for (const Matrix& m : maps) out << ',' << fmt(m(j, i));
            out << '\n';
        }
    close_output(out, path);
}

namespace {

using nlohmann::json;

void check_keys(const json& section, const char* name, std::initializer_list<const char*> known) {
    if (!section.is_object()) throw InvalidConfig(std::string("section '") + name + "' must be an object");
    for (const auto& item : section.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok) throw InvalidConfig(std::string("unknown key '") + item.key() + "' in section '" + name + "'");
    }
}

template <typename T>
void read(const json& section, const char* key, T& target) {
    if (section.contains(key)) target = section.at(key).get<T>();
}

std::vector<double> per_user(const json& v) {
    if (v.is_array()) return v.get<std::vector<double>>();
    return {v.get<double>()};
}

} // namespace

void RunConfig::finalize() {
    if (!explicit_spacing) system.min_spacing = derive_wavelengths(system).free_space / 2.0;
    system.broadcast_per_user();
    system.validate();
    ao.gaa.validate();
    experiment.validate();
}

RunConfig parse_run_config(const std::string& json_text) {
    RunConfig rc;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        check_keys(doc, "root", {"system", "sca", "gaa", "ao", "experiment"});
        if (doc.contains("system")) {
            const json& s = doc.at("system");
            check_keys(s, "system",
                       {"num_users", "pas_per_waveguide", "num_slots", "carrier_freq", "refractive_index", "height",
                        "strip_width", "strip_length", "min_spacing", "max_power", "max_power_dbm", "noise_power",
                        "noise_power_dbm", "min_rate", "light_speed"});
            SystemConfig& c = rc.system;
            read(s, "num_users", c.num_users);
            read(s, "pas_per_waveguide", c.pas_per_waveguide);
            read(s, "num_slots", c.num_slots);
            read(s, "carrier_freq", c.carrier_freq);
            read(s, "refractive_index", c.refractive_index);
            read(s, "height", c.height);
            read(s, "strip_width", c.strip_width);
            read(s, "strip_length", c.strip_length);
            read(s, "light_speed", c.light_speed);
            if (s.contains("min_spacing")) {
                c.min_spacing = s.at("min_spacing").get<double>();
                rc.explicit_spacing = true;
            }
            read(s, "max_power", c.max_power);
            if (s.contains("max_power_dbm")) c.max_power = dbm_to_watts(s.at("max_power_dbm").get<double>());
            if (s.contains("noise_power")) c.noise_power = per_user(s.at("noise_power"));
            if (s.contains("noise_power_dbm")) {
                c.noise_power = per_user(s.at("noise_power_dbm"));
                for (double& v : c.noise_power) v = dbm_to_watts(v);
            }
            if (s.contains("min_rate")) c.min_rate = per_user(s.at("min_rate"));
            if (c.noise_power.size() == 0 || c.min_rate.size() == 0) throw InvalidConfig("empty per-user list");
            c.broadcast_per_user();
        }
        if (doc.contains("sca")) {
            const json& s = doc.at("sca");
            check_keys(s, "sca", {"tolerance", "max_iters", "barrier_gap", "barrier_growth", "newton_tol",
                                  "max_newton_steps"});
            ScaParams& p = rc.ao.sca;
            read(s, "tolerance", p.tolerance);
            read(s, "max_iters", p.max_iters);
            read(s, "barrier_gap", p.barrier_gap);
            read(s, "barrier_growth", p.barrier_growth);
            read(s, "newton_tol", p.newton_tol);
            read(s, "max_newton_steps", p.max_newton_steps);
        }
        if (doc.contains("gaa")) {
            const json& s = doc.at("gaa");
            check_keys(s, "gaa", {"beta", "rho", "beta_growth", "rho_decay", "step_init", "step_shrink", "armijo",
                                  "tolerance", "max_inner", "max_outer", "max_shrinks", "spacing_form"});
            GaaParams& p = rc.ao.gaa;
            read(s, "beta", p.beta);
            read(s, "rho", p.rho);
            read(s, "beta_growth", p.beta_growth);
            read(s, "rho_decay", p.rho_decay);
            read(s, "step_init", p.step_init);
            read(s, "step_shrink", p.step_shrink);
            read(s, "armijo", p.armijo);
            read(s, "tolerance", p.tolerance);
            read(s, "max_inner", p.max_inner);
            read(s, "max_outer", p.max_outer);
            read(s, "max_shrinks", p.max_shrinks);
            if (s.contains("spacing_form")) {
                const auto form = s.at("spacing_form").get<std::string>();
                if (form == "latent") p.spacing_form = SpacingForm::latent;
                else if (form == "box") p.spacing_form = SpacingForm::box;
                else throw InvalidConfig("spacing_form must be 'latent' or 'box'");
            }
        }
        if (doc.contains("ao")) {
            const json& s = doc.at("ao");
            check_keys(s, "ao", {"max_rounds", "tolerance", "enumeration_budget", "gaa_mrt_start"});
            read(s, "max_rounds", rc.ao.max_rounds);
            read(s, "tolerance", rc.ao.tolerance);
            read(s, "enumeration_budget", rc.ao.enumeration_budget);
            read(s, "gaa_mrt_start", rc.ao.gaa_mrt_start);
        }
        if (doc.contains("experiment")) {
            const json& s = doc.at("experiment");
            check_keys(s, "experiment", {"schemes", "sweep_var", "values", "drops", "seed", "workers", "timing"});
            ExperimentSpec& e = rc.experiment;
            if (s.contains("schemes")) {
                e.schemes.clear();
                const json& v = s.at("schemes");
                if (v.is_array())
                    for (const auto& name : v) e.schemes.push_back(parse_scheme(name.get<std::string>()));
                else
                    e.schemes.push_back(parse_scheme(v.get<std::string>()));
            }
            if (s.contains("sweep_var")) e.sweep_var = parse_sweep_var(s.at("sweep_var").get<std::string>());
            read(s, "values", e.values);
            read(s, "drops", e.drops);
            read(s, "seed", e.seed);
            read(s, "workers", e.workers);
            read(s, "timing", e.timing);
        }
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config field has the wrong type: ") + e.what());
    }
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

} // namespace wdma

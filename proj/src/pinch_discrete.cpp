#include "wdma/pinch_discrete.hpp"
#include "wdma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace wdma {

bool MatchingState::occupied(int k, int slot) const {
    const auto& row = slots.at(static_cast<std::size_t>(k));
    return std::find(row.begin(), row.end(), slot) != row.end();
}

bool MatchingState::valid(const SystemConfig& config) const {
    if (num_waveguides() != config.num_users) return false;
    for (const auto& row : slots) {
        if (static_cast<int>(row.size()) != config.pas_per_waveguide) return false;
        for (int s : row)
            if (s < 0 || s >= config.num_slots) return false;
        std::vector<int> sorted = row;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    }
    return true;
}

PinchingLayout MatchingState::layout(const SystemConfig& config) const {
    PinchingLayout out;
    out.mode = LayoutMode::discrete;
    const int K = num_waveguides();
    const int N = K > 0 ? static_cast<int>(slots.front().size()) : 0;
    out.positions.resize(K, N);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n)
            out.positions(k, n) = slot_position(slots[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)], config);
    out.sort_rows();
    return out;
}

void MatchingState::canonicalize() {
    for (auto& row : slots) std::sort(row.begin(), row.end());
}

double utility(const MatchingState& state, const Vector& powers, const Deployment& deployment,
               const SystemConfig& config) {
    return sum_rate(state.layout(config), powers, deployment, config);
}

namespace {

double min_rate_slack(const Vector& rates, const SystemConfig& config) {
    double slack = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < rates.size(); ++k)
        slack = std::min(slack, rates(k) - config.required_rate(static_cast<int>(k)));
    return slack;
}

} // namespace

bool meets_min_rates(const MatchingState& state, const Vector& powers, const Deployment& deployment,
                     const SystemConfig& config) {
    return min_rate_slack(user_rates(state.layout(config), powers, deployment, config), config) >= 0.0;
}

MatchingInit init_matching(const SystemConfig& config, const Deployment& deployment, const Vector& powers,
                           std::uint64_t seed, int max_attempts) {
    if (config.num_slots < config.pas_per_waveguide)
        throw InvalidConfig("matching needs num_slots >= pas_per_waveguide");
    std::mt19937_64 rng(seed);
    std::vector<int> pool(static_cast<std::size_t>(config.num_slots));

    MatchingInit best;
    double best_slack = -std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        MatchingState state;
        for (int k = 0; k < config.num_users; ++k) {
            std::iota(pool.begin(), pool.end(), 0);
            std::shuffle(pool.begin(), pool.end(), rng);
            state.slots.emplace_back(pool.begin(), pool.begin() + config.pas_per_waveguide);
        }
        state.canonicalize();
        const double slack = min_rate_slack(user_rates(state.layout(config), powers, deployment, config), config);
        if (attempt == 0 || slack > best_slack) {
            best.state = state;
            best_slack = slack;
        }
        best.attempts = attempt + 1;
        if (slack >= 0.0) {
            best.state = std::move(state);
            best.feasible = true;
            return best;
        }
    }
    return best;
}

SwapOutcome propose_swap(const MatchingState& state, int k, int n, int slot, const Vector& powers,
                         const Deployment& deployment, const SystemConfig& config) {
    SwapOutcome out;
    out.state = state;
    out.utility = utility(state, powers, deployment, config);
    if (slot < 0 || slot >= config.num_slots || state.occupied(k, slot)) return out;

    MatchingState cand = state;
    cand.slots[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] = slot;
    const Vector rates = user_rates(cand.layout(config), powers, deployment, config);
    const double u = rates.sum();
    if (u > out.utility && min_rate_slack(rates, config) >= 0.0) {
        out.accepted = true;
        out.state = std::move(cand);
        out.utility = u;
    }
    return out;
}

MatchingResult matching_search(const MatchingState& start, const Vector& powers, const Deployment& deployment,
                               const SystemConfig& config) {
    if (!start.valid(config)) throw std::invalid_argument("matching_search: invalid initial matching");
    MatchingResult res;
    res.state = start;
    double current = utility(start, powers, deployment, config);
    res.trace.utility.push_back(current);

    bool changed = true;
    while (changed) {
        changed = false;
        ++res.trace.sweeps;
        for (int k = 0; k < config.num_users; ++k) {
            auto& row = res.state.slots[static_cast<std::size_t>(k)];
            for (int n = 0; n < config.pas_per_waveguide; ++n) {
                for (int a = 0; a < config.num_slots; ++a) {
                    if (res.state.occupied(k, a)) continue;
                    const int previous = row[static_cast<std::size_t>(n)];
                    row[static_cast<std::size_t>(n)] = a;
                    const Vector rates = user_rates(res.state.layout(config), powers, deployment, config);
                    const double u = rates.sum();
                    if (u > current && min_rate_slack(rates, config) >= 0.0) {
                        current = u;
                        res.trace.utility.push_back(u);
                        ++res.trace.swaps;
                        changed = true;
                    } else {
                        row[static_cast<std::size_t>(n)] = previous;
                    }
                }
            }
        }
    }
    res.state.canonicalize();
    res.trace.stable = stability_check(res.state, powers, deployment, config);
    return res;
}

bool stability_check(const MatchingState& state, const Vector& powers, const Deployment& deployment,
                     const SystemConfig& config) {
    const double current = utility(state, powers, deployment, config);
    MatchingState probe = state;
    for (int k = 0; k < state.num_waveguides(); ++k) {
        auto& row = probe.slots[static_cast<std::size_t>(k)];
        for (std::size_t n = 0; n < row.size(); ++n) {
            for (int a = 0; a < config.num_slots; ++a) {
                if (probe.occupied(k, a)) continue;
                const int previous = row[n];
                row[n] = a;
                const Vector rates = user_rates(probe.layout(config), powers, deployment, config);
                row[n] = previous;
                if (rates.sum() > current && min_rate_slack(rates, config) >= 0.0) return false;
            }
        }
    }
    return true;
}

double enumeration_size(const SystemConfig& config) {
    double per_guide = 1.0;
    for (int i = 0; i < config.pas_per_waveguide; ++i)
        per_guide = per_guide * (config.num_slots - i) / (i + 1);
    return std::pow(per_guide, config.num_users);
}

namespace {

std::vector<std::vector<int>> combinations(int n_items, int choose) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(static_cast<std::size_t>(choose));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        out.push_back(idx);
        int i = choose - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n_items - choose + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < choose; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

} // namespace

ExhaustiveResult exhaustive_search(const Vector& powers, const Deployment& deployment,
                                   const SystemConfig& config, double budget) {
    const double size = enumeration_size(config);
    if (!(size <= budget))
        throw BudgetExceeded("exhaustive search over " + std::to_string(size) + " states exceeds budget " +
                             std::to_string(budget));
    const int K = config.num_users;
    const int A = config.num_slots;
    const auto combos = combinations(A, config.pas_per_waveguide);
    const Wavelengths w = derive_wavelengths(config);

    // slot_term[i][a](k): contribution of a PA at slot a of waveguide i to alpha(i, k).
    std::vector<std::vector<ComplexVector>> slot_term(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        for (int a = 0; a < A; ++a) {
            const double x = slot_position(a, config);
            ComplexVector t(K);
            for (int k = 0; k < K; ++k) {
                const double r = user_pa_distance(deployment.users[static_cast<std::size_t>(k)],
                                                  {x, deployment.waveguide_y[static_cast<std::size_t>(i)], deployment.height});
                t(k) = std::polar(w.eta / r, -2.0 * kPi * (r / w.free_space + x / w.guided));
            }
            slot_term[static_cast<std::size_t>(i)].push_back(std::move(t));
        }
    }
    // combo_gain[i][c](k) = |alpha(i, k)|^2 for waveguide i holding combination c.
    std::vector<std::vector<Vector>> combo_gain(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        for (const auto& c : combos) {
            ComplexVector alpha = ComplexVector::Zero(K);
            for (int a : c) alpha += slot_term[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
            combo_gain[static_cast<std::size_t>(i)].push_back(alpha.cwiseAbs2());
        }
    }

    ExhaustiveResult best;
    best.utility = -std::numeric_limits<double>::infinity();
    double best_any = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(static_cast<std::size_t>(K), 0);
    std::vector<std::size_t> best_pick = pick;
    std::vector<std::size_t> best_any_pick = pick;
    Matrix upsilon(K, K);
    while (true) {
        for (int i = 0; i < K; ++i)
            upsilon.row(i) = combo_gain[static_cast<std::size_t>(i)][pick[static_cast<std::size_t>(i)]].transpose();
        double total = 0.0;
        bool ok = true;
        for (int k = 0; k < K; ++k) {
            const double r = rate_from_gains(k, upsilon, powers, config.pas_per_waveguide * config.noise(k));
            total += r;
            if (r < config.required_rate(k)) ok = false;
        }
        ++best.states;
        if (ok && total > best.utility) {
            best.utility = total;
            best_pick = pick;
            best.feasible = true;
        }
        if (total > best_any) {
            best_any = total;
            best_any_pick = pick;
        }
        int i = K - 1;
        while (i >= 0 && ++pick[static_cast<std::size_t>(i)] == combos.size()) pick[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
    }
    if (!best.feasible) {
        best_pick = best_any_pick;
        best.utility = best_any;
    }
    for (int i = 0; i < K; ++i) best.state.slots.push_back(combos[best_pick[static_cast<std::size_t>(i)]]);
    return best;
}

MatchingState discretize_continuous(const PinchingLayout& continuous, const SystemConfig& config) {
    const int A = config.num_slots;
    const double spacing = slot_spacing(config);
    MatchingState state;
    for (int k = 0; k < continuous.num_waveguides(); ++k) {
        const int N = continuous.num_pas();
        std::vector<int> nearest(static_cast<std::size_t>(N));
        std::vector<double> error(static_cast<std::size_t>(N));
        for (int n = 0; n < N; ++n) {
            const double x = continuous.positions(k, n);
            const int s = A < 2 ? 0 : std::clamp(static_cast<int>(std::lround(x / spacing)), 0, A - 1);
            nearest[static_cast<std::size_t>(n)] = s;
            error[static_cast<std::size_t>(n)] = std::abs(x - slot_position(s, config));
        }
        std::vector<int> order(static_cast<std::size_t>(N));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return error[static_cast<std::size_t>(a)] < error[static_cast<std::size_t>(b)]; });

        std::vector<bool> taken(static_cast<std::size_t>(A), false);
        std::vector<int> row(static_cast<std::size_t>(N), -1);
        for (int n : order) {
            int s = nearest[static_cast<std::size_t>(n)];
            if (taken[static_cast<std::size_t>(s)]) {
                const double x = continuous.positions(k, n);
                double best = std::numeric_limits<double>::infinity();
                for (int a = 0; a < A; ++a) {
                    if (taken[static_cast<std::size_t>(a)]) continue;
                    const double d = std::abs(x - slot_position(a, config));
                    if (d < best) {
                        best = d;
                        s = a;
                    }
                }
            }
            taken[static_cast<std::size_t>(s)] = true;
            row[static_cast<std::size_t>(n)] = s;
        }
        std::sort(row.begin(), row.end());
        state.slots.push_back(std::move(row));
    }
    return state;
}

} // namespace wdma

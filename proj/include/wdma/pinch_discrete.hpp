#pragma once

// Discrete PA placement: each PA of waveguide k occupies one of the A
// candidate slots of that waveguide, at most one PA per slot. Solved by a
// one-sided matching in which PAs re-locate to free slots whenever that
// strictly raises the sum rate without breaking a minimum-rate requirement.

#include "wdma/scene.hpp"

#include <cstdint>
#include <vector>

namespace wdma {

// slots[k][n] is the 0-based slot index held by PA n of waveguide k.
struct MatchingState {
    std::vector<std::vector<int>> slots;

    int num_waveguides() const { return static_cast<int>(slots.size()); }
    bool occupied(int k, int slot) const;
    // Restriction, totality and injectivity against the slot count of `config`.
    bool valid(const SystemConfig& config) const;
    PinchingLayout layout(const SystemConfig& config) const;
    void canonicalize(); // sort each waveguide's slot list

    friend bool operator==(const MatchingState&, const MatchingState&) = default;
};

struct MatchingInit {
    MatchingState state;
    bool feasible = false; // meets every minimum rate at the given powers
    int attempts = 0;
};

MatchingInit init_matching(const SystemConfig& config, const Deployment& deployment, const Vector& powers,
                           std::uint64_t seed, int max_attempts = 1000);

double utility(const MatchingState& state, const Vector& powers, const Deployment& deployment,
               const SystemConfig& config);

bool meets_min_rates(const MatchingState& state, const Vector& powers, const Deployment& deployment,
                     const SystemConfig& config);

struct SwapOutcome {
    bool accepted = false;
    MatchingState state;    // updated state when accepted, the input otherwise
    double utility = 0.0;   // utility of `state`
};

SwapOutcome propose_swap(const MatchingState& state, int k, int n, int slot, const Vector& powers,
                         const Deployment& deployment, const SystemConfig& config);

struct MatchTrace {
    std::vector<double> utility; // initial utility, then one entry per accepted swap
    int swaps = 0;
    int sweeps = 0;              // full k/n/a passes, including the final quiet one
    bool stable = false;
};

struct MatchingResult {
    MatchingState state;
    MatchTrace trace;
};

MatchingResult matching_search(const MatchingState& start, const Vector& powers, const Deployment& deployment,
                               const SystemConfig& config);

bool stability_check(const MatchingState& state, const Vector& powers, const Deployment& deployment,
                     const SystemConfig& config);

struct ExhaustiveResult {
    MatchingState state;
    double utility = 0.0;
    bool feasible = false; // false when no state meets the minimum rates (best unconstrained returned)
    std::uint64_t states = 0;
};

inline constexpr double kDefaultEnumerationBudget = 1e7;

// Number of states C(A, N)^K, saturating at +inf.
double enumeration_size(const SystemConfig& config);

ExhaustiveResult exhaustive_search(const Vector& powers, const Deployment& deployment,
                                   const SystemConfig& config, double budget = kDefaultEnumerationBudget);

// Snap a continuous layout onto the slot grid. PAs are settled in order of
// increasing snap error; a PA whose nearest slot is taken moves to the nearest
// free one.
MatchingState discretize_continuous(const PinchingLayout& continuous, const SystemConfig& config);

} // namespace wdma

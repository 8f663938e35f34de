#pragma once

// Power allocation for a fixed pinching layout: successive convex
// approximation of the sum rate, each step solved by a small log-barrier
// interior-point method.

#include "wdma/scene.hpp"

#include <vector>

namespace wdma {

// Everything the power subproblem needs, with the layout already folded into
// the squared gains. gains(k', k) is the power gain from stream k' to user k.
struct PowerProblem {
    Matrix gains;
    Vector noise;    // effective noise floor per user (N sigma_k^2 for PASS)
    Vector min_rate; // per user
    double max_power = 0.0;

    int size() const { return static_cast<int>(gains.rows()); }

    static PowerProblem from_gains(const EffectiveGains& gains, const SystemConfig& config);

    double rate(int k, const Vector& p) const;
    Vector rates(const Vector& p) const;
    double sum_rate(const Vector& p) const { return rates(p).sum(); }
};

struct ScaParams {
    double tolerance = 1e-6; // stop when the sum-rate increment falls below this
    int max_iters = 200;
    double barrier_gap = 1e-8;   // interior point stops once m / t is below this
    double barrier_growth = 10.0;
    double newton_tol = 1e-12;   // half squared Newton decrement
    int max_newton_steps = 200;
    bool relax_min_rate = false; // drop min-rate constraints if they cannot be met
};

// Affine function value(p) = offset + slope . p.
struct AffineForm {
    double offset = 0.0;
    Vector slope;

    double operator()(const Vector& p) const { return offset + slope.dot(p); }
};

// First-order expansion of the interference term log2(sum_{k'!=k} p_k' g_k'k + n_k)
// around p_ref. Since the term is concave this is a global upper bound.
AffineForm taylor_upper_bound(int k, const Vector& p_ref, const PowerProblem& problem);

// log2(sum_k' p_k' g_k'k + n_k) - taylor_upper_bound(p); a concave minorant of R_k
// that touches it at p_ref.
double concave_lower_bound(int k, const Vector& p, const Vector& p_ref, const PowerProblem& problem);

// Maximises sum_k R_k^lw(p; p_ref) subject to R_k^lw >= min_rate_k, sum p <= P_max, p >= 0.
// Throws InfeasibleStart when the constraint set has no strictly feasible point
// (unless params.relax_min_rate, which drops the rate constraints instead).
Vector solve_convex_subproblem(const Vector& p_ref, const PowerProblem& problem,
                               const ScaParams& params = {});

struct ScaTrace {
    std::vector<double> objective; // true sum rate, starting at p_init
    Vector powers;
    bool converged = false;
    bool relaxed = false; // min-rate constraints were dropped
    int iterations = 0;
};

ScaTrace sca_power_allocation(const Vector& p_init, const PowerProblem& problem,
                              const ScaParams& params = {});

} // namespace wdma

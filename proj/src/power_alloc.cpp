#include "wdma/power_alloc.hpp"
#include "wdma/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace wdma {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// value(z) = [log2(w.z + b)] + l.z + e, the bracket present only when has_log.
struct Term {
    bool has_log = false;
    Vector w;
    double b = 0.0;
    Vector l;
    double e = 0.0;

    double value(const Vector& z) const {
        double v = l.dot(z) + e;
        if (has_log) {
            const double arg = w.dot(z) + b;
            if (!(arg > 0.0)) return -std::numeric_limits<double>::infinity();
            v += std::log2(arg);
        }
        return v;
    }

    void accumulate(const Vector& z, double scale, Vector& grad, Matrix& hess) const {
        grad += scale * l;
        if (!has_log) return;
        const double arg = w.dot(z) + b;
        grad += scale * w / (arg * kLn2);
        hess -= scale * (w * w.transpose()) / (arg * arg * kLn2);
    }
};

struct BarrierProblem {
    std::vector<Term> objective;   // maximised, summed
    std::vector<Term> constraints; // each must stay strictly positive
};

double barrier_value(const BarrierProblem& bp, const Vector& z, double t) {
    double f = 0.0;
    for (const auto& term : bp.objective) f += term.value(z);
    double v = t * f;
    for (const auto& c : bp.constraints) {
        const double ci = c.value(z);
        if (!(ci > 0.0) || !std::isfinite(ci)) return -std::numeric_limits<double>::infinity();
        v += std::log(ci);
    }
    return v;
}

bool strictly_feasible(const BarrierProblem& bp, const Vector& z) {
    for (const auto& c : bp.constraints) {
        const double ci = c.value(z);
        if (!(ci > 0.0) || !std::isfinite(ci)) return false;
    }
    return true;
}

// Log-barrier path following with damped Newton centering. `stop` is checked
// after every centering and may end the path early (used by phase 1).
Vector barrier_maximize(const BarrierProblem& bp, Vector z, const ScaParams& params,
                        const std::function<bool(const Vector&)>& stop = {}) {
    const auto dim = z.size();
    const double m = static_cast<double>(bp.constraints.size());
    double t = 1.0;
    for (int stage = 0; stage < 64; ++stage) {
        for (int step = 0; step < params.max_newton_steps; ++step) {
            Vector grad = Vector::Zero(dim);
            Matrix hess = Matrix::Zero(dim, dim);
            for (const auto& term : bp.objective) term.accumulate(z, t, grad, hess);
            for (const auto& c : bp.constraints) {
                const double ci = c.value(z);
                Vector gc = Vector::Zero(dim);
                Matrix hc = Matrix::Zero(dim, dim);
                c.accumulate(z, 1.0, gc, hc);
                grad += gc / ci;
                hess += hc / ci - (gc * gc.transpose()) / (ci * ci);
            }
            Matrix neg = -hess;
            Eigen::LDLT<Matrix> ldlt(neg);
            Vector dir = ldlt.solve(grad);
            if (ldlt.info() != Eigen::Success || !dir.allFinite() || grad.dot(dir) <= 0.0) {
                neg.diagonal().array() += 1e-12 * (1.0 + neg.diagonal().cwiseAbs().maxCoeff());
                dir = neg.ldlt().solve(grad);
                if (!dir.allFinite() || grad.dot(dir) <= 0.0) dir = grad;
            }
            const double decrement = grad.dot(dir);
            if (0.5 * decrement < params.newton_tol) break;

            const double base = barrier_value(bp, z, t);
            double s = 1.0;
            bool moved = false;
            for (int shrink = 0; shrink < 80; ++shrink, s *= 0.5) {
                const Vector cand = z + s * dir;
                if (!strictly_feasible(bp, cand)) continue;
                if (barrier_value(bp, cand, t) >= base + 0.25 * s * decrement) {
                    z = cand;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        if (stop && stop(z)) break;
        if (m / t < params.barrier_gap) break;
        t *= params.barrier_growth;
    }
    return z;
}

// Terms of R_k^lw in normalised powers u = p / P_max.
Term lower_bound_term(int k, const Vector& p_ref, const PowerProblem& pr) {
    const AffineForm up = taylor_upper_bound(k, p_ref, pr);
    Term t;
    t.has_log = true;
    t.w = pr.gains.col(k) * pr.max_power;
    t.b = pr.noise(k);
    t.l = -up.slope * pr.max_power;
    t.e = -up.offset;
    return t;
}

Term affine(Vector l, double e) {
    Term t;
    t.l = std::move(l);
    t.e = e;
    return t;
}

Term extend(const Term& t, double extra_slope) {
    Term out = t;
    const auto d = t.l.size();
    out.l.conservativeResize(d + 1);
    out.l(d) = extra_slope;
    if (out.has_log) {
        out.w.conservativeResize(d + 1);
        out.w(d) = 0.0;
    }
    return out;
}

double surrogate_objective(const Vector& p, const Vector& p_ref, const PowerProblem& pr) {
    double f = 0.0;
    for (int k = 0; k < pr.size(); ++k) f += concave_lower_bound(k, p, p_ref, pr);
    return f;
}

struct SubproblemResult {
    Vector powers;
    bool relaxed = false;
};

SubproblemResult solve_subproblem(const Vector& p_ref, const PowerProblem& pr, const ScaParams& params) {
    const int K = pr.size();
    if (p_ref.size() != K) throw std::invalid_argument("power vector size mismatch");
    const double P = pr.max_power;

    BarrierProblem base;
    std::vector<Term> rate_terms;
    for (int k = 0; k < K; ++k) {
        rate_terms.push_back(lower_bound_term(k, p_ref, pr));
        base.objective.push_back(rate_terms.back());
    }
    base.constraints.push_back(affine(-Vector::Ones(K), 1.0));
    for (int k = 0; k < K; ++k) base.constraints.push_back(affine(Vector::Unit(K, k), 0.0));

    // Strictly interior start for the budget and sign constraints.
    Vector u0 = 0.9 * (p_ref / P).cwiseMax(0.0);
    if (u0.sum() > 0.9) u0 *= 0.9 / u0.sum();
    u0.array() += 0.05 / K;

    BarrierProblem full = base;
    bool need_rates = false;
    // R_k >= 0 holds trivially, so zero requirements are not imposed on the surrogate.
    for (int k = 0; k < K; ++k) {
        if (pr.min_rate(k) <= 0.0) continue;
        Term c = rate_terms[static_cast<std::size_t>(k)];
        c.e -= pr.min_rate(k);
        full.constraints.push_back(c);
        need_rates = true;
    }

    SubproblemResult result;
    Vector start = u0;
    if (need_rates && !strictly_feasible(full, start)) {
        // Phase 1: maximise the common slack s of the rate constraints.
        BarrierProblem phase1;
        Term slack_obj = affine(Vector::Unit(K + 1, K), 0.0);
        phase1.objective.push_back(slack_obj);
        for (const auto& c : base.constraints) phase1.constraints.push_back(extend(c, 0.0));
        double worst = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            if (pr.min_rate(k) <= 0.0) continue;
            Term c = rate_terms[static_cast<std::size_t>(k)];
            c.e -= pr.min_rate(k);
            worst = std::min(worst, c.value(u0));
            phase1.constraints.push_back(extend(c, -1.0));
        }
        if (!std::isfinite(worst)) worst = -1e3;
        Vector z0(K + 1);
        z0.head(K) = u0;
        z0(K) = worst - 1.0;
        const Vector z = barrier_maximize(phase1, z0, params,
                                          [K](const Vector& zz) { return zz(K) > 1e-6; });
        if (z(K) > 0.0 && strictly_feasible(full, z.head(K))) {
            start = z.head(K);
        } else if (params.relax_min_rate) {
            result.relaxed = true;
        } else {
            throw InfeasibleStart("minimum-rate constraints admit no strictly feasible power allocation");
        }
    }

    const BarrierProblem& active = (need_rates && !result.relaxed) ? full : base;
    const Vector u = barrier_maximize(active, start, params);
    result.powers = (u * P).cwiseMax(0.0);

    // p_ref itself is admissible when it meets every constraint; keep it if the
    // interior point did not beat it (the barrier stops a gap short of the boundary).
    bool ref_ok = p_ref.minCoeff() >= 0.0 && p_ref.sum() <= P * (1.0 + 1e-12);
    if (ref_ok && !result.relaxed)
        for (int k = 0; k < K; ++k)
            if (concave_lower_bound(k, p_ref, p_ref, pr) < pr.min_rate(k)) ref_ok = false;
    if (ref_ok && surrogate_objective(p_ref, p_ref, pr) > surrogate_objective(result.powers, p_ref, pr))
        result.powers = p_ref;
    return result;
}

} // namespace

PowerProblem PowerProblem::from_gains(const EffectiveGains& gains, const SystemConfig& config) {
    PowerProblem pr;
    pr.gains = gains.power_gains();
    const int K = static_cast<int>(pr.gains.rows());
    pr.noise.resize(K);
    pr.min_rate.resize(K);
    for (int k = 0; k < K; ++k) {
        pr.noise(k) = config.pas_per_waveguide * config.noise(k);
        pr.min_rate(k) = config.required_rate(k);
    }
    pr.max_power = config.max_power;
    return pr;
}

double PowerProblem::rate(int k, const Vector& p) const {
    return rate_from_gains(k, gains, p, noise(k));
}

Vector PowerProblem::rates(const Vector& p) const {
    Vector r(size());
    for (int k = 0; k < size(); ++k) r(k) = rate(k, p);
    return r;
}

AffineForm taylor_upper_bound(int k, const Vector& p_ref, const PowerProblem& problem) {
    const int K = problem.size();
    double interference = problem.noise(k);
    for (int j = 0; j < K; ++j)
        if (j != k) interference += p_ref(j) * problem.gains(j, k);
    AffineForm form;
    form.slope = Vector::Zero(K);
    for (int j = 0; j < K; ++j)
        if (j != k) form.slope(j) = problem.gains(j, k) / (interference * kLn2);
    form.offset = std::log2(interference) - form.slope.dot(p_ref);
    return form;
}

double concave_lower_bound(int k, const Vector& p, const Vector& p_ref, const PowerProblem& problem) {
    const double total = problem.gains.col(k).dot(p) + problem.noise(k);
    return std::log2(total) - taylor_upper_bound(k, p_ref, problem)(p);
}

Vector solve_convex_subproblem(const Vector& p_ref, const PowerProblem& problem, const ScaParams& params) {
    return solve_subproblem(p_ref, problem, params).powers;
}

ScaTrace sca_power_allocation(const Vector& p_init, const PowerProblem& problem, const ScaParams& params) {
    if (params.tolerance <= 0.0 || params.max_iters < 1) throw std::invalid_argument("invalid SCA parameters");
    if (p_init.size() != problem.size() || p_init.minCoeff() < -1e-12 ||
        p_init.sum() > problem.max_power * (1.0 + 1e-9))
        throw std::invalid_argument("initial power allocation violates the budget");

    ScaTrace trace;
    Vector p = p_init.cwiseMax(0.0);
    double current = problem.sum_rate(p);
    trace.objective.push_back(current);
    for (int it = 0; it < params.max_iters; ++it) {
        SubproblemResult step = solve_subproblem(p, problem, params);
        trace.relaxed = trace.relaxed || step.relaxed;
        const double next = problem.sum_rate(step.powers);
        ++trace.iterations;
        if (next >= current) {
            p = step.powers;
        }
        const double gained = std::max(next, current) - current;
        current = std::max(next, current);
        trace.objective.push_back(current);
        if (gained < params.tolerance) {
            trace.converged = true;
            break;
        }
    }
    trace.powers = p;
    return trace;
}

} // namespace wdma

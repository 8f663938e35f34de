#include "wdma/baselines.hpp"
#include "wdma/errors.hpp"
#include "wdma/pinch_continuous.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wdma {

namespace {

constexpr double kRankTolerance = 1e-9;

} // namespace

ConventionalResult conventional_fixed(const Deployment& deployment, const SystemConfig& config,
                                      const ScaParams& params) {
    const int K = deployment.num_users();
    const Wavelengths w = derive_wavelengths(config);
    ConventionalResult out;
    for (int m = 0; m < K; ++m) {
        const double x = 0.5 * config.strip_length + (m - 0.5 * (K - 1)) * config.min_spacing;
        out.antennas.push_back({x, 0.0, deployment.height});
    }

    ComplexMatrix H(K, K); // row k: channel from every antenna to user k
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < K; ++m) {
            const double r = user_pa_distance(deployment.users[static_cast<std::size_t>(k)],
                                              out.antennas[static_cast<std::size_t>(m)]);
            H(k, m) = std::polar(w.eta / r, -2.0 * kPi * r / w.free_space);
        }

    Eigen::JacobiSVD<ComplexMatrix> svd(H);
    const Vector sv = svd.singularValues();
    ComplexMatrix W;
    if (sv(0) > 0.0 && sv(K - 1) / sv(0) > kRankTolerance) {
        W = H.inverse();
    } else {
        out.zf_fallback = true;
        W = H.adjoint();
    }
    for (int j = 0; j < K; ++j) {
        const double norm = W.col(j).norm();
        if (norm > 0.0) W.col(j) /= norm;
    }
    const ComplexMatrix G = H * W; // G(k, j) = h_k^T w_j
    out.gains = G.transpose().cwiseAbs2();

    PowerProblem problem;
    problem.gains = out.gains;
    problem.noise.resize(K);
    problem.min_rate.resize(K);
    for (int k = 0; k < K; ++k) {
        problem.noise(k) = config.noise(k);
        problem.min_rate(k) = config.required_rate(k);
    }
    problem.max_power = config.max_power;

    ScaTrace trace;
    try {
        trace = sca_power_allocation(equal_power_split(config), problem, params);
    } catch (const InfeasibleStart&) {
        ScaParams relaxed = params;
        relaxed.relax_min_rate = true;
        trace = sca_power_allocation(equal_power_split(config), problem, relaxed);
    }
    out.powers = trace.powers;
    out.rates = problem.rates(out.powers);
    out.sum_rate = out.rates.sum();
    out.feasible = true;
    for (int k = 0; k < K; ++k)
        if (out.rates(k) < problem.min_rate(k) - 1e-6) out.feasible = false;
    return out;
}

PinchingLayout mrt_coarse(const Deployment& deployment, const SystemConfig& config) {
    const int K = deployment.num_users();
    const int N = config.pas_per_waveguide;
    const double L = config.strip_length;
    double s = std::max(config.min_spacing, derive_wavelengths(config).guided);
    if (N > 1) s = std::min(s, L / (N - 1));
    const double width = (N - 1) * s;

    PinchingLayout layout;
    layout.positions.resize(K, N);
    for (int k = 0; k < K; ++k) {
        const double centre = deployment.users[static_cast<std::size_t>(k)].x;
        const double start = std::clamp(centre - 0.5 * width, 0.0, L - width);
        for (int n = 0; n < N; ++n) layout.positions(k, n) = std::min(start + n * s, L);
    }
    return layout;
}

namespace {

// Composite phase of a PA at x on waveguide k, seen by user k; increasing in x.
double composite_phase(double x, int k, const Deployment& deployment, const Wavelengths& w) {
    const auto ku = static_cast<std::size_t>(k);
    const double r = user_pa_distance(deployment.users[ku], {x, deployment.waveguide_y[ku], deployment.height});
    return 2.0 * kPi * (r / w.free_space + x / w.guided);
}

// Positions in [lo, hi] where the phase hits target + 2 pi m, for every admissible m.
std::vector<double> phase_roots(double lo, double hi, double target, int k, const Deployment& deployment,
                                const Wavelengths& w) {
    std::vector<double> roots;
    const double f_lo = composite_phase(lo, k, deployment, w);
    const double f_hi = composite_phase(hi, k, deployment, w);
    const auto m_lo = static_cast<long>(std::ceil((f_lo - target) / (2.0 * kPi)));
    const auto m_hi = static_cast<long>(std::floor((f_hi - target) / (2.0 * kPi)));
    for (long m = m_lo; m <= m_hi; ++m) {
        const double goal = target + 2.0 * kPi * static_cast<double>(m);
        double a = lo;
        double b = hi;
        for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
            const double mid = 0.5 * (a + b);
            if (composite_phase(mid, k, deployment, w) < goal) a = mid;
            else b = mid;
        }
        roots.push_back(0.5 * (a + b));
    }
    return roots;
}

} // namespace

PinchingLayout mrt_continuous(const Deployment& deployment, const SystemConfig& config) {
    PinchingLayout layout = mrt_coarse(deployment, config);
    const Wavelengths w = derive_wavelengths(config);
    const int K = layout.num_waveguides();
    const int N = layout.num_pas();
    const double L = config.strip_length;
    const double delta = config.min_spacing;
    const double reach = 0.5 * w.free_space;
    const int ref = (N - 1) / 2;

    for (int k = 0; k < K; ++k) {
        const Vector coarse = layout.positions.row(k).transpose();
        const double target = composite_phase(coarse(ref), k, deployment, w);

        auto settle = [&](int n, double lo_bound, double hi_bound) {
            const double x0 = coarse(n);
            const double lo = std::max({0.0, x0 - reach, lo_bound});
            const double hi = std::min({L, x0 + reach, hi_bound});
            double best = x0;
            double best_move = std::numeric_limits<double>::infinity();
            if (lo <= hi) {
                for (double r : phase_roots(lo, hi, target, k, deployment, w)) {
                    if (std::abs(r - x0) < best_move) {
                        best_move = std::abs(r - x0);
                        best = r;
                    }
                }
            }
            if (!std::isfinite(best_move)) best = std::clamp(x0, std::min(lo, hi), std::max(lo, hi));
            layout.positions(k, n) = best;
        };

        for (int n = ref + 1; n < N; ++n) settle(n, layout.positions(k, n - 1) + delta, L);
        for (int n = ref - 1; n >= 0; --n) settle(n, 0.0, layout.positions(k, n + 1) - delta);
    }
    if (!is_feasible_continuous(layout, config)) project_spacing(layout, config);
    return layout;
}

} // namespace wdma

#include "wdma/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace wdma {

namespace {

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

GradCheckReport gradient_check(int configurations, std::uint64_t seed, double h) {
    const auto t0 = std::chrono::steady_clock::now();
    const int pas_choices[] = {1, 2, 4};
    const double beta_choices[] = {0.0, 1.0, 100.0};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    GradCheckReport report;
    for (int c = 0; c < configurations; ++c) {
        SystemConfig config = SystemConfig::table_defaults(2, pas_choices[c % 3], 20);
        const double beta = beta_choices[(c / 3) % 3];
        const double rho = 0.05 + unit(rng);
        const Deployment dep = drop_users(config, rng());
        const double share = unit(rng);
        Vector p(2);
        p << share * config.max_power, (1.0 - share) * config.max_power;

        Matrix latent(2, config.pas_per_waveguide);
        for (Eigen::Index i = 0; i < latent.size(); ++i) latent(i) = 2.0 * unit(rng) - 1.0;

        const Matrix analytic = objective_gradient(latent, p, dep, config, beta, rho);
        Matrix fd(latent.rows(), latent.cols());
        for (Eigen::Index i = 0; i < latent.size(); ++i) {
            auto q = [&](double offset) {
                Matrix z = latent;
                z(i) += offset;
                return penalized_objective(z, p, dep, config, beta, rho);
            };
            fd(i) = (q(-2 * h) - 8 * q(-h) + 8 * q(h) - q(2 * h)) / (12 * h);
        }
        const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-8);
        report.max_relative_error = std::max(report.max_relative_error, (analytic - fd).cwiseAbs().maxCoeff() / scale);
        ++report.configurations;
    }
    report.seconds = elapsed_since(t0);
    return report;
}

OracleReport oracle_check(const SystemConfig& config, int drops, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    OracleReport report;
    double total = 0.0;
    const Vector p = equal_power_split(config);
    for (int d = 0; d < drops; ++d) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(d);
        const Deployment dep = drop_users(config, s);
        const ExhaustiveResult es = exhaustive_search(p, dep, config);
        const MatchingInit init = init_matching(config, dep, p, s);
        const MatchingResult mr = matching_search(init.state, p, dep, config);
        if (!mr.trace.stable) ++report.unstable;
        const double ratio = es.utility > 0.0 ? utility(mr.state, p, dep, config) / es.utility : 1.0;
        total += ratio;
        report.worst_ratio = std::min(report.worst_ratio, ratio);
        ++report.drops;
    }
    report.mean_ratio = drops > 0 ? total / drops : 0.0;
    report.seconds = elapsed_since(t0);
    return report;
}

} // namespace wdma

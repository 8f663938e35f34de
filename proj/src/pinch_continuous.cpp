#include "wdma/pinch_continuous.hpp"
#include "wdma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace wdma {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Per-PA quantities of the channel: for source waveguide i, user k and PA j,
// distance c, composite phase phi and the complex term eta e^{-j phi} / c.
struct ChannelTerms {
    int guides = 0;
    int users = 0;
    int pas = 0;
    Wavelengths w;
    std::vector<double> dist;
    std::vector<double> phase;
    std::vector<std::complex<double>> term;
    ComplexMatrix alpha; // guides x users
    Matrix upsilon;

    std::size_t at(int i, int k, int j) const {
        return (static_cast<std::size_t>(i) * users + k) * pas + j;
    }
};

ChannelTerms channel_terms(const PinchingLayout& layout, const Deployment& deployment,
                           const SystemConfig& config) {
    ChannelTerms ct;
    ct.guides = layout.num_waveguides();
    ct.users = deployment.num_users();
    ct.pas = layout.num_pas();
    ct.w = derive_wavelengths(config);
    const std::size_t total = static_cast<std::size_t>(ct.guides) * ct.users * ct.pas;
    ct.dist.resize(total);
    ct.phase.resize(total);
    ct.term.resize(total);
    ct.alpha = ComplexMatrix::Zero(ct.guides, ct.users);
    for (int i = 0; i < ct.guides; ++i) {
        const double y = deployment.waveguide_y[static_cast<std::size_t>(i)];
        for (int k = 0; k < ct.users; ++k) {
            const Point3& u = deployment.users[static_cast<std::size_t>(k)];
            for (int j = 0; j < ct.pas; ++j) {
                const double x = layout.positions(i, j);
                const double c = user_pa_distance(u, {x, y, deployment.height});
                const double phi = 2.0 * kPi * (c / ct.w.free_space + x / ct.w.guided);
                const auto idx = ct.at(i, k, j);
                ct.dist[idx] = c;
                ct.phase[idx] = phi;
                ct.term[idx] = std::polar(ct.w.eta / c, -phi);
                ct.alpha(i, k) += ct.term[idx];
            }
        }
    }
    ct.upsilon = ct.alpha.cwiseAbs2();
    return ct;
}

// d upsilon_{i,k} / d x^{i,j}, written through the residual xi = alpha - own term.
double upsilon_slope(const ChannelTerms& ct, const PinchingLayout& layout, const Deployment& deployment,
                     int i, int k, int j) {
    const auto idx = ct.at(i, k, j);
    const std::complex<double> xi = ct.alpha(i, k) - ct.term[idx];
    const double xi_abs = std::abs(xi);
    const double xi_arg = std::arg(xi);
    const double c = ct.dist[idx];
    const double dx = layout.positions(i, j) - deployment.users[static_cast<std::size_t>(k)].x;
    const double eta = ct.w.eta;
    const double a = ct.phase[idx] + xi_arg;
    const double c2 = c * c;
    return -2.0 * eta * eta * dx / (c2 * c2)
           - 2.0 * xi_abs * eta * std::cos(a) * dx / (c2 * c)
           - 4.0 * kPi * xi_abs * eta * std::sin(a) * dx / (ct.w.free_space * c2)
           - 4.0 * kPi * xi_abs * eta * std::sin(a) / (ct.w.guided * c);
}

// dR_k / dx^{i,j} given the upsilon slope of waveguide i at user k.
double rate_slope(const ChannelTerms& ct, const Vector& p, const SystemConfig& config, int k, int i,
                  double slope) {
    const double noise = config.pas_per_waveguide * config.noise(k);
    double interference = noise;
    for (int src = 0; src < ct.guides; ++src)
        if (src != k) interference += p(src) * ct.upsilon(src, k);
    const double signal = p(k) * ct.upsilon(k, k);
    if (i == k) return p(i) / (kLn2 * (interference + signal)) * slope;
    return -p(i) * signal / (kLn2 * (interference + signal) * interference) * slope;
}

double tanh_jacobian(double latent, double length) {
    const double t = std::tanh(latent);
    return 0.5 * length * (1.0 - t * t);
}

// Spacing residuals of row k, in the requested form.
double spacing_residual(const LatentLayout& latent, const Matrix& box, int k, int n, SpacingForm form,
                        const SystemConfig& config) {
    if (form == SpacingForm::latent)
        return 2.0 * config.min_spacing / config.strip_length -
               (std::tanh(latent(k, n + 1)) - std::tanh(latent(k, n)));
    return config.min_spacing - (box(k, n + 1) - box(k, n));
}

} // namespace

void GaaParams::validate() const {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (!(beta_growth > 1.0)) throw std::invalid_argument("beta_growth must exceed 1");
    if (!(rho_decay > 0.0 && rho_decay < 1.0)) throw std::invalid_argument("rho_decay must lie in (0,1)");
    if (!(step_init > 0.0)) throw std::invalid_argument("step_init must be positive");
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw std::invalid_argument("step_shrink must lie in (0,1)");
    if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("armijo must lie in (0,1)");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_inner < 1 || max_outer < 1 || max_shrinks < 1) throw std::invalid_argument("iteration caps must be >= 1");
}

PinchingLayout reparam_to_box(const LatentLayout& latent, const SystemConfig& config) {
    PinchingLayout layout;
    layout.mode = LayoutMode::continuous;
    const double half = 0.5 * config.strip_length;
    layout.positions = latent.unaryExpr([half](double v) { return half * (1.0 + std::tanh(v)); });
    return layout;
}

LatentLayout reparam_from_box(const PinchingLayout& layout, const SystemConfig& config) {
    const double L = config.strip_length;
    return layout.positions.unaryExpr([L](double x) {
        const double r = std::clamp(2.0 * x / L - 1.0, -1.0 + kLatentClamp, 1.0 - kLatentClamp);
        return std::atanh(r);
    });
}

double softplus(double zeta, double rho) {
    const double z = zeta / rho;
    if (z > 30.0) return zeta + rho * std::log1p(std::exp(-z));
    return rho * std::log1p(std::exp(z));
}

double softplus_slope(double zeta, double rho) {
    const double z = zeta / rho;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

SmoothedPenalties smoothed_penalties(const LatentLayout& latent, const Vector& powers,
                                     const Deployment& deployment, const SystemConfig& config, double rho,
                                     SpacingForm form) {
    const PinchingLayout layout = reparam_to_box(latent, config);
    const Vector rates = user_rates(layout, powers, deployment, config);
    SmoothedPenalties pen;
    pen.rate.resize(rates.size());
    for (Eigen::Index k = 0; k < rates.size(); ++k)
        pen.rate(k) = softplus(config.required_rate(static_cast<int>(k)) - rates(k), rho);
    const int K = layout.num_waveguides();
    const int N = layout.num_pas();
    pen.spacing = Matrix::Zero(K, std::max(N - 1, 0));
    for (int k = 0; k < K; ++k)
        for (int n = 0; n + 1 < N; ++n)
            pen.spacing(k, n) = softplus(spacing_residual(latent, layout.positions, k, n, form, config), rho);
    return pen;
}

double penalized_objective(const LatentLayout& latent, const Vector& powers, const Deployment& deployment,
                           const SystemConfig& config, double beta, double rho, SpacingForm form) {
    const PinchingLayout layout = reparam_to_box(latent, config);
    const Vector rates = user_rates(layout, powers, deployment, config);
    double penalty = 0.0;
    for (Eigen::Index k = 0; k < rates.size(); ++k)
        penalty += softplus(config.required_rate(static_cast<int>(k)) - rates(k), rho);
    for (int k = 0; k < layout.num_waveguides(); ++k)
        for (int n = 0; n + 1 < layout.num_pas(); ++n)
            penalty += softplus(spacing_residual(latent, layout.positions, k, n, form, config), rho);
    return rates.sum() - beta * penalty;
}

double rate_position_gradient(int k, int i, int j, const PinchingLayout& layout, const Vector& powers,
                              const Deployment& deployment, const SystemConfig& config) {
    const ChannelTerms ct = channel_terms(layout, deployment, config);
    return rate_slope(ct, powers, config, k, i, upsilon_slope(ct, layout, deployment, i, k, j));
}

std::vector<Matrix> rate_position_jacobian(const PinchingLayout& layout, const Vector& powers,
                                           const Deployment& deployment, const SystemConfig& config) {
    const ChannelTerms ct = channel_terms(layout, deployment, config);
    std::vector<Matrix> jac(static_cast<std::size_t>(ct.users), Matrix::Zero(ct.guides, ct.pas));
    for (int i = 0; i < ct.guides; ++i)
        for (int j = 0; j < ct.pas; ++j)
            for (int k = 0; k < ct.users; ++k)
                jac[static_cast<std::size_t>(k)](i, j) =
                    rate_slope(ct, powers, config, k, i, upsilon_slope(ct, layout, deployment, i, k, j));
    return jac;
}

Matrix objective_gradient(const LatentLayout& latent, const Vector& powers, const Deployment& deployment,
                          const SystemConfig& config, double beta, double rho, SpacingForm form) {
    const PinchingLayout layout = reparam_to_box(latent, config);
    const ChannelTerms ct = channel_terms(layout, deployment, config);
    const int K = ct.guides;
    const int N = ct.pas;

    // Weight of dR_k in dr/dx: 1 + beta * sigmoid(zeta_1k / rho).
    Vector weight(ct.users);
    for (int k = 0; k < ct.users; ++k) {
        const double rate =
            rate_from_gains(k, ct.upsilon, powers, config.pas_per_waveguide * config.noise(k));
        weight(k) = 1.0 + beta * softplus_slope(config.required_rate(k) - rate, rho);
    }
    // d zeta2 / d x for the upper PA of a pair is -scale, for the lower +scale.
    const double scale = form == SpacingForm::latent ? 2.0 / config.strip_length : 1.0;

    Matrix grad(K, N);
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < N; ++j) {
            double g = 0.0;
            for (int k = 0; k < ct.users; ++k)
                g += weight(k) * rate_slope(ct, powers, config, k, i, upsilon_slope(ct, layout, deployment, i, k, j));
            if (j > 0) {
                const double z = spacing_residual(latent, layout.positions, i, j - 1, form, config);
                g += beta * softplus_slope(z, rho) * scale;
            }
            if (j + 1 < N) {
                const double z = spacing_residual(latent, layout.positions, i, j, form, config);
                g -= beta * softplus_slope(z, rho) * scale;
            }
            grad(i, j) = g * tanh_jacobian(latent(i, j), config.strip_length);
        }
    }
    return grad;
}

GaaInnerResult gradient_ascent(const Matrix& start, const std::function<double(const Matrix&)>& objective,
                               const std::function<Matrix(const Matrix&)>& gradient,
                               const GaaParams& params) {
    GaaInnerResult res;
    res.latent = start;
    double q = objective(start);
    res.objective.push_back(q);
    while (res.iterations < params.max_inner) {
        const Matrix g = gradient(res.latent);
        const double g2 = g.squaredNorm();
        if (!(g2 > 0.0) || !std::isfinite(g2)) break;

        double tau = params.step_init;
        bool accepted = false;
        Matrix cand;
        double q_cand = q;
        for (int s = 0; s < params.max_shrinks; ++s, tau *= params.step_shrink) {
            cand = res.latent + tau * g;
            q_cand = objective(cand);
            if (q_cand >= q + params.armijo * tau * g2) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.stalled = true;
            break;
        }
        const double gained = q_cand - q;
        res.latent = std::move(cand);
        q = q_cand;
        res.objective.push_back(q);
        ++res.iterations;
        if (gained <= params.tolerance) break;
    }
    return res;
}

GaaInnerResult gaa_inner(const LatentLayout& start, const Vector& powers, const Deployment& deployment,
                         const SystemConfig& config, const GaaParams& params, double beta, double rho) {
    const SpacingForm form = params.spacing_form;
    return gradient_ascent(
        start,
        [&](const Matrix& z) { return penalized_objective(z, powers, deployment, config, beta, rho, form); },
        [&](const Matrix& z) { return objective_gradient(z, powers, deployment, config, beta, rho, form); },
        params);
}

PinchingLayout uniform_layout(const SystemConfig& config) {
    PinchingLayout layout;
    layout.mode = LayoutMode::continuous;
    const int N = config.pas_per_waveguide;
    layout.positions.resize(config.num_users, N);
    for (int k = 0; k < config.num_users; ++k)
        for (int n = 0; n < N; ++n) layout.positions(k, n) = (n + 0.5) * config.strip_length / N;
    return layout;
}

void project_spacing(PinchingLayout& layout, const SystemConfig& config) {
    const double L = config.strip_length;
    const double gap = config.min_spacing;
    layout.positions = layout.positions.cwiseMax(0.0).cwiseMin(L);
    layout.sort_rows();
    Matrix& x = layout.positions;
    const Eigen::Index N = x.cols();
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
        for (Eigen::Index n = 1; n < N; ++n) x(k, n) = std::max(x(k, n), x(k, n - 1) + gap);
        if (N > 0 && x(k, N - 1) > L) {
            x(k, N - 1) = L;
            for (Eigen::Index n = N - 2; n >= 0; --n) x(k, n) = std::min(x(k, n), x(k, n + 1) - gap);
        }
        for (Eigen::Index n = 0; n < N; ++n) x(k, n) = std::clamp(x(k, n), 0.0, L);
    }
}

namespace {

bool meets_constraints(const PinchingLayout& layout, const Vector& powers, const Deployment& deployment,
                       const SystemConfig& config) {
    const Matrix& x = layout.positions;
    for (Eigen::Index k = 0; k < x.rows(); ++k)
        for (Eigen::Index n = 0; n + 1 < x.cols(); ++n)
            if (x(k, n + 1) - x(k, n) - config.min_spacing < -1e-9) return false;
    const Vector rates = user_rates(layout, powers, deployment, config);
    for (Eigen::Index k = 0; k < rates.size(); ++k)
        if (rates(k) - config.required_rate(static_cast<int>(k)) < -1e-6) return false;
    return true;
}

} // namespace

ContinuousResult penalty_outer(const PinchingLayout& start, const Vector& powers, const Deployment& deployment,
                               const SystemConfig& config, const GaaParams& params) {
    params.validate();
    ContinuousResult result;
    LatentLayout latent = reparam_from_box(start, config);
    double beta = params.beta;
    double rho = params.rho;
    bool satisfied = false;
    for (int o = 0; o < params.max_outer && !satisfied; ++o) {
        // PAs on one waveguide are interchangeable; keep rows ordered so a
        // crossing made under a weak penalty is not charged as a violation.
        for (Eigen::Index k = 0; k < latent.rows(); ++k) {
            auto row = latent.row(k);
            std::sort(row.begin(), row.end());
        }
        result.stages.push_back(gaa_inner(latent, powers, deployment, config, params, beta, rho));
        latent = result.stages.back().latent;
        ++result.outer_iterations;
        satisfied = meets_constraints(reparam_to_box(latent, config), powers, deployment, config);
        beta *= params.beta_growth;
        rho *= params.rho_decay;
    }
    result.layout = reparam_to_box(latent, config);
    project_spacing(result.layout, config);
    result.feasible = is_feasible_continuous(result.layout, config) &&
                      meets_constraints(result.layout, powers, deployment, config);
    return result;
}

} // namespace wdma

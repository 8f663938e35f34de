#pragma once

// Continuous PA placement for fixed powers.
//
// The box constraint 0 <= x <= L is removed by the substitution
// x = (L/2)(1 + tanh(x_latent)); the minimum-rate and spacing constraints
// become softplus penalties rho*ln(1 + e^{zeta/rho}) weighted by beta. The
// penalised objective is climbed by gradient ascent with Armijo backtracking,
// and beta / rho are tightened stage by stage until the decoded layout meets
// the constraints.

#include "wdma/scene.hpp"

#include <functional>
#include <vector>

namespace wdma {

// Which spacing residual the penalty uses:
//   latent: zeta2 = 2 Delta / L - (tanh(x~_{n+1}) - tanh(x~_n))
//   box:    zeta2 = Delta - (x_{n+1} - x_n)
// The two differ by the factor 2/L; each is differentiated consistently.
enum class SpacingForm { latent, box };

struct GaaParams {
    double beta = 1e-4;        // initial penalty weight
    double rho = 1.0;          // initial smoothing
    double beta_growth = 10.0; // omega_beta > 1
    double rho_decay = 0.1;    // omega_rho in (0, 1)
    double step_init = 10.0;   // tau bar
    double step_shrink = 0.5;  // omega_tau
    double armijo = 1e-4;      // delta
    double tolerance = 1e-6;   // inner stop on objective increment
    int max_inner = 500;
    int max_outer = 8;
    int max_shrinks = 60;
    SpacingForm spacing_form = SpacingForm::latent;

    void validate() const;
};

using LatentLayout = Matrix;

PinchingLayout reparam_to_box(const LatentLayout& latent, const SystemConfig& config);

inline constexpr double kLatentClamp = 1e-6;
LatentLayout reparam_from_box(const PinchingLayout& layout, const SystemConfig& config);

// Overflow-safe rho * ln(1 + exp(zeta / rho)) and its derivative in zeta.
double softplus(double zeta, double rho);
double softplus_slope(double zeta, double rho);

struct SmoothedPenalties {
    Vector rate;    // one per user, residual min_rate_k - R_k
    Matrix spacing; // K x (N-1)
};

SmoothedPenalties smoothed_penalties(const LatentLayout& latent, const Vector& powers,
                                     const Deployment& deployment, const SystemConfig& config,
                                     double rho, SpacingForm form = SpacingForm::latent);

double penalized_objective(const LatentLayout& latent, const Vector& powers,
                           const Deployment& deployment, const SystemConfig& config, double beta,
                           double rho, SpacingForm form = SpacingForm::latent);

// dR_k / dx^{i,j} for the layout in box coordinates.
double rate_position_gradient(int k, int i, int j, const PinchingLayout& layout, const Vector& powers,
                              const Deployment& deployment, const SystemConfig& config);

// Full K x N matrix of dR_k / dx^{i,j} for every user k (one matrix per user).
std::vector<Matrix> rate_position_jacobian(const PinchingLayout& layout, const Vector& powers,
                                           const Deployment& deployment, const SystemConfig& config);

// Gradient of penalized_objective with respect to the latent layout.
Matrix objective_gradient(const LatentLayout& latent, const Vector& powers,
                          const Deployment& deployment, const SystemConfig& config, double beta,
                          double rho, SpacingForm form = SpacingForm::latent);

struct GaaInnerResult {
    LatentLayout latent;
    std::vector<double> objective; // q after every accepted step, starting at the input
    int iterations = 0;
    bool stalled = false; // line search exhausted its shrink budget
};

// Generic ascent loop, exposed so it can be exercised on test objectives.
GaaInnerResult gradient_ascent(const Matrix& start, const std::function<double(const Matrix&)>& objective,
                               const std::function<Matrix(const Matrix&)>& gradient,
                               const GaaParams& params);

GaaInnerResult gaa_inner(const LatentLayout& start, const Vector& powers, const Deployment& deployment,
                         const SystemConfig& config, const GaaParams& params, double beta, double rho);

struct ContinuousResult {
    PinchingLayout layout;
    std::vector<GaaInnerResult> stages;
    bool feasible = false;
    int outer_iterations = 0;
};

// Uniform spread x = (n + 1/2) L / N on every waveguide.
PinchingLayout uniform_layout(const SystemConfig& config);

// Sort each row, then sweep left-to-right (and back from L) so gaps are >= Delta.
void project_spacing(PinchingLayout& layout, const SystemConfig& config);

ContinuousResult penalty_outer(const PinchingLayout& start, const Vector& powers,
                               const Deployment& deployment, const SystemConfig& config,
                               const GaaParams& params = {});

} // namespace wdma

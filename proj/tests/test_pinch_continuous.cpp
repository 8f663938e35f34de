#include "support.hpp"
#include "wdma/errors.hpp"
#include "wdma/pinch_continuous.hpp"

#include <doctest.h>

#include <cmath>

using namespace wdma;
using doctest::Approx;

namespace {

// Fourth-order central difference of f along entry i of x.
template <typename F>
double central_difference(const F& f, Matrix x, Eigen::Index i, double h) {
    const double x0 = x(i);
    auto at = [&](double dx) {
        x(i) = x0 + dx;
        return f(x);
    };
    return (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
    return (analytic - numeric).cwiseAbs().maxCoeff() / std::max(numeric.cwiseAbs().maxCoeff(), 1e-8);
}

Matrix random_latent(const SystemConfig& c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Matrix z(c.num_users, c.pas_per_waveguide);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = u(rng);
    return z;
}

} // namespace

TEST_CASE("tanh reparameterisation") {
    const SystemConfig c = SystemConfig::table_defaults(1, 3);
    Matrix z(1, 3);
    z << 0.0, 20.0, -20.0;
    const PinchingLayout x = reparam_to_box(z, c);
    CHECK(x.positions(0, 0) == Approx(5.0));
    CHECK(std::abs(x.positions(0, 1) - 10.0) <= 1e-9 * 10.0);
    CHECK(std::abs(x.positions(0, 2)) <= 1e-9 * 10.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 200; ++t) {
        Matrix w(1, 3);
        w << u(rng), u(rng), u(rng);
        const Matrix back = reparam_from_box(reparam_to_box(w, c), c);
        CHECK((back - w).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("inverse reparameterisation") {
    const SystemConfig c = SystemConfig::table_defaults(1, 3);
    PinchingLayout x;
    x.positions.resize(1, 3);
    x.positions << 5.0, 0.0, 10.0;
    const Matrix z = reparam_from_box(x, c);
    CHECK(z(0, 0) == Approx(0.0));
    CHECK(z(0, 1) == Approx(std::atanh(-1.0 + kLatentClamp)));
    CHECK(z(0, 1) == Approx(-7.25).epsilon(2e-3));
    CHECK(std::isfinite(z(0, 2)));
    x.positions << 1.0, 1.0 + 1e-6, 9.0;
    const Matrix m = reparam_from_box(x, c);
    CHECK(m(0, 0) < m(0, 1));
    CHECK(m(0, 1) < m(0, 2));
}

TEST_CASE("smoothed hinge") {
    CHECK(softplus(0.0, 1.0) == Approx(std::log(2.0)));
    CHECK(softplus(-10.0, 0.1) < 1e-40);
    CHECK(softplus(1e5, 1e-3) == Approx(1e5));
    CHECK(std::isfinite(softplus(1e300, 1e-300)));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> z(-20.0, 20.0);
    std::uniform_real_distribution<double> r(1e-4, 5.0);
    for (int t = 0; t < 1000; ++t) {
        const double zeta = z(rng);
        const double rho = r(rng);
        const double v = softplus(zeta, rho);
        CHECK(v >= std::max(0.0, zeta) - 1e-12);
        CHECK(v <= std::max(0.0, zeta) + rho * std::log(2.0) + 1e-12);
        const double h = 1e-6 * rho;
        CHECK(softplus_slope(zeta, rho) == Approx((softplus(zeta + h, rho) - softplus(zeta - h, rho)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("penalised objective") {
    std::mt19937_64 rng(3);
    SystemConfig c = SystemConfig::table_defaults(2, 4);
    const Deployment dep = testing::random_users(c, rng);
    const Vector p = equal_power_split(c);
    const Matrix z = reparam_from_box(uniform_layout(c), c);
    const double sr = sum_rate(reparam_to_box(z, c), p, dep, c);
    CHECK(penalized_objective(z, p, dep, c, 0.0, 1.0) == Approx(sr));

    // Uniform spread is deeply feasible once the rate floor is removed.
    c.min_rate = {0.0, 0.0};
    const double rho = 1e-3;
    const double beta = 10.0;
    const double slack = beta * (2 + 2 * 3) * rho * std::log(2.0);
    const double q = penalized_objective(z, p, dep, c, beta, rho);
    CHECK(q <= sr);
    CHECK(q >= sr - slack);

    // PAs piled onto one point violate the spacing by Delta per pair.
    Matrix piled = Matrix::Zero(2, 4);
    CHECK(penalized_objective(piled, p, dep, c, 1e6, 1e-3) < -1e2);

    const SmoothedPenalties pen = smoothed_penalties(z, p, dep, c, rho);
    CHECK(pen.rate.size() == 2);
    CHECK(pen.spacing.rows() == 2);
    CHECK(pen.spacing.cols() == 3);
}

TEST_CASE("rate gradient matches finite differences in metres") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 60; ++t) {
        const SystemConfig c = SystemConfig::table_defaults(2, 1 + t % 4);
        const Deployment dep = testing::random_users(c, rng);
        const PinchingLayout layout = testing::random_layout(c, rng);
        const Vector p = testing::random_powers(c, rng);
        const auto jac = rate_position_jacobian(layout, p, dep, c);
        for (int k = 0; k < 2; ++k) {
            auto rate = [&](const Matrix& x) {
                PinchingLayout l;
                l.positions = x;
                return user_rate(k, l, p, dep, c);
            };
            Matrix fd(layout.positions.rows(), layout.positions.cols());
            for (Eigen::Index i = 0; i < fd.size(); ++i) fd(i) = central_difference(rate, layout.positions, i, 1e-6);
            CHECK(relative_error(jac[static_cast<std::size_t>(k)], fd) <= 1e-5);
            CHECK(rate_position_gradient(k, 1, 0, layout, p, dep, c) == jac[static_cast<std::size_t>(k)](1, 0));
        }
    }
}

TEST_CASE("zero power on a waveguide removes its gradient") {
    std::mt19937_64 rng(5);
    const SystemConfig c = SystemConfig::table_defaults(2, 3);
    const Deployment dep = testing::random_users(c, rng);
    const PinchingLayout layout = testing::random_layout(c, rng);
    Vector p(2);
    p << 0.06, 0.0;
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 3; ++j) CHECK(rate_position_gradient(k, 1, j, layout, p, dep, c) == 0.0);
}

TEST_CASE("single PA gradient in closed form") {
    SystemConfig c = SystemConfig::table_defaults(1, 1, 2);
    const Deployment dep = make_deployment(c, {{4.0, 1.2, 0.0}});
    PinchingLayout layout;
    layout.positions = Matrix::Constant(1, 1, 6.3);
    const double p = 0.07;
    const double eta = derive_wavelengths(c).eta;
    const double dx = 6.3 - 4.0;
    const double r2 = dx * dx + 1.2 * 1.2 + 9.0;
    const double ups = eta * eta / r2;
    const double d_ups = -2.0 * eta * eta * dx / (r2 * r2);
    const double noise = c.noise(0);
    const double expected = p / (std::log(2.0) * (noise + p * ups)) * d_ups;
    CHECK(rate_position_gradient(0, 0, 0, layout, Vector::Constant(1, p), dep, c) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("latent gradient matches finite differences") {
    std::mt19937_64 rng(6);
    const int pas[] = {1, 2, 4};
    const double betas[] = {0.0, 1.0, 100.0};
    const double rhos[] = {1.0, 0.1};
    int configs = 0;
    for (SpacingForm form : {SpacingForm::latent, SpacingForm::box}) {
        for (int t = 0; t < 108; ++t) {
            const SystemConfig c = SystemConfig::table_defaults(2, pas[t % 3]);
            const double beta = betas[(t / 3) % 3];
            const double rho = rhos[(t / 9) % 2];
            const Deployment dep = testing::random_users(c, rng);
            const Vector p = testing::random_powers(c, rng);
            const Matrix z = random_latent(c, rng);
            const Matrix g = objective_gradient(z, p, dep, c, beta, rho, form);
            auto q = [&](const Matrix& x) { return penalized_objective(x, p, dep, c, beta, rho, form); };
            Matrix fd(z.rows(), z.cols());
            for (Eigen::Index i = 0; i < fd.size(); ++i) fd(i) = central_difference(q, z, i, 1e-6);
            CHECK(relative_error(g, fd) <= 1e-5);
            ++configs;
        }
    }
    CHECK(configs >= 200);
}

TEST_CASE("penalty-free gradient is the chain rule of the rate gradient") {
    std::mt19937_64 rng(7);
    const SystemConfig c = SystemConfig::table_defaults(2, 3);
    const Deployment dep = testing::random_users(c, rng);
    const Vector p = testing::random_powers(c, rng);
    const Matrix z = random_latent(c, rng);
    const PinchingLayout x = reparam_to_box(z, c);
    const auto jac = rate_position_jacobian(x, p, dep, c);
    const Matrix sech2 = z.unaryExpr([](double v) { return 1.0 - std::tanh(v) * std::tanh(v); });
    const Matrix expected = (jac[0] + jac[1]).cwiseProduct(sech2) * (c.strip_length / 2.0);
    CHECK((objective_gradient(z, p, dep, c, 0.0, 1.0) - expected).cwiseAbs().maxCoeff() <=
          1e-12 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("saturated latent entries have vanishing gradient") {
    std::mt19937_64 rng(8);
    const SystemConfig c = SystemConfig::table_defaults(2, 2);
    const Deployment dep = testing::random_users(c, rng);
    Matrix z(2, 2);
    z << -0.3, 20.0, -20.0, 0.4;
    const Matrix g = objective_gradient(z, equal_power_split(c), dep, c, 1.0, 1.0);
    CHECK(std::abs(g(0, 1)) < 1e-10);
    CHECK(std::abs(g(1, 0)) < 1e-10);
}

TEST_CASE("generic ascent on test objectives") {
    GaaParams params;
    params.tolerance = 1e-14; // stop on objective increments well below (1e-6)^2
    auto quad = [](const Matrix& x) { return -(x(0) - 3.0) * (x(0) - 3.0); };
    auto quad_grad = [](const Matrix& x) { return Matrix::Constant(1, 1, -2.0 * (x(0) - 3.0)); };
    const GaaInnerResult r = gradient_ascent(Matrix::Constant(1, 1, -4.0), quad, quad_grad, params);
    CHECK(std::abs(r.latent(0) - 3.0) <= 1e-6);
    for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] >= r.objective[i - 1]);

    const GaaInnerResult still = gradient_ascent(Matrix::Constant(1, 1, 3.0), quad, quad_grad, params);
    CHECK(still.latent(0) == 3.0);
    CHECK(still.iterations == 0);
}

TEST_CASE("inner ascent is monotone on PASS drops") {
    std::mt19937_64 rng(9);
    const SystemConfig c = SystemConfig::table_defaults(2, 2);
    GaaParams params;
    for (int t = 0; t < 10; ++t) {
        const Deployment dep = testing::random_users(c, rng);
        const Vector p = equal_power_split(c);
        const GaaInnerResult r = gaa_inner(reparam_from_box(uniform_layout(c), c), p, dep, c, params, 1e-4, 1.0);
        CHECK(r.objective.front() <= r.objective.back());
        for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] >= r.objective[i - 1]);
        CHECK(r.iterations <= params.max_inner);
    }
}

TEST_CASE("outer loop output is feasible and inside the box") {
    std::mt19937_64 rng(10);
    const SystemConfig c = SystemConfig::table_defaults(2, 4);
    for (int t = 0; t < 10; ++t) {
        const Deployment dep = testing::random_users(c, rng);
        const Vector p = equal_power_split(c);
        const ContinuousResult r = penalty_outer(uniform_layout(c), p, dep, c);
        CHECK(is_feasible_continuous(r.layout, c));
        CHECK(r.layout.positions.minCoeff() >= 0.0);
        CHECK(r.layout.positions.maxCoeff() <= c.strip_length);
        CHECK(r.outer_iterations >= 1);
        CHECK(r.outer_iterations <= GaaParams{}.max_outer);
        if (r.feasible)
            CHECK(user_rates(r.layout, p, dep, c).minCoeff() >= c.min_rate[0] - 1e-6);
        CHECK(sum_rate(r.layout, p, dep, c) > sum_rate(uniform_layout(c), p, dep, c));
    }
}

TEST_CASE("feasible start with a heavy penalty stops after one stage") {
    std::mt19937_64 rng(11);
    const SystemConfig c = SystemConfig::table_defaults(2, 4);
    const Deployment dep = testing::random_users(c, rng);
    const Vector p = equal_power_split(c);
    const ContinuousResult first = penalty_outer(uniform_layout(c), p, dep, c);
    REQUIRE(first.feasible);
    GaaParams heavy;
    heavy.beta = 1e3;
    heavy.rho = 1e-6;
    const ContinuousResult again = penalty_outer(first.layout, p, dep, c, heavy);
    CHECK(again.outer_iterations == 1);
    CHECK(again.feasible);
}

TEST_CASE("spacing projection") {
    SystemConfig c = SystemConfig::table_defaults(1, 4);
    c.min_spacing = 0.5;
    PinchingLayout x;
    x.positions.resize(1, 4);
    x.positions << 9.9, 3.0, 3.1, 12.0;
    project_spacing(x, c);
    CHECK(is_feasible_continuous(x, c));
    CHECK(x.positions(0, 0) == Approx(3.0));
    CHECK(x.positions(0, 3) == Approx(10.0));

    const PinchingLayout u = uniform_layout(c);
    CHECK(u.positions(0, 0) == Approx(1.25));
    CHECK(u.positions(0, 3) == Approx(8.75));
}

TEST_CASE("ascent parameters are validated") {
    GaaParams p;
    p.step_shrink = 1.0;
    CHECK_THROWS(p.validate());
    p = {};
    p.beta_growth = 0.5;
    CHECK_THROWS(p.validate());
    p = {};
    p.armijo = 0.0;
    CHECK_THROWS(p.validate());
    CHECK_NOTHROW(GaaParams{}.validate());
}

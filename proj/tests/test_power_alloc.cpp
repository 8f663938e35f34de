#include "support.hpp"
#include "wdma/errors.hpp"
#include "wdma/pinch_continuous.hpp"
#include "wdma/power_alloc.hpp"

#include <doctest.h>

#include <cmath>

using namespace wdma;
using doctest::Approx;

namespace {

PowerProblem synthetic(const Matrix& gains, double noise, double pmax, double min_rate = 0.0) {
    PowerProblem pr;
    pr.gains = gains;
    pr.noise = Vector::Constant(gains.rows(), noise);
    pr.min_rate = Vector::Constant(gains.rows(), min_rate);
    pr.max_power = pmax;
    return pr;
}

PowerProblem random_problem(std::mt19937_64& rng, int K) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix g(K, K);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = 0.05 + unit(rng);
    for (int k = 0; k < K; ++k) g(k, k) += 1.0;
    return synthetic(g, 0.01 + 0.1 * unit(rng), 1.0);
}

// Interference term of user k, computed directly.
double interference_log(int k, const Vector& p, const PowerProblem& pr) {
    double s = pr.noise(k);
    for (int j = 0; j < pr.size(); ++j)
        if (j != k) s += p(j) * pr.gains(j, k);
    return std::log2(s);
}

Vector random_budget_point(std::mt19937_64& rng, int K, double pmax) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector p(K);
    for (int k = 0; k < K; ++k) p(k) = unit(rng);
    return p * (pmax * unit(rng) / p.sum());
}

// Best true sum rate on a simplex grid with step pmax / steps (K = 2).
double grid_best(const PowerProblem& pr, int steps, Vector* arg = nullptr) {
    double best = -1.0;
    for (int a = 0; a <= steps; ++a)
        for (int b = 0; a + b <= steps; ++b) {
            Vector p(2);
            p << pr.max_power * a / steps, pr.max_power * b / steps;
            bool ok = true;
            for (int k = 0; k < 2; ++k) ok = ok && pr.rate(k, p) >= pr.min_rate(k);
            const double v = pr.sum_rate(p);
            if (ok && v > best) {
                best = v;
                if (arg) *arg = p;
            }
        }
    return best;
}

} // namespace

TEST_CASE("affine upper bound is tangent and majorizes") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        const PowerProblem pr = random_problem(rng, 3);
        const Vector p_ref = random_budget_point(rng, 3, pr.max_power);
        for (int k = 0; k < 3; ++k) {
            const AffineForm up = taylor_upper_bound(k, p_ref, pr);
            CHECK(up(p_ref) == Approx(interference_log(k, p_ref, pr)).epsilon(1e-12));
            for (int s = 0; s < 50; ++s) {
                const Vector p = random_budget_point(rng, 3, pr.max_power);
                CHECK(up(p) >= interference_log(k, p, pr) - 1e-12);
            }
        }
    }
}

TEST_CASE("single user: no interference terms") {
    const PowerProblem pr = synthetic(Matrix::Constant(1, 1, 2.0), 0.03, 1.0);
    const AffineForm up = taylor_upper_bound(0, Vector::Constant(1, 0.4), pr);
    CHECK(up.slope(0) == 0.0);
    CHECK(up.offset == Approx(std::log2(0.03)));
    for (double p : {0.0, 0.2, 0.9})
        CHECK(concave_lower_bound(0, Vector::Constant(1, p), Vector::Constant(1, 0.4), pr) ==
              Approx(pr.rate(0, Vector::Constant(1, p))));
}

TEST_CASE("concave lower bound minorizes the rate") {
    std::mt19937_64 rng(2);
    int checked = 0;
    for (int t = 0; t < 20; ++t) {
        const PowerProblem pr = random_problem(rng, 2);
        const Vector p_ref = random_budget_point(rng, 2, pr.max_power);
        for (int k = 0; k < 2; ++k) {
            CHECK(concave_lower_bound(k, p_ref, p_ref, pr) == Approx(pr.rate(k, p_ref)).epsilon(1e-12));
            for (int s = 0; s < 50; ++s, ++checked) {
                const Vector p = random_budget_point(rng, 2, pr.max_power);
                CHECK(concave_lower_bound(k, p, p_ref, pr) <= pr.rate(k, p) + 1e-12);
            }
        }
    }
    CHECK(checked == 2000);
}

TEST_CASE("single user spends the whole budget") {
    const PowerProblem pr = synthetic(Matrix::Constant(1, 1, 1.0), 0.1, 2.0);
    const Vector p = solve_convex_subproblem(Vector::Constant(1, 0.3), pr, {});
    CHECK(p(0) == Approx(2.0).epsilon(1e-6));
    CHECK(p.sum() <= 2.0 + 1e-9);

    const ScaTrace trace = sca_power_allocation(Vector::Constant(1, 1.0), pr, {});
    CHECK(trace.converged);
    CHECK(trace.powers(0) == Approx(2.0).epsilon(1e-6));
    CHECK(trace.objective[1] == Approx(trace.objective.back()).epsilon(1e-9));
}

TEST_CASE("interference-free pair uses the full budget") {
    Matrix g(2, 2);
    g << 1.0, 0.0, 0.0, 0.3;
    const PowerProblem pr = synthetic(g, 0.05, 1.0);
    const Vector p = solve_convex_subproblem(Vector::Constant(2, 0.25), pr, {});
    CHECK(p.sum() == Approx(1.0).epsilon(1e-6));
    CHECK(p.minCoeff() >= -1e-12);
    // Without interference the surrogate is the true sum rate.
    CHECK(pr.sum_rate(p) >= grid_best(pr, 1000) - 1e-6);
}

TEST_CASE("symmetric pair gets equal powers") {
    Matrix g(2, 2);
    g << 1.0, 0.02, 0.02, 1.0;
    const PowerProblem pr = synthetic(g, 0.05, 1.0);
    const ScaTrace trace = sca_power_allocation(Vector::Constant(2, 0.5), pr, {});
    Vector best;
    const double grid = grid_best(pr, 1000, &best);
    CHECK(best(0) == Approx(best(1)).epsilon(1e-3));
    CHECK(trace.powers(0) == Approx(trace.powers(1)).epsilon(1e-3));
    CHECK(pr.sum_rate(trace.powers) >= grid - 1e-6);
}

TEST_CASE("subproblem output respects the budget") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const PowerProblem pr = random_problem(rng, 2 + t % 3);
        const Vector p = solve_convex_subproblem(random_budget_point(rng, pr.size(), pr.max_power), pr, {});
        CHECK(p.sum() <= pr.max_power + 1e-9);
        CHECK(p.minCoeff() >= -1e-12);
    }
}

TEST_CASE("SCA is monotone and converges on PASS drops") {
    std::mt19937_64 rng(5);
    const SystemConfig c = SystemConfig::table_defaults(2, 4);
    for (int t = 0; t < 30; ++t) {
        const Deployment dep = testing::random_users(c, rng);
        const PinchingLayout layout = testing::random_layout(c, rng);
        const PowerProblem pr = PowerProblem::from_gains(effective_gains(layout, dep, c), c);
        ScaParams params;
        params.relax_min_rate = true;
        const ScaTrace trace = sca_power_allocation(equal_power_split(c), pr, params);
        CHECK(trace.converged);
        CHECK(trace.iterations < params.max_iters);
        for (std::size_t i = 1; i < trace.objective.size(); ++i)
            CHECK(trace.objective[i] >= trace.objective[i - 1] - 1e-9);
        CHECK(trace.powers.sum() <= c.max_power + 1e-9);
        CHECK(pr.sum_rate(trace.powers) == Approx(trace.objective.back()));
    }
}

TEST_CASE("SCA reaches the grid optimum from its neighbourhood") {
    std::mt19937_64 rng(6);
    int checked = 0;
    for (int t = 0; t < 40; ++t) {
        PowerProblem pr = random_problem(rng, 2);
        if (t % 2 == 1) pr.min_rate = Vector::Constant(2, 0.5);
        Vector start;
        const double best = grid_best(pr, 20, &start);
        if (best < 0.0) continue;
        if (start.sum() >= pr.max_power) start *= 0.999;
        const ScaTrace trace = sca_power_allocation(start, pr, {});
        CHECK(pr.sum_rate(trace.powers) >= best - 0.05);
        ++checked;
    }
    CHECK(checked >= 30);
}

TEST_CASE("unattainable minimum rates") {
    Matrix g(2, 2);
    g << 1.0, 0.9, 0.9, 1.0;
    const PowerProblem pr = synthetic(g, 0.05, 1.0, 5.0);
    CHECK_THROWS_AS(sca_power_allocation(Vector::Constant(2, 0.5), pr, {}), InfeasibleStart);
    ScaParams relaxed;
    relaxed.relax_min_rate = true;
    const ScaTrace trace = sca_power_allocation(Vector::Constant(2, 0.5), pr, relaxed);
    CHECK(trace.relaxed);
    CHECK(trace.powers.sum() <= 1.0 + 1e-9);
}

TEST_CASE("minimum rates are honoured when attainable") {
    Matrix g(2, 2);
    g << 1.0, 0.1, 0.1, 0.5;
    const PowerProblem pr = synthetic(g, 0.01, 1.0, 1.0);
    const ScaTrace trace = sca_power_allocation(Vector::Constant(2, 0.5), pr, {});
    const Vector r = pr.rates(trace.powers);
    CHECK(r.minCoeff() >= 1.0 - 1e-6);
    CHECK(pr.sum_rate(trace.powers) >= grid_best(pr, 400) - 1e-3);
}

TEST_CASE("bad SCA inputs") {
    const PowerProblem pr = synthetic(Matrix::Identity(2, 2), 0.1, 1.0);
    CHECK_THROWS_AS(sca_power_allocation(Vector::Constant(2, 0.6), pr, {}), std::invalid_argument);
    CHECK_THROWS_AS(sca_power_allocation(Vector::Constant(3, 0.1), pr, {}), std::invalid_argument);
    ScaParams bad;
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(sca_power_allocation(Vector::Constant(2, 0.1), pr, bad), std::invalid_argument);
}

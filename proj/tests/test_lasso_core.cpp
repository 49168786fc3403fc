#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tvlasso/lasso_core.hpp"

using namespace tvlasso;

namespace {

ObservationWindow univariate() {
    Matrix x(2, 1);
    x << 1, 1;
    Vector y(2);
    y << 1, 3;
    return ObservationWindow::unit(x, y);
}

ObservationWindow window_of(const oracle::Instance& in) { return ObservationWindow(in.x, in.y, in.w); }

}  // namespace

TEST_CASE("univariate closed form") {
    const auto w = univariate();
    // soft_threshold(sum xy, lambda/2) / sum x^2 = (4 - 1) / 2
    const LassoFit fit = solve_weighted_lasso(w, 2.0);
    CHECK(fit.converged);
    CHECK(fit.coefficients(0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(kkt_residual(fit, w) <= 1e-12);
    CHECK(std::abs(implied_lambda(fit, w) - 2.0) <= 1e-8);
    CHECK(degrees_of_freedom(fit) == 1);
    CHECK(lambda_max(w) == doctest::Approx(8.0));
}

TEST_CASE("lambda_max degenerate data") {
    Matrix x(3, 2);
    x << 1, 1, 2, -1, 3, 0;
    CHECK(lambda_max(ObservationWindow::unit(x, Vector::Zero(3))) == 0.0);
    // y orthogonal to both columns
    Vector y(3);
    y << 1, 1, -1;
    CHECK(lambda_max(ObservationWindow::unit(x, y)) == 0.0);
}

TEST_CASE("zero solution at and above lambda_max") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        const auto in = oracle::random_instance(rng, 30, 6, rep % 2 == 1);
        const auto w = window_of(in);
        const double lmax = lambda_max(w);
        for (double f : {1.0, 1.5, 10.0}) {
            const LassoFit fit = solve_weighted_lasso(w, f * lmax);
            CHECK(fit.coefficients.isZero(0.0));
        }
        const LassoFit zero_at_max = make_fit(w, Vector::Zero(6), lmax);
        CHECK(kkt_residual(zero_at_max, w) <= 1e-12 * std::max(1.0, lmax));
        const LassoFit zero_below = make_fit(w, Vector::Zero(6), 0.5 * lmax);
        CHECK(kkt_residual(zero_below, w) > 0.0);
        // just below the threshold the fit is nonzero
        CHECK_FALSE(solve_weighted_lasso(w, lmax * (1 - 1e-6)).coefficients.isZero(0.0));
    }
}

TEST_CASE("lambda zero gives weighted least squares") {
    std::mt19937_64 rng(11);
    const auto in = oracle::random_instance(rng, 40, 5, true);
    const auto w = window_of(in);
    std::vector<std::vector<double>> a(5, std::vector<double>(5, 0.0));
    std::vector<double> rhs(5, 0.0), sol;
    for (Index i = 0; i < 40; ++i)
        for (int r = 0; r < 5; ++r) {
            rhs[r] += in.w(i) * in.x(i, r) * in.y(i);
            for (int c = 0; c < 5; ++c) a[r][c] += in.w(i) * in.x(i, r) * in.x(i, c);
        }
    REQUIRE(oracle::gauss_solve(a, rhs, sol));
    const LassoFit fit = solve_weighted_lasso(w, 0.0);
    REQUIRE(fit.converged);
    for (int j = 0; j < 5; ++j) CHECK(std::abs(fit.coefficients(j) - sol[j]) <= 1e-8);
}

TEST_CASE("implied lambda errors and examples") {
    const auto w = univariate();
    const LassoFit zero = make_fit(w, Vector::Zero(1), 8.0);
    CHECK(degrees_of_freedom(zero) == 0);
    try {
        implied_lambda(zero, w);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::undefined_ratio);
    }

    std::mt19937_64 rng(3);
    const auto in = oracle::random_instance(rng, 50, 5, false);
    const auto win = window_of(in);
    const double lam = 0.3 * lambda_max(win);
    const LassoFit fit = solve_weighted_lasso(win, lam);
    REQUIRE(fit.converged);
    CHECK(std::abs(implied_lambda(fit, win) - lam) <= 1e-6 * lam);
    // no feasible nudge of the solution lowers the objective
    const double base = oracle::objective(in.x, in.y, in.w, fit.coefficients, lam);
    for (int j = 0; j < 5; ++j)
        for (double h : {-1e-4, 1e-4}) {
            Vector b = fit.coefficients;
            b(j) += h;
            CHECK(oracle::objective(in.x, in.y, in.w, b, lam) >= base - 1e-9);
        }
}

TEST_CASE("degrees of freedom counts nonzeros") {
    Matrix x = Matrix::Identity(5, 5);
    Vector y = Vector::Ones(5);
    Vector b(5);
    b << 1, 0, -0.2, 0, 0.7;
    CHECK(degrees_of_freedom(make_fit(ObservationWindow::unit(x, y), b, 0.1)) == 3);
}

TEST_CASE("input validation") {
    Matrix x(2, 1);
    x << 1, std::nan("");
    CHECK_THROWS_AS(ObservationWindow::unit(x, Vector::Ones(2)), Error);
    Matrix ok(2, 1);
    ok << 1, 2;
    CHECK_THROWS_AS(ObservationWindow(ok, Vector::Ones(2), Vector::Zero(2)), Error);
    CHECK_THROWS_AS(ObservationWindow::unit(ok, Vector::Ones(3)), Error);
    CHECK_THROWS_AS(solve_weighted_lasso(univariate(), -1.0), Error);
    SolverOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(solve_weighted_lasso(univariate(), 1.0, nullptr, bad), Error);
}

TEST_CASE("non-convergence is reported with the last iterate") {
    std::mt19937_64 rng(5);
    auto in = oracle::random_instance(rng, 20, 10, false);
    // strongly correlated columns slow coordinate descent down
    for (Index j = 1; j < 10; ++j) in.x.col(j) = in.x.col(0) + 1e-3 * in.x.col(j);
    SolverOptions opts;
    opts.max_iter = 1;
    opts.tol = 1e-14;
    const LassoFit fit = solve_weighted_lasso(window_of(in), 1e-3, nullptr, opts);
    CHECK_FALSE(fit.converged);
    CHECK(fit.iterations == 1);
    CHECK(fit.coefficients.allFinite());
}

TEST_CASE("property: KKT, dual identity and brute-force agreement") {
    std::mt19937_64 rng(20240);
    std::uniform_int_distribution<int> pick_p(1, 20), pick_m(5, 100), pick_small_p(1, 3), pick_small_m(3, 20);
    std::uniform_real_distribution<double> frac(0.001, 1.0);
    int checked = 0;
    for (int rep = 0; rep < 400; ++rep) {
        const bool small = rep % 4 == 0;
        const Index p = small ? pick_small_p(rng) : pick_p(rng);
        const Index m = small ? pick_small_m(rng) : pick_m(rng);
        const auto in = oracle::random_instance(rng, m, p, rep % 3 == 0);
        const auto w = window_of(in);
        const double lam = frac(rng) * lambda_max(w);
        const LassoFit fit = solve_weighted_lasso(w, lam);
        REQUIRE(fit.converged);
        CHECK(kkt_residual(fit, w) <= 1e-8);
        if (!fit.active_set.empty())
            CHECK(std::abs(implied_lambda(fit, w) - lam) <= std::max(1e-7, 1e-8 * lam));
        if (small) {
            const double ref = oracle::brute_force_objective(in.x, in.y, in.w, lam);
            CHECK(std::abs(fit.objective_value - ref) <= 1e-6);
        }
        ++checked;
    }
    CHECK(checked == 400);
}

TEST_CASE("property: objective never increases across sweeps") {
    std::mt19937_64 rng(99);
    SolverOptions opts;
    opts.record_objective = true;
    for (int rep = 0; rep < 100; ++rep) {
        const auto in = oracle::random_instance(rng, 40, 15, rep % 2 == 0);
        const auto w = window_of(in);
        const LassoFit fit = solve_weighted_lasso(w, 0.05 * lambda_max(w), nullptr, opts);
        REQUIRE(!fit.sweep_objectives.empty());
        const double start = oracle::objective(in.x, in.y, in.w, Vector::Zero(15), fit.lambda);
        CHECK(fit.sweep_objectives.front() <= start + 1e-9 * std::abs(start));
        for (std::size_t k = 1; k < fit.sweep_objectives.size(); ++k)
            CHECK(fit.sweep_objectives[k] <= fit.sweep_objectives[k - 1] + 1e-9 * std::abs(start));
    }
}

TEST_CASE("property: scaling covariance") {
    std::mt19937_64 rng(1234);
    for (int rep = 0; rep < 50; ++rep) {
        const auto in = oracle::random_instance(rng, 30, 8, true);
        const auto w = window_of(in);
        const double lam = 0.2 * lambda_max(w);
        const double c = 3.5;
        const LassoFit a = solve_weighted_lasso(w, lam);
        const LassoFit b = solve_weighted_lasso(ObservationWindow(in.x, c * in.y, in.w), c * lam);
        CHECK((b.coefficients - c * a.coefficients).lpNorm<Eigen::Infinity>() <= 1e-8 * c);
    }
}

TEST_CASE("deterministic and warm-start consistent") {
    std::mt19937_64 rng(8);
    const auto in = oracle::random_instance(rng, 60, 12, false);
    const auto w = window_of(in);
    const double lam = 0.1 * lambda_max(w);
    const LassoFit a = solve_weighted_lasso(w, lam);
    const LassoFit b = solve_weighted_lasso(w, lam);
    CHECK(a.coefficients == b.coefficients);
    const Vector warm = Vector::Constant(12, 0.3);
    const LassoFit c = solve_weighted_lasso(w, lam, &warm);
    CHECK((a.coefficients - c.coefficients).lpNorm<Eigen::Infinity>() <= 1e-7);
}

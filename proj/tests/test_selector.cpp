#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tvlasso/selector.hpp"

using namespace tvlasso;

namespace {

// m = 50 rows on 5 orthonormal-ish columns with chosen residuals.
LassoFit fit_with(const ObservationWindow& w, Index df, double rss) {
    Vector b = Vector::Zero(w.dim());
    for (Index j = 0; j < df; ++j) b(j) = 1.0;
    LassoFit fit = make_fit(w, b, 0.0);
    fit.residuals = Vector::Constant(w.rows(), std::sqrt(rss / static_cast<double>(w.rows())));
    return fit;
}

ObservationWindow fifty_by(Index p) {
    Matrix x = Matrix::Zero(50, p);
    for (Index i = 0; i < 50; ++i) x(i, i % p) = 1.0;
    return ObservationWindow::unit(x, Vector::Ones(50));
}

}  // namespace

TEST_CASE("BIC examples") {
    const auto w = fifty_by(5);
    CHECK(bic_score(fit_with(w, 0, 50.0), w) == doctest::Approx(0.0).scale(1.0));
    // 50 log(1) + 5 log(50)
    CHECK(bic_score(fit_with(w, 5, 50.0), w) == doctest::Approx(5.0 * std::log(50.0)));
    CHECK(bic_score(fit_with(w, 5, 50.0), w) == doctest::Approx(19.56).epsilon(1e-3));
    CHECK(std::isinf(bic_score(fit_with(w, 2, 0.0), w)));
}

TEST_CASE("GCV examples") {
    const auto w = fifty_by(5);
    CHECK(gcv_score(fit_with(w, 0, 50.0), w) == doctest::Approx(1.0));
    CHECK(gcv_score(fit_with(w, 5, 25.0), w) == doctest::Approx(0.5 / 0.81));
    CHECK(gcv_score(fit_with(w, 5, 25.0), w) == doctest::Approx(0.6173).epsilon(1e-4));

    Matrix x = Matrix::Identity(3, 3);
    const auto tiny = ObservationWindow::unit(x, Vector::Ones(3));
    const LassoFit saturated = make_fit(tiny, Vector::Ones(3), 0.0);
    CHECK(std::isinf(gcv_score(saturated, tiny)));
}

TEST_CASE("lambda grid") {
    const auto g = LambdaGrid::relative_log_spaced(100, 1e-3);
    REQUIRE(g.size() == 100);
    CHECK(g.values().front() == doctest::Approx(1.0));
    CHECK(g.values().back() == doctest::Approx(1e-3));
    for (std::size_t i = 1; i < g.size(); ++i)
        CHECK(std::log(g.values()[i - 1] / g.values()[i]) == doctest::Approx(std::log(1e3) / 99));
    CHECK_THROWS_AS(LambdaGrid({}, LambdaGrid::Anchor::absolute), Error);
    CHECK_THROWS_AS(LambdaGrid({1.0, 2.0}, LambdaGrid::Anchor::absolute), Error);

    Matrix x(3, 1);
    x << 1, 2, 3;
    const auto flat = ObservationWindow::unit(x, Vector::Zero(3));
    try {
        g.resolve(flat);
        FAIL("expected degenerate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate);
    }
}

TEST_CASE("lasso path examples") {
    Matrix x(2, 1);
    x << 1, 1;
    Vector y(2);
    y << 1, 3;
    const auto w = ObservationWindow::unit(x, y);
    const auto single = lasso_path(w, LambdaGrid({1.0}, LambdaGrid::Anchor::relative_to_lambda_max));
    REQUIRE(single.size() == 1);
    CHECK(single[0].coefficients.isZero(0.0));

    const auto two = lasso_path(w, LambdaGrid({8.0, 2.0}, LambdaGrid::Anchor::absolute));
    REQUIRE(two.size() == 2);
    CHECK(two[0].coefficients(0) == 0.0);
    CHECK(two[1].coefficients(0) == doctest::Approx(1.5));

    std::mt19937_64 rng(17);
    const auto in = oracle::random_instance(rng, 50, 20, false);
    const auto win = ObservationWindow(in.x, in.y, in.w);
    const auto path = lasso_path(win, LambdaGrid::relative_log_spaced());
    REQUIRE(path.size() == 100);
    for (const auto& f : path) {
        CHECK(f.converged);
        CHECK(kkt_residual(f, win) <= 1e-8);
    }
}

TEST_CASE("path fits match cold starts and selection is the exhaustive argmin") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const auto in = oracle::random_instance(rng, 50, 20, rep % 2 == 1);
        const auto win = ObservationWindow(in.x, in.y, in.w);
        const auto grid = LambdaGrid::relative_log_spaced(40, 1e-3);
        const auto path = lasso_path(win, grid);
        for (Criterion c : {Criterion::bic, Criterion::gcv}) {
            std::size_t best = 0;
            double best_score = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < path.size(); ++i) {
                const LassoFit cold = solve_weighted_lasso(win, path[i].lambda);
                CHECK((cold.coefficients - path[i].coefficients).lpNorm<Eigen::Infinity>() <= 1e-7);
                const double s = criterion_score(c, cold, win);
                if (s < best_score) {
                    best_score = s;
                    best = i;
                }
            }
            const Selection sel = select_lambda(win, grid, c);
            CHECK(sel.index == best);
            CHECK(sel.lambda == path[best].lambda);
            for (const auto& f : path) CHECK(sel.score <= criterion_score(c, f, win) + 1e-9);
        }
    }
}

TEST_CASE("ties go to the larger lambda") {
    Matrix x(2, 1);
    x << 1, 1;
    Vector y(2);
    y << 1, 3;
    const auto w = ObservationWindow::unit(x, y);
    // both values give the zero fit and so equal scores
    const Selection sel = select_lambda(w, LambdaGrid({20.0, 10.0}, LambdaGrid::Anchor::absolute), Criterion::bic);
    CHECK(sel.index == 0);
    CHECK(sel.lambda == 20.0);
    const Selection one = select_lambda(w, LambdaGrid({5.0}, LambdaGrid::Anchor::absolute), Criterion::gcv);
    CHECK(one.lambda == 5.0);
}

TEST_CASE("pure noise selects the largest grid value") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;
    Matrix x(50, 20);
    Vector y(50);
    for (Index i = 0; i < 50; ++i) {
        for (Index j = 0; j < 20; ++j) x(i, j) = gauss(rng);
        y(i) = gauss(rng);
    }
    const auto w = ObservationWindow::unit(x, y);
    const Selection sel = select_lambda(w, LambdaGrid::relative_log_spaced(), Criterion::bic);
    CHECK(sel.index == 0);
    CHECK(sel.lambda == doctest::Approx(lambda_max(w)));
}

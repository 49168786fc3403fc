#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tvlasso/rap.hpp"
#include "tvlasso/scenarios.hpp"

using namespace tvlasso;

namespace {

SyntheticDataset base_data(std::uint64_t seed, double sigma2 = 1.0) {
    ScenarioSpec s = ScenarioSpec::base();
    s.seed = seed;
    s.schedule.sigma_post = sigma2;
    return generate(s);
}

RapState init_on(const SyntheticDataset& d, const RapConfig& cfg = {}) {
    return rap_init(d.predictors.topRows(50), d.responses.head(50), cfg);
}

// One-step squared error with coefficients re-solved at lambda.
double error_at(const RapState& s, const Vector& x, double y, double lambda, std::vector<Index>* support) {
    SolverOptions tight;
    tight.tol = 1e-13;
    tight.max_iter = 100000;
    const GramSolution sol = solve_gram_lasso(s.stat_xx, s.stat_xy, lambda, &s.coefficients, tight);
    if (support) {
        support->clear();
        for (Index j = 0; j < sol.coefficients.size(); ++j)
            if (sol.coefficients(j) != 0.0) support->push_back(j);
    }
    const double r = y - x.dot(sol.coefficients);
    return r * r;
}

}  // namespace

TEST_CASE("burn-in preconditions") {
    const auto d = base_data(1);
    CHECK_THROWS_AS(rap_init(d.predictors.topRows(1), d.responses.head(1), {}), Error);
    try {
        rap_init(d.predictors.topRows(10), Vector::Constant(10, 2.0), {});
        FAIL("expected degenerate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate);
    }
    RapConfig bad;
    bad.forgetting = 1.0;
    CHECK_THROWS_AS(init_on(d, bad), Error);
}

TEST_CASE("burn-in on the base scenario") {
    const auto d = base_data(42);
    const RapState s = init_on(d);
    Vector w(50);
    for (Index i = 0; i < 50; ++i) w(i) = std::pow(0.95, 49 - i);
    const double top = lambda_max(ObservationWindow(d.predictors.topRows(50), d.responses.head(50), w));
    CHECK(s.lambda > 0.0);
    CHECK(s.lambda <= top);
    // the five true signals carry the largest coefficients
    const Vector mag = s.coefficients.cwiseAbs();
    CHECK(mag.head(5).minCoeff() > mag.tail(15).maxCoeff());
    CHECK(s.step_size == doctest::Approx(0.2 * s.lambda));
    CHECK(s.lambda_floor == doctest::Approx(1e-6 * s.lambda));
}

TEST_CASE("geometric series statistics") {
    Vector x(3);
    x << 1.0, -2.0, 0.5;
    Matrix rows = x.transpose().replicate(50, 1);
    Vector y = Vector::Constant(50, 3.0);
    y(0) = 2.0;  // keeps the burn-in non-degenerate
    const RapState s = rap_init(rows, y, {});
    double series = 0.0;
    for (int k = 0; k < 50; ++k) series += std::pow(0.95, k);
    const Matrix expected = series * x * x.transpose();
    CHECK((s.stat_xx - expected).cwiseAbs().maxCoeff() <= 1e-10 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("statistics recursion matches direct summation") {
    const auto d = base_data(3);
    RapState s = init_on(d);
    const Matrix xx0 = s.stat_xx;
    const Vector xy0 = s.stat_xy;
    for (Index t = 50; t < 150; ++t) {
        const Index steps = t - 50 + 1;
        s = rap_step(s, d.predictors.row(t).transpose(), d.responses(t)).state;
        Matrix xx = std::pow(0.95, static_cast<double>(steps)) * xx0;
        Vector xy = std::pow(0.95, static_cast<double>(steps)) * xy0;
        for (Index k = 50; k <= t; ++k) {
            const double r = std::pow(0.95, static_cast<double>(t - k));
            xx += r * d.predictors.row(k).transpose() * d.predictors.row(k);
            xy += r * d.predictors.row(k).transpose() * d.responses(k);
        }
        CHECK((s.stat_xx - xx).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, xx.cwiseAbs().maxCoeff()));
        CHECK((s.stat_xy - xy).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, xy.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("step uses the pre-update coefficients") {
    const auto d = base_data(4);
    const RapState s = init_on(d);
    const Vector x = d.predictors.row(50).transpose();
    const RapStep step = rap_step(s, x, d.responses(50));
    CHECK(step.predicted == doctest::Approx(x.dot(s.coefficients)));
    CHECK(step.error == doctest::Approx((d.responses(50) - step.predicted) * (d.responses(50) - step.predicted)));
    CHECK(step.state.t == s.t + 1);
    CHECK(gram_kkt_residual(step.state.stat_xx, step.state.stat_xy, step.state.coefficients,
                            step.state.lambda) <= 1e-8);
}

TEST_CASE("empty support leaves lambda unchanged") {
    const auto d = base_data(5);
    RapState s = init_on(d);
    s.coefficients.setZero();
    const Vector x = d.predictors.row(60).transpose();
    REQUIRE(rap_lambda_gradient(s, x, d.responses(60)).value() == 0.0);
    const RapStep step = rap_step(s, x, d.responses(60));
    CHECK(step.state.lambda == s.lambda);
    CHECK_FALSE(step.state.gradient_skipped);
}

TEST_CASE("singular active block skips the update") {
    RapState s;
    s.lambda = 1.0;
    s.coefficients = Vector::Ones(2);
    s.stat_xx = Matrix::Ones(2, 2);  // rank one
    s.stat_xy = Vector::Ones(2);
    s.step_size = 0.5;
    s.lambda_floor = 1e-6;
    Vector x(2);
    x << 1.0, 0.5;
    CHECK_FALSE(rap_lambda_gradient(s, x, 3.0).has_value());
    const RapStep step = rap_step(s, x, 3.0);
    CHECK(step.state.gradient_skipped);
    CHECK(step.state.lambda == 1.0);
}

TEST_CASE("property: gradient matches central differences on frozen supports") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 10 && checked < 150; ++seed) {
        const auto d = base_data(100 + seed, 1.5);
        RapState s = init_on(d);
        for (Index t = 50; t < 400 && checked < 150; ++t) {
            const Vector x = d.predictors.row(t).transpose();
            const double y = d.responses(t);
            const auto g = rap_lambda_gradient(s, x, y);
            const double h = 1e-5 * s.lambda;
            std::vector<Index> lo, hi, here;
            const double e_hi = error_at(s, x, y, s.lambda + h, &hi);
            const double e_lo = error_at(s, x, y, s.lambda - h, &lo);
            error_at(s, x, y, s.lambda, &here);
            if (g && !here.empty() && lo == here && hi == here) {
                const double fd = (e_hi - e_lo) / (2.0 * h);
                const double scale = std::max(std::abs(fd), std::abs(*g));
                if (scale > 1e-10) {
                    CHECK(std::abs(fd - *g) <= 1e-3 * scale);
                    ++checked;
                }
            }
            s = rap_step(s, x, y).state;
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("lambda never drops below the floor") {
    for (bool log_space : {false, true}) {
        const auto d = base_data(6, 2.0);
        RapConfig cfg;
        cfg.step_size = 50.0;
        cfg.lambda_floor = 0.5;
        cfg.log_space = log_space;
        RapState s = init_on(d, cfg);
        bool hit_floor = false;
        for (Index t = 50; t < 400; ++t) {
            s = rap_step(s, d.predictors.row(t).transpose(), d.responses(t)).state;
            CHECK(s.lambda >= 0.5);
            hit_floor = hit_floor || s.lambda == 0.5;
        }
        if (!log_space) CHECK(hit_floor);
    }
}

TEST_CASE("zero step keeps lambda fixed and reduces to recursive lasso") {
    for (bool log_space : {false, true}) {
        const auto d = base_data(7, 1.5);
        RapConfig cfg;
        cfg.step_size = 0.0;
        cfg.log_space = log_space;
        RapState s = init_on(d, cfg);
        const double lambda0 = s.lambda;
        for (Index t = 50; t < 400; ++t) {
            s = rap_step(s, d.predictors.row(t).transpose(), d.responses(t)).state;
            CHECK(s.lambda == lambda0);
            if (t % 50 == 0) {
                const GramSolution cold = solve_gram_lasso(s.stat_xx, s.stat_xy, lambda0, nullptr, {});
                CHECK((cold.coefficients - s.coefficients).lpNorm<Eigen::Infinity>() <= 1e-7);
            }
        }
    }
}

TEST_CASE("non-finite inputs are rejected") {
    const auto d = base_data(8);
    const RapState s = init_on(d);
    Vector x = d.predictors.row(50).transpose();
    CHECK_THROWS_AS(rap_step(s, x, std::nan("")), Error);
    x(0) = INFINITY;
    CHECK_THROWS_AS(rap_step(s, x, 1.0), Error);
    CHECK_THROWS_AS(rap_step(s, Vector::Ones(3), 1.0), Error);
}

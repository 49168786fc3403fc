#include "tvlasso/rap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvlasso {

void RapConfig::validate() const {
    require(forgetting > 0.0 && forgetting < 1.0, "forgetting factor must lie strictly inside (0, 1)");
    require(std::isfinite(step_scale) && step_scale >= 0.0, "step scale must be nonnegative");
    require(std::isfinite(floor_scale) && floor_scale > 0.0, "floor scale must be positive");
    if (step_size) require(std::isfinite(*step_size) && *step_size >= 0.0, "step size must be nonnegative");
    if (lambda_floor)
        require(std::isfinite(*lambda_floor) && *lambda_floor > 0.0, "lambda floor must be positive");
}

RapState rap_init(const Matrix& predictors, const Vector& responses, const RapConfig& config) {
    config.validate();
    const Index m = predictors.rows();
    require(m >= 2, "RAP burn-in needs at least 2 observations");
    require(responses.size() == m, "burn-in responses do not match predictor rows");

    const double mean = responses.mean();
    if ((responses.array() - mean).abs().maxCoeff() == 0.0)
        fail(ErrorCode::degenerate, "RAP burn-in responses have zero variance");

    Vector weights(m);
    for (Index i = 0; i < m; ++i)
        weights(i) = std::pow(config.forgetting, static_cast<double>(m - 1 - i));
    const ObservationWindow window(predictors, responses, weights);

    RapState state;
    state.forgetting = config.forgetting;
    state.log_space = config.log_space;
    state.solver = config.solver;
    state.stat_xx = window.gram();
    state.stat_xy = window.cross();
    state.t = m;

    const Selection sel = select_lambda(window, config.grid, Criterion::bic, config.solver);
    state.lambda = sel.lambda;
    state.coefficients = sel.fit.coefficients;
    state.step_size = config.step_size.value_or(config.step_scale * sel.lambda);
    state.lambda_floor = config.lambda_floor.value_or(config.floor_scale * sel.lambda);
    state.lambda = std::max(state.lambda, state.lambda_floor);
    return state;
}

std::optional<double> rap_lambda_gradient(const RapState& state, const Vector& x, double y) {
    const Index p = state.dim();
    require(x.size() == p, "predictor row has length " + std::to_string(x.size()) +
                               ", expected " + std::to_string(p));
    std::vector<Index> active;
    for (Index j = 0; j < p; ++j)
        if (state.coefficients(j) != 0.0) active.push_back(j);
    if (active.empty()) return 0.0;

    const auto k = static_cast<Index>(active.size());
    Matrix h(k, k);
    Vector sign(k);
    Vector x_active(k);
    for (Index a = 0; a < k; ++a) {
        sign(a) = state.coefficients(active[a]) > 0.0 ? 1.0 : -1.0;
        x_active(a) = x(active[a]);
        for (Index c = 0; c < k; ++c) h(a, c) = state.stat_xx(active[a], active[c]);
    }
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vector d_beta = -0.5 * llt.solve(sign);
    if (!d_beta.allFinite()) return std::nullopt;
    const double residual = y - x.dot(state.coefficients);
    return -2.0 * residual * x_active.dot(d_beta);
}

RapStep rap_step(const RapState& state, const Vector& x, double y) {
    require(x.size() == state.dim(), "predictor row has wrong length");
    require(x.allFinite() && std::isfinite(y), "RAP step received non-finite input");

    RapStep out{state, 0.0, 0.0};
    RapState& next = out.state;
    out.predicted = x.dot(state.coefficients);
    out.error = (y - out.predicted) * (y - out.predicted);

    const std::optional<double> grad = rap_lambda_gradient(state, x, y);
    next.gradient_skipped = !grad.has_value();
    if (grad) {
        double updated = state.log_space
                             ? state.lambda * std::exp(-state.step_size * *grad / state.lambda)
                             : state.lambda - state.step_size * *grad;
        if (!std::isfinite(updated)) updated = state.lambda_floor;
        next.lambda = std::max(state.lambda_floor, updated);
    }

    next.stat_xx = state.forgetting * state.stat_xx + x * x.transpose();
    next.stat_xy = state.forgetting * state.stat_xy + x * y;
    next.t = state.t + 1;

    GramSolution sol =
        solve_gram_lasso(next.stat_xx, next.stat_xy, next.lambda, &state.coefficients, state.solver);
    if (!sol.converged)
        throw ConvergenceError(next.lambda, "RAP coefficient update did not converge at t=" +
                                                std::to_string(next.t));
    next.coefficients = std::move(sol.coefficients);
    return out;
}

}  // namespace tvlasso

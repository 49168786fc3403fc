#pragma once

#include <optional>

#include "tvlasso/lasso_core.hpp"
#include "tvlasso/selector.hpp"

namespace tvlasso {

/// Real-time adaptive penalization: lambda follows projected stochastic
/// gradient descent on the one-step-ahead squared prediction error, while
/// coefficients track the forgetting-weighted lasso at the current lambda.
struct RapConfig {
    double forgetting = 0.95;
    /// Step size as a multiple of the initial lambda, unless step_size is set.
    double step_scale = 0.2;
    std::optional<double> step_size;
    /// Lower bound for lambda as a multiple of the initial lambda, unless
    /// lambda_floor is set.
    double floor_scale = 1e-6;
    std::optional<double> lambda_floor;
    /// Multiplicative (log-space) lambda updates instead of additive ones.
    bool log_space = false;
    /// Grid used to pick the initial lambda on the burn-in block.
    LambdaGrid grid = LambdaGrid::relative_log_spaced();
    SolverOptions solver;

    void validate() const;
};

struct RapState {
    double lambda = 0.0;
    Vector coefficients;
    /// sum_k r^(t-k) x_k x_k'
    Matrix stat_xx;
    /// sum_k r^(t-k) x_k y_k
    Vector stat_xy;
    double forgetting = 0.95;
    double step_size = 0.0;
    double lambda_floor = 0.0;
    bool log_space = false;
    SolverOptions solver;
    long t = 0;
    /// Set when the last step skipped its lambda update (singular active block).
    bool gradient_skipped = false;

    Index dim() const noexcept { return coefficients.size(); }
};

/// Accumulates forgetting-weighted statistics over the burn-in block (most
/// recent row weight 1), picks the initial lambda by BIC on the burn-in rows
/// carrying those same weights, and fits the coefficients there.
RapState rap_init(const Matrix& predictors, const Vector& responses, const RapConfig& config);

/// d e / d lambda for e = (y - x'b(lambda))^2, with b(lambda) the lasso on the
/// state's current statistics and its support held fixed. Zero for an empty
/// support; nullopt when the active block of stat_xx is singular.
std::optional<double> rap_lambda_gradient(const RapState& state, const Vector& x, double y);

struct RapStep {
    RapState state;
    double predicted = 0.0;
    double error = 0.0;
};

/// One streaming update: predict with the current coefficients, take the
/// lambda gradient step, decay-update the statistics, then re-solve the
/// lasso on the new statistics at the new lambda (warm-started).
RapStep rap_step(const RapState& state, const Vector& x, double y);

}  // namespace tvlasso

#include "tvlasso/lasso_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvlasso {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::not_converged: return "not_converged";
        case ErrorCode::undefined_ratio: return "undefined_ratio";
        case ErrorCode::degenerate: return "degenerate";
        case ErrorCode::io: return "io";
        case ErrorCode::parse: return "parse";
        case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

ObservationWindow::ObservationWindow(Matrix predictors, Vector responses, Vector weights)
    : predictors_(std::move(predictors)),
      responses_(std::move(responses)),
      weights_(std::move(weights)) {
    require(predictors_.rows() >= 1 && predictors_.cols() >= 1,
            "observation window needs at least one row and one column");
    require(responses_.size() == predictors_.rows(),
            "responses length " + std::to_string(responses_.size()) +
                " does not match predictor rows " + std::to_string(predictors_.rows()));
    require(weights_.size() == predictors_.rows(),
            "weights length " + std::to_string(weights_.size()) +
                " does not match predictor rows " + std::to_string(predictors_.rows()));
    require(predictors_.allFinite(), "predictors contain non-finite values");
    require(responses_.allFinite(), "responses contain non-finite values");
    require(weights_.allFinite() && (weights_.array() > 0.0).all(),
            "weights must be finite and strictly positive");
}

ObservationWindow ObservationWindow::unit(Matrix predictors, Vector responses) {
    Vector weights = Vector::Ones(predictors.rows());
    return ObservationWindow(std::move(predictors), std::move(responses), std::move(weights));
}

Matrix ObservationWindow::gram() const {
    Matrix weighted = predictors_.array().colwise() * weights_.array();
    Matrix g = predictors_.transpose() * weighted;
    // Exact symmetry keeps coordinate updates order-independent of storage.
    return 0.5 * (g + g.transpose());
}

Vector ObservationWindow::cross() const {
    return predictors_.transpose() * weights_.cwiseProduct(responses_);
}

double soft_threshold(double value, double threshold) noexcept {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

namespace {

double sign_of(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// KKT violation given g = X'W(y - Xb).
double kkt_from_gradient(const Vector& grad, const Vector& coefficients, double lambda) {
    double worst = 0.0;
    for (Index j = 0; j < coefficients.size(); ++j) {
        const double two_g = 2.0 * grad(j);
        const double v = coefficients(j) != 0.0
                             ? std::abs(two_g - lambda * sign_of(coefficients(j)))
                             : std::max(0.0, std::abs(two_g) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

// b'Gb - 2c'b + lambda|b|_1 written through g = c - Gb.
double gram_objective(const Vector& cross, const Vector& grad, const Vector& b, double lambda) {
    return -b.dot(cross + grad) + lambda * b.lpNorm<1>();
}

void support_of(const Vector& b, std::vector<Index>& out) {
    out.clear();
    for (Index j = 0; j < b.size(); ++j)
        if (b(j) != 0.0) out.push_back(j);
}

std::vector<Index> support_of(const Vector& b) {
    std::vector<Index> s;
    support_of(b, s);
    return s;
}

// g = c - G b using only the columns in the support.
void refresh_gradient(const Matrix& gram, const Vector& cross, const Vector& b,
                      const std::vector<Index>& support, Vector& grad) {
    grad = cross;
    for (Index j : support) grad.noalias() -= gram.col(j) * b(j);
}

// Exact minimizer on the current support with signs frozen. Accepted only
// when it keeps the sign pattern (any pattern when lambda == 0) and does not
// raise the objective.
bool try_active_newton(const Matrix& gram, const Vector& cross, double lambda,
                       const std::vector<Index>& support, Vector& b, Vector& grad) {
    const auto k = static_cast<Index>(support.size());
    Matrix h(k, k);
    Vector rhs(k);
    for (Index a = 0; a < k; ++a) {
        rhs(a) = cross(support[a]) - 0.5 * lambda * sign_of(b(support[a]));
        for (Index c = 0; c < k; ++c) h(a, c) = gram(support[a], support[c]);
    }
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) return false;
    const Vector sol = llt.solve(rhs);
    if (!sol.allFinite()) return false;
    for (Index a = 0; a < k; ++a) {
        if (sol(a) == 0.0) return false;
        if (lambda > 0.0 && sign_of(sol(a)) != sign_of(b(support[a]))) return false;
    }
    Vector candidate = b;
    for (Index a = 0; a < k; ++a) candidate(support[a]) = sol(a);
    Vector cand_grad;
    refresh_gradient(gram, cross, candidate, support, cand_grad);
    if (gram_objective(cross, cand_grad, candidate, lambda) >
        gram_objective(cross, grad, b, lambda))
        return false;
    b = std::move(candidate);
    grad = std::move(cand_grad);
    return true;
}

void validate_solver_inputs(double lambda, const SolverOptions& options) {
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and nonnegative");
    require(std::isfinite(options.tol) && options.tol > 0.0, "tol must be positive");
    require(options.max_iter >= 1, "max_iter must be at least 1");
}

}  // namespace

double gram_kkt_residual(const Matrix& gram, const Vector& cross, const Vector& coefficients,
                         double lambda) {
    return kkt_from_gradient(cross - gram * coefficients, coefficients, lambda);
}

GramSolution solve_gram_lasso(const Matrix& gram, const Vector& cross, double lambda,
                              const Vector* warm_start, const SolverOptions& options) {
    validate_solver_inputs(lambda, options);
    const Index p = cross.size();
    require(gram.rows() == p && gram.cols() == p, "Gram matrix dimension mismatch");
    require(cross.allFinite(), "non-finite sufficient statistics");

    GramSolution out;
    Vector b = Vector::Zero(p);
    if (warm_start != nullptr) {
        require(warm_start->size() == p, "warm start has wrong length");
        require(warm_start->allFinite(), "warm start contains non-finite values");
        b = *warm_start;
    }
    std::vector<Index> support = support_of(b);
    std::vector<Index> prev_support = support;
    Vector grad;
    refresh_gradient(gram, cross, b, support, grad);
    const double half_lambda = 0.5 * lambda;
    // Along a warm-started path the support usually carries over, so the
    // polish often lands on the solution before the first sweep.
    if (!support.empty()) try_active_newton(gram, cross, lambda, support, b, grad);

    // Convergence uses the coordinate sweep's own step; the Newton polish is
    // certified by the KKT check that follows it.
    for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double diag = gram(j, j);
            if (diag <= 0.0) continue;
            const double z = grad(j) + diag * b(j);
            const double next = soft_threshold(z, half_lambda) / diag;
            const double delta = next - b(j);
            if (delta != 0.0) {
                grad.noalias() -= gram.col(j) * delta;
                b(j) = next;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        support_of(b, support);
        refresh_gradient(gram, cross, b, support, grad);
        out.iterations = sweep;
        out.kkt = kkt_from_gradient(grad, b, lambda);
        const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
        if (max_change <= options.tol * scale && out.kkt <= options.tol) {
            out.converged = true;
        } else if (!support.empty() && support == prev_support &&
                   try_active_newton(gram, cross, lambda, support, b, grad)) {
            out.kkt = kkt_from_gradient(grad, b, lambda);
        }
        std::swap(prev_support, support);

        if (options.record_objective)
            out.sweep_objectives.push_back(gram_objective(cross, grad, b, lambda));
        if (out.converged) break;
    }
    out.coefficients = std::move(b);
    return out;
}

LassoFit make_fit(const ObservationWindow& window, const Vector& coefficients, double lambda) {
    require(coefficients.size() == window.dim(), "coefficient length does not match window");
    LassoFit fit;
    fit.coefficients = coefficients;
    fit.lambda = lambda;
    fit.active_set = support_of(coefficients);
    fit.residuals = window.responses() - window.predictors() * coefficients;
    fit.objective_value = window.weights().dot(fit.residuals.cwiseAbs2()) +
                          lambda * coefficients.lpNorm<1>();
    const Vector grad =
        window.predictors().transpose() * window.weights().cwiseProduct(fit.residuals);
    fit.kkt = kkt_from_gradient(grad, coefficients, lambda);
    return fit;
}

LassoFit solve_weighted_lasso(const ObservationWindow& window, double lambda,
                              const Vector* warm_start, const SolverOptions& options) {
    validate_solver_inputs(lambda, options);
    GramSolution sol =
        solve_gram_lasso(window.gram(), window.cross(), lambda, warm_start, options);
    LassoFit fit = make_fit(window, sol.coefficients, lambda);
    fit.iterations = sol.iterations;
    fit.converged = sol.converged;
    if (options.record_objective) {
        const double constant = window.weights().dot(window.responses().cwiseAbs2());
        fit.sweep_objectives.reserve(sol.sweep_objectives.size());
        for (double v : sol.sweep_objectives) fit.sweep_objectives.push_back(v + constant);
    }
    return fit;
}

double lambda_max(const ObservationWindow& window) {
    return 2.0 * window.cross().lpNorm<Eigen::Infinity>();
}

double kkt_residual(const LassoFit& fit, const ObservationWindow& window) {
    require(fit.coefficients.size() == window.dim(), "fit does not match window dimension");
    const Vector r = window.responses() - window.predictors() * fit.coefficients;
    const Vector grad = window.predictors().transpose() * window.weights().cwiseProduct(r);
    return kkt_from_gradient(grad, fit.coefficients, fit.lambda);
}

double implied_lambda(const LassoFit& fit, const ObservationWindow& window) {
    require(fit.coefficients.size() == window.dim(), "fit does not match window dimension");
    const double l1 = fit.coefficients.lpNorm<1>();
    if (l1 == 0.0) fail(ErrorCode::undefined_ratio, "implied lambda undefined for an all-zero fit");
    const Vector fitted = window.predictors() * fit.coefficients;
    const Vector r = window.responses() - fitted;
    return 2.0 * r.dot(window.weights().cwiseProduct(fitted)) / l1;
}

std::size_t degrees_of_freedom(const LassoFit& fit) noexcept { return fit.active_set.size(); }

}  // namespace tvlasso

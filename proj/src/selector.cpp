#include "tvlasso/selector.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tvlasso {

LambdaGrid::LambdaGrid(std::vector<double> values, Anchor anchor)
    : values_(std::move(values)), anchor_(anchor) {
    require(!values_.empty(), "lambda grid must not be empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        require(std::isfinite(values_[i]) && values_[i] > 0.0, "lambda grid values must be positive");
        if (i > 0) require(values_[i] < values_[i - 1], "lambda grid must be strictly decreasing");
    }
    if (anchor_ == Anchor::relative_to_lambda_max)
        require(values_.front() <= 1.0, "relative lambda grid values must lie in (0, 1]");
}

LambdaGrid LambdaGrid::relative_log_spaced(std::size_t count, double min_fraction) {
    require(count >= 1, "grid needs at least one value");
    require(min_fraction > 0.0 && min_fraction <= 1.0, "min_fraction must lie in (0, 1]");
    std::vector<double> values(count);
    if (count == 1) {
        values[0] = 1.0;
    } else {
        require(min_fraction < 1.0, "min_fraction must be below 1 for multi-point grids");
        const double step = std::log(min_fraction) / static_cast<double>(count - 1);
        values[0] = 1.0;
        for (std::size_t i = 1; i < count; ++i) values[i] = std::exp(step * static_cast<double>(i));
        values.back() = min_fraction;
    }
    return LambdaGrid(std::move(values), Anchor::relative_to_lambda_max);
}

std::vector<double> LambdaGrid::resolve(const ObservationWindow& window) const {
    if (anchor_ == Anchor::absolute) return values_;
    const double top = lambda_max(window);
    if (!(top > 0.0))
        fail(ErrorCode::degenerate, "relative lambda grid needs lambda_max > 0 (responses uncorrelated with predictors)");
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i] * top;
    return out;
}

namespace {

std::vector<GramSolution> solve_path(const Matrix& gram, const Vector& cross,
                                     const std::vector<double>& lambdas,
                                     const SolverOptions& options) {
    std::vector<GramSolution> out;
    out.reserve(lambdas.size());
    Vector warm = Vector::Zero(cross.size());
    for (double lambda : lambdas) {
        GramSolution sol = solve_gram_lasso(gram, cross, lambda, &warm, options);
        if (!sol.converged) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "lasso path did not converge at lambda=" << lambda << " after "
                << sol.iterations << " sweeps (kkt=" << sol.kkt << ")";
            throw ConvergenceError(lambda, msg.str());
        }
        warm = sol.coefficients;
        out.push_back(std::move(sol));
    }
    return out;
}

double score_from(Criterion criterion, double rss, std::size_t df_count, double m_eff) {
    const auto df = static_cast<double>(df_count);
    if (criterion == Criterion::bic) {
        if (rss == 0.0) return std::numeric_limits<double>::infinity();
        return m_eff * std::log(rss / m_eff) + df * std::log(m_eff);
    }
    if (df >= m_eff) return std::numeric_limits<double>::infinity();
    const double shrink = 1.0 - df / m_eff;
    return (rss / m_eff) / (shrink * shrink);
}

}  // namespace

std::vector<LassoFit> lasso_path(const ObservationWindow& window, const LambdaGrid& grid,
                                 const SolverOptions& options) {
    const std::vector<double> lambdas = grid.resolve(window);
    std::vector<GramSolution> sols = solve_path(window.gram(), window.cross(), lambdas, options);
    std::vector<LassoFit> fits;
    fits.reserve(sols.size());
    for (std::size_t i = 0; i < sols.size(); ++i) {
        LassoFit fit = make_fit(window, sols[i].coefficients, lambdas[i]);
        fit.iterations = sols[i].iterations;
        fit.converged = true;
        fits.push_back(std::move(fit));
    }
    return fits;
}

namespace {

double weighted_rss(const LassoFit& fit, const ObservationWindow& window) {
    require(fit.residuals.size() == window.rows(), "fit residuals do not match window");
    return window.weights().dot(fit.residuals.cwiseAbs2());
}

}  // namespace

double bic_score(const LassoFit& fit, const ObservationWindow& window) {
    return score_from(Criterion::bic, weighted_rss(fit, window), degrees_of_freedom(fit),
                      window.weight_sum());
}

double gcv_score(const LassoFit& fit, const ObservationWindow& window) {
    const double m_eff = window.weight_sum();
    const std::size_t df = degrees_of_freedom(fit);
    if (static_cast<double>(df) >= m_eff) return std::numeric_limits<double>::infinity();
    return score_from(Criterion::gcv, weighted_rss(fit, window), df, m_eff);
}

double criterion_score(Criterion criterion, const LassoFit& fit, const ObservationWindow& window) {
    return criterion == Criterion::bic ? bic_score(fit, window) : gcv_score(fit, window);
}

Selection select_lambda(const ObservationWindow& window, const LambdaGrid& grid,
                        Criterion criterion, const SolverOptions& options) {
    const std::vector<double> lambdas = grid.resolve(window);
    const std::vector<GramSolution> sols =
        solve_path(window.gram(), window.cross(), lambdas, options);

    // Score every path point from its residuals; only the winner becomes a
    // full LassoFit.
    const Matrix& x = window.predictors();
    const Vector& w = window.weights();
    const double m_eff = window.weight_sum();
    Vector r(window.rows());
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const Vector& b = sols[i].coefficients;
        r = window.responses();
        std::size_t df = 0;
        for (Index j = 0; j < b.size(); ++j) {
            if (b(j) != 0.0) {
                r.noalias() -= x.col(j) * b(j);
                ++df;
            }
        }
        const double s = score_from(criterion, w.dot(r.cwiseAbs2()), df, m_eff);
        // Strict comparison keeps the earlier (larger) lambda on ties.
        if (i == 0 || s < best_score) {
            best_score = s;
            best = i;
        }
    }
    Selection out;
    out.lambda = lambdas[best];
    out.index = best;
    out.fit = make_fit(window, sols[best].coefficients, lambdas[best]);
    out.fit.iterations = sols[best].iterations;
    out.fit.converged = true;
    out.score = criterion_score(criterion, out.fit, window);
    return out;
}

}  // namespace tvlasso

#pragma once

#include <cstddef>
#include <vector>

#include "tvlasso/lasso_core.hpp"

namespace tvlasso {

/// Candidate lambdas, strictly decreasing and positive. With a relative
/// anchor the values are fractions of lambda_max of whatever window the grid
/// is applied to.
class LambdaGrid {
public:
    enum class Anchor { absolute, relative_to_lambda_max };

    LambdaGrid(std::vector<double> values, Anchor anchor);

    /// `count` log-spaced fractions from 1 down to `min_fraction`.
    static LambdaGrid relative_log_spaced(std::size_t count = 100, double min_fraction = 1e-3);

    const std::vector<double>& values() const noexcept { return values_; }
    Anchor anchor() const noexcept { return anchor_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Absolute lambdas for this window.
    std::vector<double> resolve(const ObservationWindow& window) const;

private:
    std::vector<double> values_;
    Anchor anchor_;
};

enum class Criterion { bic, gcv };

/// Warm-started path, one converged fit per grid value in grid order.
/// Throws ConvergenceError naming the lambda that failed.
std::vector<LassoFit> lasso_path(const ObservationWindow& window, const LambdaGrid& grid,
                                 const SolverOptions& options = {});

/// m_eff log(RSS_w / m_eff) + df log(m_eff); +inf when RSS_w == 0.
double bic_score(const LassoFit& fit, const ObservationWindow& window);

/// (RSS_w / m_eff) / (1 - df / m_eff)^2; +inf when df >= m_eff.
double gcv_score(const LassoFit& fit, const ObservationWindow& window);

double criterion_score(Criterion criterion, const LassoFit& fit, const ObservationWindow& window);

struct Selection {
    double lambda = 0.0;
    LassoFit fit;
    double score = 0.0;
    std::size_t index = 0;
};

/// Grid value minimizing the criterion. Ties go to the larger lambda.
Selection select_lambda(const ObservationWindow& window, const LambdaGrid& grid,
                        Criterion criterion, const SolverOptions& options = {});

}  // namespace tvlasso

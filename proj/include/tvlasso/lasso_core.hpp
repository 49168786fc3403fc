#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "tvlasso/error.hpp"

namespace tvlasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A block of (predictor row, response, weight) triples. Validated on
/// construction and immutable afterwards.
class ObservationWindow {
public:
    ObservationWindow(Matrix predictors, Vector responses, Vector weights);

    /// Window with every weight equal to one.
    static ObservationWindow unit(Matrix predictors, Vector responses);

    const Matrix& predictors() const noexcept { return predictors_; }
    const Vector& responses() const noexcept { return responses_; }
    const Vector& weights() const noexcept { return weights_; }
    Index rows() const noexcept { return predictors_.rows(); }
    Index dim() const noexcept { return predictors_.cols(); }
    double weight_sum() const noexcept { return weights_.sum(); }

    /// X^T W X
    Matrix gram() const;
    /// X^T W y
    Vector cross() const;

private:
    Matrix predictors_;
    Vector responses_;
    Vector weights_;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 10000;
    /// Record the objective after every sweep into LassoFit::sweep_objectives.
    bool record_objective = false;
};

struct LassoFit {
    Vector coefficients;
    double lambda = 0.0;
    std::vector<Index> active_set;
    Vector residuals;
    double objective_value = 0.0;
    int iterations = 0;
    bool converged = false;
    /// KKT violation of the returned iterate.
    double kkt = 0.0;
    std::vector<double> sweep_objectives;
};

/// Solution of the Gram-form problem
///   min_b  b'Gb - 2c'b + lambda*|b|_1
/// which is the weighted objective up to the constant y'Wy.
struct GramSolution {
    Vector coefficients;
    int iterations = 0;
    bool converged = false;
    double kkt = 0.0;
    std::vector<double> sweep_objectives;
};

/// Cyclic coordinate descent (ascending coordinate order) on the Gram form,
/// with an active-set Newton polish once the support stops moving.
/// Objective values in sweep_objectives omit the constant y'Wy.
GramSolution solve_gram_lasso(const Matrix& gram, const Vector& cross, double lambda,
                              const Vector* warm_start, const SolverOptions& options);

/// KKT violation for the Gram form, using g = c - Gb.
double gram_kkt_residual(const Matrix& gram, const Vector& cross, const Vector& coefficients,
                         double lambda);

/// Minimizes sum_i w_i (y_i - x_i'b)^2 + lambda*|b|_1.
/// A fit that did not converge within max_iter sweeps comes back with
/// converged == false and the best iterate; it is never reported as success.
LassoFit solve_weighted_lasso(const ObservationWindow& window, double lambda,
                              const Vector* warm_start = nullptr,
                              const SolverOptions& options = {});

/// Builds a LassoFit (residuals, objective, support) from given coefficients.
LassoFit make_fit(const ObservationWindow& window, const Vector& coefficients, double lambda);

/// Smallest lambda with an all-zero solution: 2 * max_j |sum_i w_i x_ij y_i|.
double lambda_max(const ObservationWindow& window);

double kkt_residual(const LassoFit& fit, const ObservationWindow& window);

/// Lambda recovered from the fit through the dual identity
///   2 (y - Xb)' W X b / |b|_1.
/// Throws ErrorCode::undefined_ratio for an all-zero fit.
double implied_lambda(const LassoFit& fit, const ObservationWindow& window);

std::size_t degrees_of_freedom(const LassoFit& fit) noexcept;

double soft_threshold(double value, double threshold) noexcept;

}  // namespace tvlasso

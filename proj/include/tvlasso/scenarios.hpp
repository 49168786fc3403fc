#pragma once

#include <cstdint>
#include <random>

#include "tvlasso/lasso_core.hpp"

namespace tvlasso {

using Rng = std::mt19937_64;

/// Toeplitz correlation sigma_ij = rho^|i-j|.
struct CovarianceSpec {
    double rho = 0.5;
    Index p = 20;
};

Matrix toeplitz_covariance(const CovarianceSpec& spec);

/// Draws N_p(0, Sigma) rows through a cached Cholesky factor.
class GaussianRowSampler {
public:
    explicit GaussianRowSampler(const CovarianceSpec& spec);

    Vector sample(Rng& rng) const;
    const Matrix& factor() const noexcept { return lower_; }

private:
    Matrix lower_;
};

Vector sample_predictor_row(Rng& rng, const CovarianceSpec& cov);

/// Values before and after a single change point. Rows with t < change_point
/// use the *_pre values.
struct PiecewiseSchedule {
    double sigma_pre = 1.0;
    double sigma_post = 1.0;
    double rho_pre = 0.5;
    double rho_post = 0.5;
    Vector beta_pre;
    Vector beta_post;
    Index change_point = 200;
};

struct ScenarioSpec {
    Index n = 400;
    Index p = 20;
    PiecewiseSchedule schedule;
    std::uint64_t seed = 0;

    /// sigma = 1, q = 5 leading ones, rho = 0.5, change point 200, n = 400,
    /// p = 20, with identical pre/post values.
    static ScenarioSpec base();

    void validate() const;
};

/// First q entries one, the remainder zero.
Vector ones_beta(Index p, Index q);

/// (1, 0.8, 0.6, 0.4, 0.2, 0, ..., 0)
Vector tapered_beta(Index p);

Vector beta_at(const ScenarioSpec& spec, Index t);
double sigma_at(const ScenarioSpec& spec, Index t);
double rho_at(const ScenarioSpec& spec, Index t);

struct SyntheticDataset {
    Matrix predictors;
    Vector responses;
    ScenarioSpec truth;
};

/// y_t = x_t' beta_t + eps_t with x_t ~ N_p(0, Sigma(rho_t)) and
/// eps_t ~ N(0, sigma_t^2). Per row the draws are p predictor normals followed
/// by one noise normal, so runs sharing a seed share their random numbers.
SyntheticDataset generate(const ScenarioSpec& spec);

/// Stable VAR(1) panel z_t = A z_{t-1} + e_t with e_t ~ N(0, s_t^2 I), where
/// s_t switches from noise_pre to noise_post at shift_at. A couples every
/// node to its ring neighbours.
struct VarPanelSpec {
    Index nodes = 10;
    Index n = 400;
    Index shift_at = 200;
    double noise_pre = 1.0;
    double noise_post = 2.0;
    double persistence = 0.3;
    double coupling = 0.2;
    std::uint64_t seed = 0;
};

Matrix generate_var_panel(const VarPanelSpec& spec);

}  // namespace tvlasso

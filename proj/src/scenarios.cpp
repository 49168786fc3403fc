#include "tvlasso/scenarios.hpp"

#include <cmath>
#include <string>

namespace tvlasso {

Matrix toeplitz_covariance(const CovarianceSpec& spec) {
    require(spec.p >= 1, "covariance dimension must be at least 1");
    require(std::isfinite(spec.rho) && std::abs(spec.rho) < 1.0, "rho must satisfy |rho| < 1");
    Matrix sigma(spec.p, spec.p);
    for (Index i = 0; i < spec.p; ++i)
        for (Index j = 0; j < spec.p; ++j)
            sigma(i, j) = std::pow(spec.rho, static_cast<double>(std::abs(i - j)));
    return sigma;
}

GaussianRowSampler::GaussianRowSampler(const CovarianceSpec& spec) {
    Eigen::LLT<Matrix> llt(toeplitz_covariance(spec));
    if (llt.info() != Eigen::Success)
        fail(ErrorCode::degenerate, "Toeplitz covariance is not positive definite");
    lower_ = llt.matrixL();
}

Vector GaussianRowSampler::sample(Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(lower_.rows());
    for (Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return lower_.triangularView<Eigen::Lower>() * z;
}

Vector sample_predictor_row(Rng& rng, const CovarianceSpec& cov) {
    return GaussianRowSampler(cov).sample(rng);
}

ScenarioSpec ScenarioSpec::base() {
    ScenarioSpec s;
    s.schedule.beta_pre = ones_beta(s.p, 5);
    s.schedule.beta_post = s.schedule.beta_pre;
    return s;
}

void ScenarioSpec::validate() const {
    require(n >= 2, "scenario needs n >= 2");
    require(p >= 1, "scenario needs p >= 1");
    const auto& s = schedule;
    require(s.change_point > 0 && s.change_point < n,
            "change point " + std::to_string(s.change_point) + " must satisfy 0 < t* < n=" +
                std::to_string(n));
    require(std::isfinite(s.sigma_pre) && std::isfinite(s.sigma_post) && s.sigma_pre >= 0.0 &&
                s.sigma_post >= 0.0,
            "sigma values must be nonnegative");
    require(std::abs(s.rho_pre) < 1.0 && std::abs(s.rho_post) < 1.0, "rho values must satisfy |rho| < 1");
    require(s.beta_pre.size() == p && s.beta_post.size() == p, "beta vectors must have length p");
    require(s.beta_pre.allFinite() && s.beta_post.allFinite(), "beta vectors must be finite");
}

Vector ones_beta(Index p, Index q) {
    require(q >= 0 && q <= p, "active set size q must lie in [0, p]");
    Vector b = Vector::Zero(p);
    b.head(q).setOnes();
    return b;
}

Vector tapered_beta(Index p) {
    require(p >= 5, "tapered beta needs p >= 5");
    Vector b = Vector::Zero(p);
    b.head(5) << 1.0, 0.8, 0.6, 0.4, 0.2;
    return b;
}

Vector beta_at(const ScenarioSpec& spec, Index t) {
    require(t >= 0 && t < spec.n, "time index out of range");
    return t < spec.schedule.change_point ? spec.schedule.beta_pre : spec.schedule.beta_post;
}

double sigma_at(const ScenarioSpec& spec, Index t) {
    return t < spec.schedule.change_point ? spec.schedule.sigma_pre : spec.schedule.sigma_post;
}

double rho_at(const ScenarioSpec& spec, Index t) {
    return t < spec.schedule.change_point ? spec.schedule.rho_pre : spec.schedule.rho_post;
}

SyntheticDataset generate(const ScenarioSpec& spec) {
    spec.validate();
    const auto& s = spec.schedule;
    const GaussianRowSampler before({s.rho_pre, spec.p});
    const GaussianRowSampler after({s.rho_post, spec.p});

    Rng rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SyntheticDataset data{Matrix(spec.n, spec.p), Vector(spec.n), spec};
    for (Index t = 0; t < spec.n; ++t) {
        const bool pre = t < s.change_point;
        const Vector x = (pre ? before : after).sample(rng);
        const double eps = normal(rng);
        data.predictors.row(t) = x.transpose();
        data.responses(t) = x.dot(pre ? s.beta_pre : s.beta_post) + (pre ? s.sigma_pre : s.sigma_post) * eps;
    }
    return data;
}

Matrix generate_var_panel(const VarPanelSpec& spec) {
    require(spec.nodes >= 2, "panel needs at least 2 nodes");
    require(spec.n >= 2, "panel needs at least 2 rows");
    require(spec.shift_at >= 0 && spec.shift_at <= spec.n, "shift index out of range");
    require(std::abs(spec.persistence) + 2.0 * std::abs(spec.coupling) < 1.0,
            "VAR coefficients must keep the process stable");
    const Index d = spec.nodes;
    Matrix a = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
        a(i, i) = spec.persistence;
        a(i, (i + 1) % d) += spec.coupling;
        a(i, (i + d - 1) % d) += spec.coupling;
    }
    Rng rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(spec.n, d);
    Vector prev = Vector::Zero(d);
    for (Index t = 0; t < spec.n; ++t) {
        const double scale = t < spec.shift_at ? spec.noise_pre : spec.noise_post;
        Vector e(d);
        for (Index i = 0; i < d; ++i) e(i) = scale * normal(rng);
        prev = a * prev + e;
        z.row(t) = prev.transpose();
    }
    return z;
}

}  // namespace tvlasso

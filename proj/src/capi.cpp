#include "tvlasso/tvlasso.h"

#include <cmath>
#include <new>
#include <string>

#include "tvlasso/rap.hpp"
#include "tvlasso/run.hpp"

struct tvl_window {
    tvlasso::ObservationWindow window;
};

struct tvl_fit {
    tvlasso::LassoFit fit;
};

struct tvl_rap {
    tvlasso::RapState state;
};

struct tvl_config {
    tvlasso::RunConfig config;
};

namespace {

thread_local std::string last_error;

tvl_status to_status(tvlasso::ErrorCode code) {
    switch (code) {
        case tvlasso::ErrorCode::invalid_argument: return TVL_INVALID_ARGUMENT;
        case tvlasso::ErrorCode::not_converged: return TVL_NOT_CONVERGED;
        case tvlasso::ErrorCode::undefined_ratio: return TVL_UNDEFINED_RATIO;
        case tvlasso::ErrorCode::degenerate: return TVL_DEGENERATE;
        case tvlasso::ErrorCode::io: return TVL_IO_ERROR;
        case tvlasso::ErrorCode::parse: return TVL_PARSE_ERROR;
        case tvlasso::ErrorCode::internal: return TVL_INTERNAL_ERROR;
    }
    return TVL_INTERNAL_ERROR;
}

template <class Body>
tvl_status guarded(Body&& body) noexcept {
    try {
        body();
        last_error.clear();
        return TVL_OK;
    } catch (const tvlasso::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return TVL_INTERNAL_ERROR;
    } catch (const std::exception& e) {
        last_error = e.what();
        return TVL_INTERNAL_ERROR;
    } catch (...) {
        last_error = "unknown error";
        return TVL_INTERNAL_ERROR;
    }
}

void need(const void* ptr, const char* what) {
    if (ptr == nullptr) tvlasso::fail(tvlasso::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

tvlasso::Matrix row_major(const double* x, size_t n, size_t p) {
    const auto rows = static_cast<tvlasso::Index>(n);
    const auto cols = static_cast<tvlasso::Index>(p);
    tvlasso::Matrix m(rows, cols);
    for (tvlasso::Index i = 0; i < rows; ++i)
        for (tvlasso::Index j = 0; j < cols; ++j) m(i, j) = x[i * cols + j];
    return m;
}

tvlasso::Vector vec(const double* v, size_t n) {
    return Eigen::Map<const tvlasso::Vector>(v, static_cast<tvlasso::Index>(n));
}

tvlasso::SolverOptions solver_from(const tvl_solver_options* o) {
    tvlasso::SolverOptions s;
    if (o != nullptr) {
        s.tol = o->tol;
        s.max_iter = o->max_iter;
    }
    return s;
}

void copy_out(const tvlasso::Vector& v, double* out, size_t len) {
    need(out, "output buffer");
    if (len != static_cast<size_t>(v.size()))
        tvlasso::fail(tvlasso::ErrorCode::invalid_argument,
                      "buffer length " + std::to_string(len) + " != " + std::to_string(v.size()));
    for (tvlasso::Index j = 0; j < v.size(); ++j) out[j] = v(j);
}

}  // namespace

extern "C" {

const char* tvl_version(void) { return "0.1.0"; }

const char* tvl_status_string(tvl_status status) {
    switch (status) {
        case TVL_OK: return "ok";
        case TVL_INVALID_ARGUMENT: return "invalid_argument";
        case TVL_NOT_CONVERGED: return "not_converged";
        case TVL_UNDEFINED_RATIO: return "undefined_ratio";
        case TVL_DEGENERATE: return "degenerate";
        case TVL_IO_ERROR: return "io";
        case TVL_PARSE_ERROR: return "parse";
        case TVL_INTERNAL_ERROR: return "internal";
    }
    return "unknown";
}

const char* tvl_last_error(void) { return last_error.c_str(); }

void tvl_solver_options_default(tvl_solver_options* options) {
    if (options == nullptr) return;
    const tvlasso::SolverOptions d;
    options->tol = d.tol;
    options->max_iter = d.max_iter;
}

void tvl_rap_options_default(tvl_rap_options* options) {
    if (options == nullptr) return;
    const tvlasso::RapConfig d;
    options->forgetting = d.forgetting;
    options->step_scale = d.step_scale;
    options->has_step_size = 0;
    options->step_size = 0.0;
    options->floor_scale = d.floor_scale;
    options->has_lambda_floor = 0;
    options->lambda_floor = 0.0;
    options->log_space = 0;
    options->grid_size = d.grid.size();
    options->grid_min = d.grid.values().back();
    tvl_solver_options_default(&options->solver);
}

tvl_status tvl_window_create(const double* x, const double* y, const double* weights, size_t n,
                             size_t p, tvl_window** out) {
    return guarded([&] {
        need(x, "x");
        need(y, "y");
        need(out, "out");
        *out = nullptr;
        tvlasso::require(n >= 1 && p >= 1, "window needs n >= 1 and p >= 1");
        tvlasso::Vector w = weights != nullptr ? vec(weights, n) : tvlasso::Vector::Ones(static_cast<tvlasso::Index>(n));
        *out = new tvl_window{tvlasso::ObservationWindow(row_major(x, n, p), vec(y, n), std::move(w))};
    });
}

void tvl_window_destroy(tvl_window* window) { delete window; }

tvl_status tvl_window_dims(const tvl_window* window, size_t* n, size_t* p) {
    return guarded([&] {
        need(window, "window");
        if (n != nullptr) *n = static_cast<size_t>(window->window.rows());
        if (p != nullptr) *p = static_cast<size_t>(window->window.dim());
    });
}

tvl_status tvl_lambda_max(const tvl_window* window, double* out) {
    return guarded([&] {
        need(window, "window");
        need(out, "out");
        *out = tvlasso::lambda_max(window->window);
    });
}

tvl_status tvl_solve(const tvl_window* window, double lambda, const double* warm_start,
                     const tvl_solver_options* options, tvl_fit** out) {
    return guarded([&] {
        need(window, "window");
        need(out, "out");
        *out = nullptr;
        const tvlasso::SolverOptions opts = solver_from(options);
        tvlasso::LassoFit fit;
        if (warm_start != nullptr) {
            const tvlasso::Vector warm = vec(warm_start, static_cast<size_t>(window->window.dim()));
            fit = tvlasso::solve_weighted_lasso(window->window, lambda, &warm, opts);
        } else {
            fit = tvlasso::solve_weighted_lasso(window->window, lambda, nullptr, opts);
        }
        if (!fit.converged)
            throw tvlasso::ConvergenceError(lambda, "solver did not converge within " +
                                                        std::to_string(opts.max_iter) + " sweeps");
        *out = new tvl_fit{std::move(fit)};
    });
}

void tvl_fit_destroy(tvl_fit* fit) { delete fit; }

tvl_status tvl_fit_coefficients(const tvl_fit* fit, double* out, size_t len) {
    return guarded([&] {
        need(fit, "fit");
        copy_out(fit->fit.coefficients, out, len);
    });
}

tvl_status tvl_fit_lambda(const tvl_fit* fit, double* out) {
    return guarded([&] {
        need(fit, "fit");
        need(out, "out");
        *out = fit->fit.lambda;
    });
}

tvl_status tvl_fit_objective(const tvl_fit* fit, double* out) {
    return guarded([&] {
        need(fit, "fit");
        need(out, "out");
        *out = fit->fit.objective_value;
    });
}

tvl_status tvl_fit_df(const tvl_fit* fit, size_t* out) {
    return guarded([&] {
        need(fit, "fit");
        need(out, "out");
        *out = tvlasso::degrees_of_freedom(fit->fit);
    });
}

tvl_status tvl_fit_iterations(const tvl_fit* fit, int* out) {
    return guarded([&] {
        need(fit, "fit");
        need(out, "out");
        *out = fit->fit.iterations;
    });
}

tvl_status tvl_fit_converged(const tvl_fit* fit, int* out) {
    return guarded([&] {
        need(fit, "fit");
        need(out, "out");
        *out = fit->fit.converged ? 1 : 0;
    });
}

tvl_status tvl_kkt_residual(const tvl_fit* fit, const tvl_window* window, double* out) {
    return guarded([&] {
        need(fit, "fit");
        need(window, "window");
        need(out, "out");
        *out = tvlasso::kkt_residual(fit->fit, window->window);
    });
}

tvl_status tvl_implied_lambda(const tvl_fit* fit, const tvl_window* window, double* out) {
    return guarded([&] {
        need(fit, "fit");
        need(window, "window");
        need(out, "out");
        *out = tvlasso::implied_lambda(fit->fit, window->window);
    });
}

tvl_status tvl_criterion_score(tvl_criterion criterion, const tvl_fit* fit, const tvl_window* window,
                               double* out) {
    return guarded([&] {
        need(fit, "fit");
        need(window, "window");
        need(out, "out");
        tvlasso::require(criterion == TVL_BIC || criterion == TVL_GCV, "unknown criterion");
        const auto c = criterion == TVL_BIC ? tvlasso::Criterion::bic : tvlasso::Criterion::gcv;
        tvlasso::require(fit->fit.coefficients.size() == window->window.dim(), "fit does not match window");
        *out = tvlasso::criterion_score(c, fit->fit, window->window);
    });
}

tvl_status tvl_select_lambda(const tvl_window* window, tvl_criterion criterion, size_t grid_size,
                             double grid_min, const tvl_solver_options* options, double* lambda_out,
                             tvl_fit** fit_out) {
    return guarded([&] {
        need(window, "window");
        if (fit_out != nullptr) *fit_out = nullptr;
        tvlasso::require(criterion == TVL_BIC || criterion == TVL_GCV, "unknown criterion");
        const auto c = criterion == TVL_BIC ? tvlasso::Criterion::bic : tvlasso::Criterion::gcv;
        const auto grid = tvlasso::LambdaGrid::relative_log_spaced(grid_size, grid_min);
        tvlasso::Selection sel = tvlasso::select_lambda(window->window, grid, c, solver_from(options));
        if (lambda_out != nullptr) *lambda_out = sel.lambda;
        if (fit_out != nullptr) *fit_out = new tvl_fit{std::move(sel.fit)};
    });
}

tvl_status tvl_rap_init(const double* x, const double* y, size_t n, size_t p,
                        const tvl_rap_options* options, tvl_rap** out) {
    return guarded([&] {
        need(x, "x");
        need(y, "y");
        need(out, "out");
        *out = nullptr;
        tvlasso::require(n >= 1 && p >= 1, "burn-in needs n >= 1 and p >= 1");
        tvlasso::RapConfig cfg;
        if (options != nullptr) {
            cfg.forgetting = options->forgetting;
            cfg.step_scale = options->step_scale;
            if (options->has_step_size) cfg.step_size = options->step_size;
            cfg.floor_scale = options->floor_scale;
            if (options->has_lambda_floor) cfg.lambda_floor = options->lambda_floor;
            cfg.log_space = options->log_space != 0;
            cfg.grid = tvlasso::LambdaGrid::relative_log_spaced(options->grid_size, options->grid_min);
            cfg.solver = solver_from(&options->solver);
        }
        *out = new tvl_rap{tvlasso::rap_init(row_major(x, n, p), vec(y, n), cfg)};
    });
}

void tvl_rap_destroy(tvl_rap* rap) { delete rap; }

tvl_status tvl_rap_step(tvl_rap* rap, const double* x, double y, double* predicted, double* error) {
    return guarded([&] {
        need(rap, "rap");
        need(x, "x");
        tvlasso::RapStep step =
            tvlasso::rap_step(rap->state, vec(x, static_cast<size_t>(rap->state.dim())), y);
        rap->state = std::move(step.state);
        if (predicted != nullptr) *predicted = step.predicted;
        if (error != nullptr) *error = step.error;
    });
}

tvl_status tvl_rap_lambda(const tvl_rap* rap, double* out) {
    return guarded([&] {
        need(rap, "rap");
        need(out, "out");
        *out = rap->state.lambda;
    });
}

tvl_status tvl_rap_dim(const tvl_rap* rap, size_t* out) {
    return guarded([&] {
        need(rap, "rap");
        need(out, "out");
        *out = static_cast<size_t>(rap->state.dim());
    });
}

tvl_status tvl_rap_coefficients(const tvl_rap* rap, double* out, size_t len) {
    return guarded([&] {
        need(rap, "rap");
        copy_out(rap->state.coefficients, out, len);
    });
}

tvl_status tvl_rap_gradient(const tvl_rap* rap, const double* x, double y, double* out, int* defined) {
    return guarded([&] {
        need(rap, "rap");
        need(x, "x");
        need(out, "out");
        const auto g =
            tvlasso::rap_lambda_gradient(rap->state, vec(x, static_cast<size_t>(rap->state.dim())), y);
        *out = g.value_or(std::nan(""));
        if (defined != nullptr) *defined = g ? 1 : 0;
    });
}

tvl_status tvl_config_create(tvl_config** out) {
    return guarded([&] {
        need(out, "out");
        *out = new tvl_config{};
    });
}

tvl_status tvl_config_load(const char* path, tvl_config** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = new tvl_config{tvlasso::RunConfig::load(path)};
    });
}

tvl_status tvl_config_set(tvl_config* config, const char* key, const char* value) {
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        need(value, "value");
        config->config.set(key, value);
    });
}

void tvl_config_destroy(tvl_config* config) { delete config; }

tvl_status tvl_run(const tvl_config* config, const char* command, const char* out_dir) {
    return guarded([&] {
        need(config, "config");
        need(command, "command");
        need(out_dir, "out_dir");
        const tvlasso::RunResult result =
            tvlasso::run_command(tvlasso::parse_command(command), config->config);
        tvlasso::commit_outputs(out_dir, result);
    });
}

}  // extern "C"

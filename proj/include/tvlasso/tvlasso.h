#ifndef TVLASSO_TVLASSO_H
#define TVLASSO_TVLASSO_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(TVL_BUILDING_LIBRARY)
#    define TVL_API __declspec(dllexport)
#  else
#    define TVL_API __declspec(dllimport)
#  endif
#else
#  define TVL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tvl_status {
    TVL_OK = 0,
    TVL_INVALID_ARGUMENT = 1,
    TVL_NOT_CONVERGED = 2,
    TVL_UNDEFINED_RATIO = 3,
    TVL_DEGENERATE = 4,
    TVL_IO_ERROR = 5,
    TVL_PARSE_ERROR = 6,
    TVL_INTERNAL_ERROR = 7
} tvl_status;

typedef enum tvl_criterion { TVL_BIC = 0, TVL_GCV = 1 } tvl_criterion;

typedef struct tvl_window tvl_window;
typedef struct tvl_fit tvl_fit;
typedef struct tvl_rap tvl_rap;
typedef struct tvl_config tvl_config;

typedef struct tvl_solver_options {
    double tol;
    int max_iter;
} tvl_solver_options;

typedef struct tvl_rap_options {
    double forgetting;
    /* Step = step_scale * initial lambda unless has_step_size is set. */
    double step_scale;
    int has_step_size;
    double step_size;
    /* Floor = floor_scale * initial lambda unless has_lambda_floor is set. */
    double floor_scale;
    int has_lambda_floor;
    double lambda_floor;
    int log_space;
    size_t grid_size;
    double grid_min;
    tvl_solver_options solver;
} tvl_rap_options;

TVL_API const char* tvl_version(void);
TVL_API const char* tvl_status_string(tvl_status status);
/* Message for the last failing call on this thread; "" when none. */
TVL_API const char* tvl_last_error(void);

TVL_API void tvl_solver_options_default(tvl_solver_options* options);
TVL_API void tvl_rap_options_default(tvl_rap_options* options);

/* x is row-major n-by-p. weights may be NULL for unit weights. */
TVL_API tvl_status tvl_window_create(const double* x, const double* y, const double* weights,
                                     size_t n, size_t p, tvl_window** out);
TVL_API void tvl_window_destroy(tvl_window* window);
TVL_API tvl_status tvl_window_dims(const tvl_window* window, size_t* n, size_t* p);
TVL_API tvl_status tvl_lambda_max(const tvl_window* window, double* out);

/* warm_start (length p) and options may be NULL. */
TVL_API tvl_status tvl_solve(const tvl_window* window, double lambda, const double* warm_start,
                             const tvl_solver_options* options, tvl_fit** out);
TVL_API void tvl_fit_destroy(tvl_fit* fit);
TVL_API tvl_status tvl_fit_coefficients(const tvl_fit* fit, double* out, size_t len);
TVL_API tvl_status tvl_fit_lambda(const tvl_fit* fit, double* out);
TVL_API tvl_status tvl_fit_objective(const tvl_fit* fit, double* out);
TVL_API tvl_status tvl_fit_df(const tvl_fit* fit, size_t* out);
TVL_API tvl_status tvl_fit_iterations(const tvl_fit* fit, int* out);
TVL_API tvl_status tvl_fit_converged(const tvl_fit* fit, int* out);
TVL_API tvl_status tvl_kkt_residual(const tvl_fit* fit, const tvl_window* window, double* out);
/* TVL_UNDEFINED_RATIO for an all-zero fit. */
TVL_API tvl_status tvl_implied_lambda(const tvl_fit* fit, const tvl_window* window, double* out);
TVL_API tvl_status tvl_criterion_score(tvl_criterion criterion, const tvl_fit* fit,
                                       const tvl_window* window, double* out);

/* Relative log-spaced grid. fit_out may be NULL. */
TVL_API tvl_status tvl_select_lambda(const tvl_window* window, tvl_criterion criterion,
                                     size_t grid_size, double grid_min,
                                     const tvl_solver_options* options, double* lambda_out,
                                     tvl_fit** fit_out);

/* Burn-in x is row-major n-by-p. options may be NULL. */
TVL_API tvl_status tvl_rap_init(const double* x, const double* y, size_t n, size_t p,
                                const tvl_rap_options* options, tvl_rap** out);
TVL_API void tvl_rap_destroy(tvl_rap* rap);
/* Advances one observation. predicted and error may be NULL. */
TVL_API tvl_status tvl_rap_step(tvl_rap* rap, const double* x, double y, double* predicted,
                                double* error);
TVL_API tvl_status tvl_rap_lambda(const tvl_rap* rap, double* out);
TVL_API tvl_status tvl_rap_dim(const tvl_rap* rap, size_t* out);
TVL_API tvl_status tvl_rap_coefficients(const tvl_rap* rap, double* out, size_t len);
/* *defined is 0 when the active block is singular. */
TVL_API tvl_status tvl_rap_gradient(const tvl_rap* rap, const double* x, double y, double* out,
                                    int* defined);

TVL_API tvl_status tvl_config_create(tvl_config** out);
/* key = value file or a JSON run manifest. */
TVL_API tvl_status tvl_config_load(const char* path, tvl_config** out);
TVL_API tvl_status tvl_config_set(tvl_config* config, const char* key, const char* value);
TVL_API void tvl_config_destroy(tvl_config* config);

/* command: "simulate", "sweep" or "stream". */
TVL_API tvl_status tvl_run(const tvl_config* config, const char* command, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif

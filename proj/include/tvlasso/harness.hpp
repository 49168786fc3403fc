#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tvlasso/rap.hpp"
#include "tvlasso/scenarios.hpp"
#include "tvlasso/selector.hpp"

namespace tvlasso {

enum class Method { bic_window, gcv_window, rap };

const char* to_string(Method method) noexcept;
/// Accepts "bic", "gcv", "rap" (case-insensitive).
Method parse_method(const std::string& name);

struct StreamConfig {
    Method method = Method::bic_window;
    Index window_length = 50;
    Index burn_in = 50;
    LambdaGrid grid = LambdaGrid::relative_log_spaced();
    RapConfig rap;
    SolverOptions solver;

    void validate() const;
};

struct LambdaTrace {
    std::vector<Index> times;
    std::vector<double> values;
    Method method = Method::bic_window;
    /// Replicate id; empty for an averaged trace.
    std::optional<int> replicate;
    bool normalized = false;

    std::size_t size() const noexcept { return values.size(); }
};

/// Lambda selected at each t = burn_in .. n-1. Windowed methods fit the
/// window_length most recent rows (t inclusive) with unit weights; RAP is
/// initialised on rows [0, burn_in) and then stepped once per row.
LambdaTrace run_stream(const Matrix& predictors, const Vector& responses, const StreamConfig& config);
LambdaTrace run_stream(const SyntheticDataset& data, const StreamConfig& config);

LambdaTrace average_traces(const std::vector<LambdaTrace>& traces);

/// (v - min) / (max - min). Throws ErrorCode::degenerate for a constant trace.
LambdaTrace normalize_unit_interval(const LambdaTrace& trace);

/// mean over [cp + settle, end] divided by mean over [cp - settle, cp).
double relative_change(const LambdaTrace& trace, Index change_point, Index settle);

/// Offset from the change point of the first time the trace has covered
/// `fraction` of the way from its pre-change level to its post-change
/// plateau (levels as in relative_change). Empty if it never does.
std::optional<Index> time_to_fraction(const LambdaTrace& trace, Index change_point, Index settle,
                                      double fraction = 0.9);

enum class Axis { sigma2, q2, rho2 };

const char* to_string(Axis axis) noexcept;
Axis parse_axis(const std::string& name);

/// Copy of `base` with the post-change value of `axis` set to `value`.
ScenarioSpec apply_axis(const ScenarioSpec& base, Axis axis, double value);
/// value divided by the matching pre-change value of `base`.
double axis_ratio(const ScenarioSpec& base, Axis axis, double value);

struct SweepAxis {
    Axis axis = Axis::sigma2;
    std::vector<double> values;
    std::vector<double> ratios;
};

struct RelativeChangeGrid {
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
    /// Row-major over (axis1, axis2): ratio of the replicate-averaged trace.
    std::vector<double> mean_ratio;
    /// Standard error of the per-replicate ratios.
    std::vector<double> stderr_ratio;
    int replicates = 0;

    std::size_t cols() const noexcept { return axis2 ? axis2->values.size() : 1; }
    double at(std::size_t i1, std::size_t i2 = 0) const { return mean_ratio.at(i1 * cols() + i2); }
};

struct SweepOptions {
    int replicates = 20;
    /// Worker threads; 0 means hardware concurrency.
    unsigned threads = 0;
    /// Settle length for relative_change; defaults to the window length.
    std::optional<Index> settle;
};

/// Replicate k of every cell uses seed base.seed + k.
RelativeChangeGrid sweep_single(const ScenarioSpec& base, Axis axis, const std::vector<double>& values,
                                const StreamConfig& config, const SweepOptions& options = {});

/// Supported pairs: (q2, sigma2), (rho2, sigma2), (q2, rho2).
RelativeChangeGrid sweep_joint(const ScenarioSpec& base, Axis axis1, const std::vector<double>& values1,
                               Axis axis2, const std::vector<double>& values2,
                               const StreamConfig& config, const SweepOptions& options = {});

/// Runs `replicates` copies of one scenario (seeds base.seed + k).
std::vector<LambdaTrace> run_replicates(const ScenarioSpec& spec, const StreamConfig& config,
                                        int replicates, unsigned threads = 0);

/// CSV: time,replicate,lambda
void write_traces_csv(std::ostream& out, const std::vector<LambdaTrace>& traces);
/// CSV: <axis1>,<axis1>_ratio[,<axis2>,<axis2>_ratio],mean_ratio,stderr,replicates
void write_grid_csv(std::ostream& out, const RelativeChangeGrid& grid);

std::string format_double(double value);

}  // namespace tvlasso

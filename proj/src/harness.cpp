#include "tvlasso/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ostream>

#include "parallel.hpp"

namespace tvlasso {

const char* to_string(Method method) noexcept {
    switch (method) {
        case Method::bic_window: return "bic";
        case Method::gcv_window: return "gcv";
        case Method::rap: return "rap";
    }
    return "unknown";
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double mean_of(const std::vector<double>& v, std::size_t first, std::size_t last) {
    double sum = 0.0;
    for (std::size_t i = first; i < last; ++i) sum += v[i];
    return sum / static_cast<double>(last - first);
}

struct Levels {
    double before;
    double after;
    std::size_t cp_pos;
};

// Pre-change mean over [cp - settle, cp) and post-change mean over
// [cp + settle, end], located by time value.
Levels change_levels(const LambdaTrace& trace, Index change_point, Index settle) {
    require(!trace.times.empty() && trace.times.size() == trace.values.size(), "malformed trace");
    require(settle >= 1, "settle must be at least 1");
    const Index start = trace.times.front();
    const Index end = trace.times.back();
    require(change_point - settle >= start,
            "change point minus settle falls before the trace start");
    require(change_point + 2 * settle <= end, "change point plus twice settle exceeds the trace end");
    const auto pos = [&](Index t) {
        auto it = std::lower_bound(trace.times.begin(), trace.times.end(), t);
        return static_cast<std::size_t>(it - trace.times.begin());
    };
    const std::size_t cp = pos(change_point);
    return {mean_of(trace.values, pos(change_point - settle), cp),
            mean_of(trace.values, pos(change_point + settle), trace.values.size()), cp};
}

}  // namespace

Method parse_method(const std::string& name) {
    const std::string n = lower(name);
    if (n == "bic" || n == "bic_window") return Method::bic_window;
    if (n == "gcv" || n == "gcv_window") return Method::gcv_window;
    if (n == "rap") return Method::rap;
    fail(ErrorCode::invalid_argument, "unknown method '" + name + "' (expected bic, gcv or rap)");
}

void StreamConfig::validate() const {
    require(burn_in >= 2, "burn_in must be at least 2");
    if (method == Method::rap) {
        rap.validate();
    } else {
        require(window_length >= 2, "window_length must be at least 2");
        require(burn_in >= window_length, "burn_in must be at least window_length for windowed methods");
    }
}

LambdaTrace run_stream(const Matrix& predictors, const Vector& responses, const StreamConfig& config) {
    config.validate();
    const Index n = predictors.rows();
    require(responses.size() == n, "responses do not match predictor rows");
    require(n > config.burn_in, "stream length " + std::to_string(n) + " must exceed burn_in " +
                                    std::to_string(config.burn_in));

    LambdaTrace trace;
    trace.method = config.method;
    trace.times.reserve(static_cast<std::size_t>(n - config.burn_in));
    trace.values.reserve(trace.times.capacity());

    Index t = config.burn_in;
    try {
        if (config.method == Method::rap) {
            RapState state = rap_init(predictors.topRows(config.burn_in),
                                      responses.head(config.burn_in), config.rap);
            for (; t < n; ++t) {
                state = rap_step(state, predictors.row(t).transpose(), responses(t)).state;
                trace.times.push_back(t);
                trace.values.push_back(state.lambda);
            }
        } else {
            const Criterion criterion =
                config.method == Method::bic_window ? Criterion::bic : Criterion::gcv;
            const Index w = config.window_length;
            for (; t < n; ++t) {
                const Index first = t - w + 1;
                const auto window = ObservationWindow::unit(predictors.middleRows(first, w),
                                                            responses.segment(first, w));
                trace.times.push_back(t);
                trace.values.push_back(select_lambda(window, config.grid, criterion, config.solver).lambda);
            }
        }
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.lambda(), "t=" + std::to_string(t) + ": " + e.what());
    } catch (const Error& e) {
        throw Error(e.code(), "t=" + std::to_string(t) + ": " + e.what());
    }
    return trace;
}

LambdaTrace run_stream(const SyntheticDataset& data, const StreamConfig& config) {
    return run_stream(data.predictors, data.responses, config);
}

LambdaTrace average_traces(const std::vector<LambdaTrace>& traces) {
    require(!traces.empty(), "cannot average an empty set of traces");
    const LambdaTrace& first = traces.front();
    LambdaTrace out;
    out.times = first.times;
    out.method = first.method;
    out.normalized = first.normalized;
    out.values.assign(first.size(), 0.0);
    for (const auto& tr : traces) {
        require(tr.times == first.times, "traces have mismatched time axes");
        require(tr.method == first.method, "traces come from different methods");
        require(tr.values.size() == tr.times.size(), "malformed trace");
        for (std::size_t i = 0; i < tr.values.size(); ++i) out.values[i] += tr.values[i];
    }
    for (double& v : out.values) v /= static_cast<double>(traces.size());
    return out;
}

LambdaTrace normalize_unit_interval(const LambdaTrace& trace) {
    require(!trace.values.empty(), "cannot normalize an empty trace");
    const auto [lo, hi] = std::minmax_element(trace.values.begin(), trace.values.end());
    const double min = *lo;
    const double range = *hi - *lo;
    if (!(range > 0.0)) fail(ErrorCode::degenerate, "cannot normalize a constant trace");
    LambdaTrace out = trace;
    for (double& v : out.values) v = (v - min) / range;
    out.normalized = true;
    return out;
}

double relative_change(const LambdaTrace& trace, Index change_point, Index settle) {
    const Levels lv = change_levels(trace, change_point, settle);
    if (lv.before == 0.0) fail(ErrorCode::undefined_ratio, "pre-change lambda level is zero");
    return lv.after / lv.before;
}

std::optional<Index> time_to_fraction(const LambdaTrace& trace, Index change_point, Index settle,
                                      double fraction) {
    const Levels lv = change_levels(trace, change_point, settle);
    const double span = lv.after - lv.before;
    if (span == 0.0) return Index{0};
    for (std::size_t i = lv.cp_pos; i < trace.values.size(); ++i) {
        if ((trace.values[i] - lv.before) / span >= fraction) return trace.times[i] - change_point;
    }
    return std::nullopt;
}

const char* to_string(Axis axis) noexcept {
    switch (axis) {
        case Axis::sigma2: return "sigma2";
        case Axis::q2: return "q2";
        case Axis::rho2: return "rho2";
    }
    return "unknown";
}

Axis parse_axis(const std::string& name) {
    const std::string n = lower(name);
    if (n == "sigma2" || n == "sigma") return Axis::sigma2;
    if (n == "q2" || n == "q") return Axis::q2;
    if (n == "rho2" || n == "rho") return Axis::rho2;
    fail(ErrorCode::invalid_argument, "unknown sweep axis '" + name + "' (expected sigma2, q2 or rho2)");
}

ScenarioSpec apply_axis(const ScenarioSpec& base, Axis axis, double value) {
    ScenarioSpec s = base;
    switch (axis) {
        case Axis::sigma2:
            require(std::isfinite(value) && value > 0.0, "sigma2 must be positive");
            s.schedule.sigma_post = value;
            break;
        case Axis::q2: {
            require(value == std::floor(value) && value >= 0.0 && value <= static_cast<double>(base.p),
                    "q2 must be an integer in [0, p]");
            s.schedule.beta_post = ones_beta(base.p, static_cast<Index>(value));
            break;
        }
        case Axis::rho2:
            require(std::abs(value) < 1.0, "rho2 must satisfy |rho2| < 1");
            s.schedule.rho_post = value;
            break;
    }
    return s;
}

double axis_ratio(const ScenarioSpec& base, Axis axis, double value) {
    double pre = 0.0;
    switch (axis) {
        case Axis::sigma2: pre = base.schedule.sigma_pre; break;
        case Axis::q2: {
            Index nonzero = 0;
            for (Index j = 0; j < base.schedule.beta_pre.size(); ++j)
                nonzero += base.schedule.beta_pre(j) != 0.0 ? 1 : 0;
            pre = static_cast<double>(nonzero);
            break;
        }
        case Axis::rho2: pre = base.schedule.rho_pre; break;
    }
    if (pre == 0.0) fail(ErrorCode::undefined_ratio, std::string("pre-change value of ") + to_string(axis) + " is zero");
    return value / pre;
}

std::vector<LambdaTrace> run_replicates(const ScenarioSpec& spec, const StreamConfig& config,
                                        int replicates, unsigned threads) {
    require(replicates >= 1, "replicates must be at least 1");
    spec.validate();
    config.validate();
    std::vector<LambdaTrace> traces(static_cast<std::size_t>(replicates));
    detail::parallel_for(traces.size(), threads, [&](std::size_t k) {
        ScenarioSpec s = spec;
        s.seed = spec.seed + k;
        traces[k] = run_stream(generate(s), config);
        traces[k].replicate = static_cast<int>(k);
    });
    return traces;
}

namespace {

SweepAxis make_axis(const ScenarioSpec& base, Axis axis, const std::vector<double>& values) {
    require(!values.empty(), std::string("sweep axis ") + to_string(axis) + " has no values");
    SweepAxis a{axis, values, {}};
    for (double v : values) a.ratios.push_back(axis_ratio(base, axis, v));
    return a;
}

RelativeChangeGrid run_grid(const ScenarioSpec& base, SweepAxis axis1, std::optional<SweepAxis> axis2,
                            const StreamConfig& config, const SweepOptions& options) {
    require(options.replicates >= 1, "replicates must be at least 1");
    config.validate();
    const Index settle = options.settle.value_or(config.window_length);

    const std::size_t n1 = axis1.values.size();
    const std::size_t n2 = axis2 ? axis2->values.size() : 1;
    const auto reps = static_cast<std::size_t>(options.replicates);

    std::vector<ScenarioSpec> cells;
    cells.reserve(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            ScenarioSpec s = apply_axis(base, axis1.axis, axis1.values[i]);
            if (axis2) s = apply_axis(s, axis2->axis, axis2->values[j]);
            s.validate();
            cells.push_back(std::move(s));
        }
    }

    std::vector<LambdaTrace> traces(cells.size() * reps);
    detail::parallel_for(traces.size(), options.threads, [&](std::size_t job) {
        ScenarioSpec s = cells[job / reps];
        const std::size_t k = job % reps;
        s.seed = base.seed + k;
        traces[job] = run_stream(generate(s), config);
        traces[job].replicate = static_cast<int>(k);
    });

    RelativeChangeGrid grid;
    grid.axis1 = std::move(axis1);
    grid.axis2 = std::move(axis2);
    grid.replicates = options.replicates;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto first = traces.begin() + static_cast<std::ptrdiff_t>(c * reps);
        const std::vector<LambdaTrace> group(first, first + static_cast<std::ptrdiff_t>(reps));
        const Index cp = cells[c].schedule.change_point;
        grid.mean_ratio.push_back(relative_change(average_traces(group), cp, settle));

        std::vector<double> ratios;
        for (const auto& tr : group) ratios.push_back(relative_change(tr, cp, settle));
        double se = 0.0;
        if (ratios.size() > 1) {
            const double m = mean_of(ratios, 0, ratios.size());
            double ss = 0.0;
            for (double r : ratios) ss += (r - m) * (r - m);
            const auto k = static_cast<double>(ratios.size());
            se = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
        }
        grid.stderr_ratio.push_back(se);
    }
    return grid;
}

}  // namespace

RelativeChangeGrid sweep_single(const ScenarioSpec& base, Axis axis, const std::vector<double>& values,
                                const StreamConfig& config, const SweepOptions& options) {
    base.validate();
    return run_grid(base, make_axis(base, axis, values), std::nullopt, config, options);
}

RelativeChangeGrid sweep_joint(const ScenarioSpec& base, Axis axis1, const std::vector<double>& values1,
                               Axis axis2, const std::vector<double>& values2,
                               const StreamConfig& config, const SweepOptions& options) {
    base.validate();
    const bool supported = (axis1 == Axis::q2 && axis2 == Axis::sigma2) ||
                           (axis1 == Axis::rho2 && axis2 == Axis::sigma2) ||
                           (axis1 == Axis::q2 && axis2 == Axis::rho2);
    require(supported, std::string("unsupported joint sweep (") + to_string(axis1) + ", " +
                           to_string(axis2) + "); expected (q2, sigma2), (rho2, sigma2) or (q2, rho2)");
    return run_grid(base, make_axis(base, axis1, values1), make_axis(base, axis2, values2), config, options);
}

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_traces_csv(std::ostream& out, const std::vector<LambdaTrace>& traces) {
    out << "time,replicate,lambda\n";
    for (const auto& tr : traces) {
        const std::string rep = tr.replicate ? std::to_string(*tr.replicate) : "averaged";
        for (std::size_t i = 0; i < tr.values.size(); ++i)
            out << tr.times[i] << ',' << rep << ',' << format_double(tr.values[i]) << '\n';
    }
}

void write_grid_csv(std::ostream& out, const RelativeChangeGrid& grid) {
    const std::string a1 = to_string(grid.axis1.axis);
    out << a1 << ',' << a1 << "_ratio,";
    if (grid.axis2) {
        const std::string a2 = to_string(grid.axis2->axis);
        out << a2 << ',' << a2 << "_ratio,";
    }
    out << "mean_ratio,stderr,replicates\n";
    for (std::size_t i = 0; i < grid.axis1.values.size(); ++i) {
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            out << format_double(grid.axis1.values[i]) << ',' << format_double(grid.axis1.ratios[i]) << ',';
            if (grid.axis2)
                out << format_double(grid.axis2->values[j]) << ',' << format_double(grid.axis2->ratios[j]) << ',';
            const std::size_t c = i * grid.cols() + j;
            out << format_double(grid.mean_ratio[c]) << ',' << format_double(grid.stderr_ratio[c]) << ','
                << grid.replicates << '\n';
        }
    }
}

}  // namespace tvlasso

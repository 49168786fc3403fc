#include "tvlasso/run.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tvlasso {

namespace fs = std::filesystem;
using Resolved = std::map<std::string, std::string>;

const char* to_string(Command command) noexcept {
    switch (command) {
        case Command::simulate: return "simulate";
        case Command::sweep: return "sweep";
        case Command::stream: return "stream";
    }
    return "unknown";
}

Command parse_command(const std::string& name) {
    if (name == "simulate") return Command::simulate;
    if (name == "sweep") return Command::sweep;
    if (name == "stream") return Command::stream;
    fail(ErrorCode::invalid_argument, "unknown command '" + name + "' (expected simulate, sweep or stream)");
}

namespace {

const std::set<std::string>& common_keys() {
    static const std::set<std::string> keys{
        "seed", "replicates", "method", "window", "burn_in", "grid_size", "grid_min", "tol",
        "max_iter", "settle", "rap_forgetting", "rap_step_scale", "rap_step", "rap_floor_scale",
        "rap_floor", "rap_log_space"};
    return keys;
}

const std::set<std::string>& scenario_keys() {
    static const std::set<std::string> keys{"n", "p", "change_point", "sigma1", "sigma2", "rho1",
                                            "rho2", "q1", "q2", "beta1", "beta2"};
    return keys;
}

const std::set<std::string>& sweep_keys() {
    static const std::set<std::string> keys{"axis", "values", "axis2", "values2"};
    return keys;
}

const std::set<std::string>& stream_keys() {
    static const std::set<std::string> keys{"data", "delimiter", "header", "missing", "index_column",
                                            "log_returns"};
    return keys;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lookup(const Resolved& r, const std::string& key) {
    const auto it = r.find(key);
    if (it == r.end()) fail(ErrorCode::internal, "missing resolved key '" + key + "'");
    return it->second;
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const std::string t = trim(text);
    const char* begin = t.data();
    if (!t.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
        fail(ErrorCode::invalid_argument, "config key '" + key + "': '" + text + "' is not a finite number");
    return v;
}

long to_long(const std::string& key, const std::string& text) {
    long v = 0;
    const std::string t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        fail(ErrorCode::invalid_argument, "config key '" + key + "': '" + text + "' is not an integer");
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    fail(ErrorCode::invalid_argument, "config key '" + key + "': '" + text + "' is not a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    require(!out.empty(), "config key '" + key + "' needs at least one value");
    return out;
}

double num(const Resolved& r, const std::string& key) { return to_double(key, lookup(r, key)); }
long integer(const Resolved& r, const std::string& key) { return to_long(key, lookup(r, key)); }
bool flag(const Resolved& r, const std::string& key) { return to_bool(key, lookup(r, key)); }

std::string default_values(Axis axis) {
    switch (axis) {
        case Axis::sigma2: return "1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2";
        case Axis::q2: return "6,7,8,9,10,15";
        case Axis::rho2: return "0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    }
    return {};
}

Vector beta_from(const Resolved& r, const std::string& list_key, const std::string& q_key, Index p) {
    const std::string listed = lookup(r, list_key);
    if (!trim(listed).empty()) {
        const std::vector<double> v = to_list(list_key, listed);
        require(static_cast<Index>(v.size()) == p,
                "config key '" + list_key + "' must list exactly p=" + std::to_string(p) + " values");
        return Eigen::Map<const Vector>(v.data(), p);
    }
    return ones_beta(p, integer(r, q_key));
}

std::string csv_of(const std::vector<LambdaTrace>& traces) {
    std::ostringstream out;
    write_traces_csv(out, traces);
    return out.str();
}

nlohmann::json manifest_base(Command command, const Resolved& resolved) {
    nlohmann::json m;
    m["tool"] = "tvlasso";
    m["version"] = "0.1.0";
    m["command"] = to_string(command);
    m["config"] = resolved;
    return m;
}

nlohmann::json seed_list(const Resolved& resolved) {
    nlohmann::json seeds = nlohmann::json::array();
    const long base = integer(resolved, "seed");
    const long reps = integer(resolved, "replicates");
    for (long k = 0; k < reps; ++k) seeds.push_back(base + k);
    return seeds;
}

void finish(RunResult& result, nlohmann::json manifest) {
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& f : result.files) outputs.push_back(f.name);
    manifest["outputs"] = outputs;
    result.files.push_back({"manifest.json", manifest.dump(2) + "\n"});
}

unsigned threads_of(const RunConfig& config) {
    const auto t = config.get("threads");
    if (!t) return 0;
    const long v = to_long("threads", *t);
    require(v >= 0, "threads must be nonnegative");
    return static_cast<unsigned>(v);
}

RunResult do_simulate(const Resolved& r, unsigned threads) {
    const ScenarioSpec spec = scenario_from_config(r);
    const StreamConfig cfg = stream_config_from(r);
    const auto reps = static_cast<int>(integer(r, "replicates"));
    require(reps >= 1, "replicates must be at least 1");

    std::vector<LambdaTrace> traces = run_replicates(spec, cfg, reps, threads);
    LambdaTrace avg = average_traces(traces);
    const LambdaTrace norm = normalize_unit_interval(avg);
    traces.push_back(avg);

    nlohmann::json manifest = manifest_base(Command::simulate, r);
    manifest["seeds"] = seed_list(r);
    const Index settle = integer(r, "settle");
    const Index cp = spec.schedule.change_point;
    nlohmann::json summary;
    summary["relative_change"] = nullptr;
    summary["time_to_90"] = nullptr;
    const bool measurable = !avg.times.empty() && cp - settle >= avg.times.front() &&
                            cp + 2 * settle <= avg.times.back() && settle >= 1;
    if (measurable) {
        summary["relative_change"] = relative_change(avg, cp, settle);
        if (auto ttf = time_to_fraction(avg, cp, settle, 0.9)) summary["time_to_90"] = *ttf;
    }
    manifest["summary"] = summary;

    RunResult result;
    result.files.push_back({"trace.csv", csv_of(traces)});
    result.files.push_back({"trace_normalized.csv", csv_of({norm})});
    finish(result, std::move(manifest));
    return result;
}

RunResult do_sweep(const Resolved& r, unsigned threads) {
    const ScenarioSpec base = scenario_from_config(r);
    const StreamConfig cfg = stream_config_from(r);
    SweepOptions opt;
    opt.replicates = static_cast<int>(integer(r, "replicates"));
    opt.threads = threads;
    opt.settle = integer(r, "settle");

    const Axis a1 = parse_axis(lookup(r, "axis"));
    const std::vector<double> v1 = to_list("values", lookup(r, "values"));
    RelativeChangeGrid grid;
    if (r.count("axis2") != 0) {
        const Axis a2 = parse_axis(lookup(r, "axis2"));
        grid = sweep_joint(base, a1, v1, a2, to_list("values2", lookup(r, "values2")), cfg, opt);
    } else {
        grid = sweep_single(base, a1, v1, cfg, opt);
    }
    std::ostringstream csv;
    write_grid_csv(csv, grid);

    nlohmann::json manifest = manifest_base(Command::sweep, r);
    manifest["seeds"] = seed_list(r);
    RunResult result;
    result.files.push_back({"grid.csv", csv.str()});
    finish(result, std::move(manifest));
    return result;
}

RunResult do_stream(const Resolved& r, unsigned threads) {
    const std::string path = lookup(r, "data");
    require(!path.empty(), "stream needs a data file (config key 'data' or --data)");
    const MultivariateSeries series = load_csv(path, csv_options_from(r));
    const StreamConfig cfg = stream_config_from(r);
    const NodewiseResult res = nodewise_stream(series, cfg, threads);

    nlohmann::json manifest = manifest_base(Command::stream, r);
    manifest["seeds"] = nlohmann::json::array();
    nlohmann::json nodes = nlohmann::json::array();
    RunResult result;
    for (std::size_t j = 0; j < res.per_node.size(); ++j) {
        const std::string name = "node_" + std::to_string(j) + ".csv";
        result.files.push_back({name, csv_of({res.per_node[j]})});
        nodes.push_back({{"label", series.labels[j]}, {"file", name}});
    }
    result.files.push_back({"averaged_normalized.csv", csv_of({res.averaged_normalized})});
    manifest["nodes"] = nodes;
    manifest["rows"] = series.rows();
    finish(result, std::move(manifest));
    return result;
}

}  // namespace

bool RunConfig::is_known_key(const std::string& key) {
    return key == "threads" || common_keys().count(key) || scenario_keys().count(key) ||
           sweep_keys().count(key) || stream_keys().count(key);
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    require(is_known_key(k), "unknown config key '" + k + "'");
    entries_[k] = trim(value);
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::parse, source + ": line " + std::to_string(line_no) + " is not 'key = value'");
        try {
            cfg.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const Error& e) {
            fail(ErrorCode::parse, source + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
        std::istringstream ss(text);
        return parse(ss, path);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, path + ": invalid manifest JSON: " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object())
        fail(ErrorCode::parse, path + ": manifest has no \"config\" object");
    RunConfig cfg;
    for (const auto& [key, value] : doc["config"].items()) {
        if (!value.is_string()) fail(ErrorCode::parse, path + ": manifest value for '" + key + "' is not a string");
        cfg.set(key, value.get<std::string>());
    }
    if (doc.contains("command") && doc["command"].is_string())
        cfg.manifest_command_ = parse_command(doc["command"].get<std::string>());
    return cfg;
}

std::map<std::string, std::string> resolve_config(Command command, const RunConfig& config) {
    Resolved r;
    const auto pick = [&](const std::string& key, const std::string& fallback) {
        r[key] = config.get(key).value_or(fallback);
    };
    pick("seed", "0");
    pick("replicates", command == Command::stream ? "1" : "20");
    pick("method", "bic");
    pick("window", "50");
    pick("burn_in", "50");
    pick("grid_size", "100");
    pick("grid_min", "0.001");
    pick("tol", "1e-08");
    pick("max_iter", "10000");
    pick("settle", r["window"]);
    pick("rap_forgetting", "0.95");
    pick("rap_step_scale", "0.2");
    pick("rap_step", "");
    pick("rap_floor_scale", "1e-06");
    pick("rap_floor", "");
    pick("rap_log_space", "false");

    if (command == Command::simulate || command == Command::sweep) {
        pick("n", "400");
        pick("p", "20");
        pick("change_point", "200");
        pick("sigma1", "1");
        pick("sigma2", r["sigma1"]);
        pick("rho1", "0.5");
        pick("rho2", r["rho1"]);
        pick("q1", "5");
        pick("q2", r["q1"]);
        pick("beta1", "");
        pick("beta2", "");
    }
    if (command == Command::sweep) {
        pick("axis", "sigma2");
        pick("values", default_values(parse_axis(r["axis"])));
        if (config.get("axis2")) {
            pick("axis2", "");
            pick("values2", default_values(parse_axis(r["axis2"])));
        } else {
            require(!config.get("values2"), "config key 'values2' needs 'axis2'");
        }
    }
    if (command == Command::stream) {
        pick("data", "");
        pick("delimiter", ",");
        pick("header", "true");
        pick("missing", "strict");
        pick("index_column", "false");
        pick("log_returns", "false");
        // Streams carry no randomness; the replicate count is fixed.
        require(r["replicates"] == "1", "stream runs have exactly one replicate");
    }
    return r;
}

ScenarioSpec scenario_from_config(const Resolved& r) {
    ScenarioSpec s;
    s.n = integer(r, "n");
    s.p = integer(r, "p");
    require(s.p >= 1, "p must be at least 1");
    s.seed = static_cast<std::uint64_t>(integer(r, "seed"));
    require(integer(r, "seed") >= 0, "seed must be nonnegative");
    auto& sch = s.schedule;
    sch.change_point = integer(r, "change_point");
    sch.sigma_pre = num(r, "sigma1");
    sch.sigma_post = num(r, "sigma2");
    sch.rho_pre = num(r, "rho1");
    sch.rho_post = num(r, "rho2");
    sch.beta_pre = beta_from(r, "beta1", "q1", s.p);
    sch.beta_post = beta_from(r, "beta2", "q2", s.p);
    s.validate();
    return s;
}

StreamConfig stream_config_from(const Resolved& r) {
    StreamConfig c;
    c.method = parse_method(lookup(r, "method"));
    c.window_length = integer(r, "window");
    c.burn_in = integer(r, "burn_in");
    const long grid_size = integer(r, "grid_size");
    require(grid_size >= 1, "grid_size must be at least 1");
    c.grid = LambdaGrid::relative_log_spaced(static_cast<std::size_t>(grid_size), num(r, "grid_min"));
    c.solver.tol = num(r, "tol");
    c.solver.max_iter = static_cast<int>(integer(r, "max_iter"));
    c.rap.forgetting = num(r, "rap_forgetting");
    c.rap.step_scale = num(r, "rap_step_scale");
    if (!lookup(r, "rap_step").empty()) c.rap.step_size = num(r, "rap_step");
    c.rap.floor_scale = num(r, "rap_floor_scale");
    if (!lookup(r, "rap_floor").empty()) c.rap.lambda_floor = num(r, "rap_floor");
    c.rap.log_space = flag(r, "rap_log_space");
    c.rap.grid = c.grid;
    c.rap.solver = c.solver;
    require(integer(r, "settle") >= 1, "settle must be at least 1");
    c.validate();
    return c;
}

CsvOptions csv_options_from(const Resolved& r) {
    CsvOptions o;
    const std::string d = lookup(r, "delimiter");
    if (d == "tab" || d == "\\t") {
        o.delimiter = '\t';
    } else {
        require(d.size() == 1, "delimiter must be a single character or 'tab'");
        o.delimiter = d[0];
    }
    o.header = flag(r, "header");
    o.missing = parse_missing_policy(lookup(r, "missing"));
    o.index_column = flag(r, "index_column");
    o.log_returns = flag(r, "log_returns");
    return o;
}

RunResult run_command(Command command, const RunConfig& config) {
    if (config.manifest_command() && *config.manifest_command() != command)
        fail(ErrorCode::invalid_argument, std::string("manifest was written by '") +
                                              to_string(*config.manifest_command()) + "', not '" +
                                              to_string(command) + "'");
    const Resolved r = resolve_config(command, config);
    const unsigned threads = threads_of(config);
    switch (command) {
        case Command::simulate: return do_simulate(r, threads);
        case Command::sweep: return do_sweep(r, threads);
        case Command::stream: return do_stream(r, threads);
    }
    fail(ErrorCode::internal, "unhandled command");
}

void commit_outputs(const std::string& out_dir, const RunResult& result) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create output directory '" + out_dir + "': " + ec.message());

    std::vector<fs::path> temps;
    const auto cleanup = [&] {
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& f : result.files) {
        const fs::path tmp = fs::path(out_dir) / ("." + f.name + ".partial");
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << f.content;
        out.close();
        if (!out) {
            cleanup();
            fail(ErrorCode::io, "failed writing '" + tmp.string() + "'");
        }
    }
    for (std::size_t i = 0; i < temps.size(); ++i) {
        fs::rename(temps[i], fs::path(out_dir) / result.files[i].name, ec);
        if (ec) {
            cleanup();
            fail(ErrorCode::io, "failed to move '" + temps[i].string() + "' into place: " + ec.message());
        }
    }
}

}  // namespace tvlasso

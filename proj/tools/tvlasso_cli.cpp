// Command-line front end. Everything goes through the C API.
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvlasso/tvlasso.h"

namespace {

struct Flags {
    std::string config_path;
    std::string out_dir;
    std::optional<long> seed;
    std::optional<long> replicates;
    std::optional<std::string> method;
    std::optional<long> window;
    std::optional<long> burn_in;
    std::optional<long> threads;
    std::optional<std::string> data;
    std::optional<std::string> axis;
    std::optional<std::string> values;
    std::vector<std::string> overrides;
};

int report(tvl_status status, const std::string& command) {
    nlohmann::json err;
    err["error"] = tvl_status_string(status);
    err["message"] = tvl_last_error();
    if (!command.empty()) err["command"] = command;
    std::cerr << err.dump() << '\n';
    return static_cast<int>(status);
}

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& about, Flags& f) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("-c,--config", f.config_path, "key = value file or a previous manifest.json");
    sub->add_option("-o,--out", f.out_dir, "output directory")->required();
    sub->add_option("--seed", f.seed, "base seed; replicate k uses seed + k");
    sub->add_option("--replicates", f.replicates, "Monte Carlo replicates");
    sub->add_option("--method", f.method, "bic, gcv or rap");
    sub->add_option("--window", f.window, "sliding window length");
    sub->add_option("--burn-in", f.burn_in, "rows before the first recorded lambda");
    sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    sub->add_option("--set", f.overrides, "extra key=value setting (repeatable)");
    return sub;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tracks the selected Lasso penalty over streaming data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tvl_version()));

    Flags f;
    CLI::App* simulate = add_command(app, "simulate", "run replicated change-point simulations", f);
    CLI::App* sweep = add_command(app, "sweep", "relative-change grid over scenario parameters", f);
    sweep->add_option("--axis", f.axis, "sigma2, q2 or rho2");
    sweep->add_option("--values", f.values, "comma-separated axis values");
    CLI::App* stream = add_command(app, "stream", "node-wise tracking on a CSV panel", f);
    stream->add_option("--data", f.data, "input CSV file");

    CLI11_PARSE(app, argc, argv);

    std::string command;
    for (CLI::App* sub : {simulate, sweep, stream})
        if (sub->parsed()) command = sub->get_name();

    tvl_config* raw = nullptr;
    tvl_status st = f.config_path.empty() ? tvl_config_create(&raw) : tvl_config_load(f.config_path.c_str(), &raw);
    if (st != TVL_OK) return report(st, command);
    std::unique_ptr<tvl_config, decltype(&tvl_config_destroy)> cfg(raw, tvl_config_destroy);

    std::vector<std::pair<std::string, std::string>> settings;
    if (f.seed) settings.emplace_back("seed", std::to_string(*f.seed));
    if (f.replicates) settings.emplace_back("replicates", std::to_string(*f.replicates));
    if (f.method) settings.emplace_back("method", *f.method);
    if (f.window) settings.emplace_back("window", std::to_string(*f.window));
    if (f.burn_in) settings.emplace_back("burn_in", std::to_string(*f.burn_in));
    if (f.threads) settings.emplace_back("threads", std::to_string(*f.threads));
    if (f.data) settings.emplace_back("data", *f.data);
    if (f.axis) settings.emplace_back("axis", *f.axis);
    if (f.values) settings.emplace_back("values", *f.values);
    for (const std::string& kv : f.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            nlohmann::json err{{"error", "invalid_argument"},
                               {"message", "--set expects key=value, got '" + kv + "'"},
                               {"command", command}};
            std::cerr << err.dump() << '\n';
            return static_cast<int>(TVL_INVALID_ARGUMENT);
        }
        settings.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, value] : settings) {
        st = tvl_config_set(cfg.get(), key.c_str(), value.c_str());
        if (st != TVL_OK) return report(st, command);
    }

    st = tvl_run(cfg.get(), command.c_str(), f.out_dir.c_str());
    if (st != TVL_OK) return report(st, command);
    std::cout << "wrote " << f.out_dir << '\n';
    return 0;
}

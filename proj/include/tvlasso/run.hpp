#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvlasso/data_io.hpp"
#include "tvlasso/harness.hpp"

namespace tvlasso {

enum class Command { simulate, sweep, stream };

const char* to_string(Command command) noexcept;
Command parse_command(const std::string& name);

/// Flat key = value configuration. Unknown keys are rejected; later set()
/// calls override earlier ones, so command-line flags are applied last.
class RunConfig {
public:
    /// `key = value` lines; '#' starts a comment.
    static RunConfig parse(std::istream& in, const std::string& source = "<config>");
    /// Key-value file, or a JSON run manifest (its "config" object).
    static RunConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& key) const;
    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

    /// Command recorded in a loaded manifest, if any.
    const std::optional<Command>& manifest_command() const noexcept { return manifest_command_; }

    static bool is_known_key(const std::string& key);

private:
    std::map<std::string, std::string> entries_;
    std::optional<Command> manifest_command_;
};

struct OutputFile {
    std::string name;
    std::string content;
};

/// Everything a run produces, manifest.json included, held in memory until
/// commit_outputs writes it.
struct RunResult {
    std::vector<OutputFile> files;
};

/// Resolved settings; every default is made explicit so the manifest alone
/// reproduces the run.
std::map<std::string, std::string> resolve_config(Command command, const RunConfig& config);

ScenarioSpec scenario_from_config(const std::map<std::string, std::string>& resolved);
StreamConfig stream_config_from(const std::map<std::string, std::string>& resolved);
CsvOptions csv_options_from(const std::map<std::string, std::string>& resolved);

RunResult run_command(Command command, const RunConfig& config);

/// Writes every file under a temporary name, then renames them into place.
/// Nothing is left behind in `out_dir` on failure.
void commit_outputs(const std::string& out_dir, const RunResult& result);

}  // namespace tvlasso

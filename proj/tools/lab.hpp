#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "statlab/errors.hpp"

namespace statlab::lab {

using nlohmann::json;

inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitPrecondition = 3,
    kExitResource = 4,
    kExitInconclusive = 5,
};

/// Schema violation at a JSON pointer into the config.
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& what)
        : Error("config error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what),
          pointer_(std::move(pointer)) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

/// Typed, pointer-tracking access to one JSON object of the config.
class ConfigReader {
public:
    explicit ConfigReader(const json& node, std::string pointer = "");

    const json& node() const noexcept { return *node_; }
    const std::string& pointer() const noexcept { return pointer_; }
    std::string pointer(std::string_view key) const;

    bool has(std::string_view key) const;
    ConfigReader child(std::string_view key) const;
    const json& raw(std::string_view key) const;

    long integer(std::string_view key) const;
    long integer(std::string_view key, long fallback) const;
    double number(std::string_view key) const;
    double number(std::string_view key, double fallback) const;
    std::string string(std::string_view key) const;
    std::string string(std::string_view key, std::string fallback) const;
    bool boolean(std::string_view key, bool fallback) const;
    std::uint64_t seed() const;

    /// Rejects keys outside `allowed`.
    void allow_only(std::initializer_list<std::string_view> allowed) const;

    [[noreturn]] void fail(std::string_view key, const std::string& what) const;

private:
    const json* node_;
    std::string pointer_;
};

/// One CSV table, rendered with a leading "# description" line and a header.
class CsvTable {
public:
    CsvTable(std::string description, std::vector<std::string> header);
    CsvTable& row(std::vector<std::string> cells);
    std::string render() const;

private:
    std::string description_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Shortest-roundtrip-safe rendering, {:.17g}.
std::string num(double x);
std::string num(long x);
std::string num(std::size_t x);

struct OutputFile {
    std::string name;     // relative to the output directory
    std::string content;
};

struct ExperimentResult {
    std::vector<OutputFile> files;
    int status = kExitOk;
    std::string note;
};

struct OutputRecord {
    std::string path;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string artifact_version = kArtifactVersion;
    std::string experiment;
    std::string anchor;
    std::string config_hash;
    json config;
    std::vector<OutputRecord> outputs;
    double wall_clock = 0.0;
    int status = kExitOk;
    std::string note;

    json to_json() const;
    static RunManifest from_json(const json& j);
};

struct RunOptions {
    std::filesystem::path out_dir = ".";
    unsigned threads = 0;
    std::optional<std::uint64_t> seed_override;
};

/// Experiment names accepted in the "experiment" field.
const std::vector<std::string>& experiment_names();
/// Description cited in the leading comment line of each CSV it writes.
std::string experiment_anchor(const std::string& experiment);

/// Validates the config, applies the seed override, runs the experiment,
/// writes every output atomically and then manifest.json. Library errors
/// propagate; inconclusive outcomes are reported in the manifest status.
RunManifest run(json config, const RunOptions& opts);

struct VerifyResult {
    bool ok = false;
    std::vector<std::string> notes;
};

/// Recomputes the checksum of every output listed in the manifest.
VerifyResult verify(const std::filesystem::path& manifest_path);

/// Exit code for an exception raised by run().
int exit_code_for(const std::exception& e);

std::string sha256_hex(std::string_view data);
/// Writes to a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Dispatch used by run(); `cfg` is the whole validated config object.
ExperimentResult run_experiment(const std::string& experiment, const ConfigReader& cfg);

} // namespace statlab::lab

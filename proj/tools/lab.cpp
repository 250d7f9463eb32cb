#include "lab.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "statlab/algebra.hpp"

namespace statlab::lab {

namespace fs = std::filesystem;

// ------------------------------------------------------------ ConfigReader

ConfigReader::ConfigReader(const json& node, std::string pointer) : node_(&node), pointer_(std::move(pointer))
{
    if (!node.is_object())
        throw ConfigError(pointer_, "expected an object");
}

std::string ConfigReader::pointer(std::string_view key) const
{
    return pointer_ + "/" + std::string(key);
}

bool ConfigReader::has(std::string_view key) const
{
    return node_->contains(std::string(key));
}

const json& ConfigReader::raw(std::string_view key) const
{
    if (!has(key))
        fail(key, "missing required field");
    return node_->at(std::string(key));
}

ConfigReader ConfigReader::child(std::string_view key) const
{
    const json& j = raw(key);
    if (!j.is_object())
        fail(key, "expected an object");
    return ConfigReader(j, pointer(key));
}

long ConfigReader::integer(std::string_view key) const
{
    const json& j = raw(key);
    if (!j.is_number_integer())
        fail(key, "expected an integer");
    return j.get<long>();
}

long ConfigReader::integer(std::string_view key, long fallback) const
{
    return has(key) ? integer(key) : fallback;
}

double ConfigReader::number(std::string_view key) const
{
    const json& j = raw(key);
    if (!j.is_number())
        fail(key, "expected a number");
    return j.get<double>();
}

double ConfigReader::number(std::string_view key, double fallback) const
{
    return has(key) ? number(key) : fallback;
}

std::string ConfigReader::string(std::string_view key) const
{
    const json& j = raw(key);
    if (!j.is_string())
        fail(key, "expected a string");
    return j.get<std::string>();
}

std::string ConfigReader::string(std::string_view key, std::string fallback) const
{
    return has(key) ? string(key) : fallback;
}

bool ConfigReader::boolean(std::string_view key, bool fallback) const
{
    if (!has(key))
        return fallback;
    const json& j = raw(key);
    if (!j.is_boolean())
        fail(key, "expected true or false");
    return j.get<bool>();
}

std::uint64_t ConfigReader::seed() const
{
    if (!has("seed"))
        fail("seed", "missing seed; randomized experiments need an explicit seed");
    const json& j = raw("seed");
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long>() >= 0))
        fail("seed", "expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

void ConfigReader::allow_only(std::initializer_list<std::string_view> allowed) const
{
    for (const auto& [key, value] : node_->items()) {
        bool ok = false;
        for (std::string_view a : allowed)
            ok = ok || a == key;
        if (!ok)
            fail(key, "unknown field");
    }
}

void ConfigReader::fail(std::string_view key, const std::string& what) const
{
    throw ConfigError(pointer(key), what);
}

// ------------------------------------------------------------------- CSV

CsvTable::CsvTable(std::string description, std::vector<std::string> header)
    : description_(std::move(description)), header_(std::move(header))
{
}

CsvTable& CsvTable::row(std::vector<std::string> cells)
{
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::render() const
{
    std::string out = "# " + description_ + "\n";
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return out;
}

std::string num(double x)
{
    return fmt::format("{:.17g}", x);
}

std::string num(long x)
{
    return std::to_string(x);
}

std::string num(std::size_t x)
{
    return std::to_string(x);
}

// ------------------------------------------------------------- files, hash

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

void write_atomic(const fs::path& path, std::string_view content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// -------------------------------------------------------------- manifest

json RunManifest::to_json() const
{
    json outs = json::array();
    for (const auto& o : outputs)
        outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    return {{"artifact_version", artifact_version},
            {"experiment", experiment},
            {"anchor", anchor},
            {"config_hash", config_hash},
            {"config", config},
            {"outputs", outs},
            {"wall_clock_seconds", wall_clock},
            {"status", status},
            {"note", note}};
}

RunManifest RunManifest::from_json(const json& j)
{
    RunManifest m;
    try {
        m.artifact_version = j.at("artifact_version").get<std::string>();
        m.experiment = j.at("experiment").get<std::string>();
        m.anchor = j.value("anchor", "");
        m.config_hash = j.at("config_hash").get<std::string>();
        m.config = j.value("config", json::object());
        for (const auto& o : j.at("outputs"))
            m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>(),
                                 o.at("bytes").get<std::uintmax_t>()});
        m.wall_clock = j.value("wall_clock_seconds", 0.0);
        m.status = j.value("status", 0);
        m.note = j.value("note", "");
    } catch (const json::exception& e) {
        throw MalformedInput(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

// ------------------------------------------------------------------ run

RunManifest run(json config, const RunOptions& opts)
{
    if (!config.is_object())
        throw ConfigError("", "config must be a JSON object");
    const ConfigReader top(config);
    const std::string experiment = top.string("experiment");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end())
        top.fail("experiment", "unknown experiment '" + experiment + "'");
    if (opts.seed_override) {
        if (config.contains("seed"))
            top.fail("seed", "config pins its seed; --seed-override refused");
        config["seed"] = *opts.seed_override;
    }
    if (opts.threads)
        set_default_threads(opts.threads);

    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult result = run_experiment(experiment, ConfigReader(config));
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    RunManifest m;
    m.experiment = experiment;
    m.anchor = experiment_anchor(experiment);
    m.config = config;
    m.config_hash = sha256_hex(config.dump());
    m.wall_clock = elapsed;
    m.status = result.status;
    m.note = result.note;
    fs::create_directories(opts.out_dir);
    for (const auto& f : result.files) {
        write_atomic(opts.out_dir / f.name, f.content);
        m.outputs.push_back({f.name, sha256_hex(f.content), f.content.size()});
    }
    write_atomic(opts.out_dir / "manifest.json", m.to_json().dump(2) + "\n");
    return m;
}

VerifyResult verify(const fs::path& manifest_path)
{
    VerifyResult r;
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        r.notes.push_back(std::string("manifest is not valid JSON: ") + e.what());
        return r;
    }
    const RunManifest m = RunManifest::from_json(j);
    r.ok = true;
    if (m.artifact_version != kArtifactVersion) {
        r.ok = false;
        r.notes.push_back("artifact version " + m.artifact_version + " differs from current " + kArtifactVersion);
    }
    if (m.config_hash != sha256_hex(m.config.dump())) {
        r.ok = false;
        r.notes.push_back("config hash does not match the recorded config");
    }
    const fs::path dir = manifest_path.parent_path();
    for (const auto& o : m.outputs) {
        const fs::path p = dir / o.path;
        if (!fs::exists(p)) {
            r.ok = false;
            r.notes.push_back("missing output " + o.path);
            continue;
        }
        if (sha256_hex(read_file(p)) != o.sha256) {
            r.ok = false;
            r.notes.push_back("checksum mismatch for " + o.path);
        }
    }
    return r;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const MalformedInput*>(&e) ||
        dynamic_cast<const ContextMismatch*>(&e))
        return kExitConfig;
    if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const DepthUnderflow*>(&e) ||
        dynamic_cast<const CoverageError*>(&e) || dynamic_cast<const UnresolvedError*>(&e))
        return kExitPrecondition;
    if (dynamic_cast<const ResourceLimitError*>(&e) || dynamic_cast<const ConvergenceError*>(&e))
        return kExitResource;
    if (dynamic_cast<const ConstructionError*>(&e))
        return kExitInconclusive;
    return kExitFailure;
}

} // namespace statlab::lab

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lab.hpp"

namespace lab = statlab::lab;
using lab::json;

namespace {

enum class Kind { Int, Num, Str, Measure, Element, File, Words, Amplitude };

struct Flag {
    const char* name;  // without leading dashes
    const char* key;   // config field
    Kind kind;
    const char* help;
};

const std::map<std::string, std::vector<Flag>> kFlags = {
    {"cesaro",
     {{"mu", "mu", Kind::Measure, "measure: uniform or a JSON file"},
      {"element", "element", Kind::Element, "a word or a JSON file"},
      {"n-max", "n_max", Kind::Int, "largest Cesaro index"},
      {"n-moments", "n_moments", Kind::Int, "moments per lower bound"}}},
    {"powers",
     {{"g", "g", Kind::Str, "word to average away"},
      {"eps", "eps", Kind::Num, "target bound"},
      {"strategy", "strategy", Kind::Str, "geometric or random"},
      {"max-n", "max_n", Kind::Int, "largest tuple size"},
      {"word-radius", "word_radius", Kind::Int, "radius of the candidate words w"},
      {"fixed-w", "fixed_w", Kind::Str, "use h_k = w^k for this w only"},
      {"radius", "radius", Kind::Int, "radius of random conjugators"},
      {"tries-per-n", "tries_per_n", Kind::Int, "random tuples per n"}}},
    {"build-mu",
     {{"family", "family", Kind::Words, "ballR or comma-separated words"},
      {"levels", "levels", Kind::Int, "truncation level L"}}},
    {"boundary-solve",
     {{"mu", "mu", Kind::Measure, "measure: uniform or a JSON file"},
      {"depth", "depth", Kind::Int, "output depth"},
      {"tol", "tol", Kind::Num, "step-change tolerance"},
      {"max-iter", "max_iter", Kind::Int, "iteration budget"},
      {"perturb", "perturbation", Kind::Amplitude, "relative amplitude of the seeded start perturbation"}}},
    {"conditional",
     {{"mu", "mu", Kind::Measure, "measure: uniform or a JSON file"},
      {"nu", "nu", Kind::Str, "uniform or hitting"},
      {"paths", "paths", Kind::Int, "paths for the Dirac test"},
      {"length", "length", Kind::Int, "path length n"},
      {"disintegration-paths", "disintegration_paths", Kind::Int, "paths for the average"}}},
    {"bnd-map",
     {{"mu", "mu", Kind::Measure, "measure: uniform or a JSON file"},
      {"paths", "paths", Kind::Int, "number of paths"},
      {"length", "length", Kind::Int, "path length"},
      {"min-depth", "min_depth", Kind::Int, "shortest accepted prefix"}}},
    {"fix-mass",
     {{"mu", "mu", Kind::Measure, "measure: uniform or a JSON file"},
      {"nu", "nu", Kind::Str, "uniform or hitting"},
      {"gens", "gens", Kind::Words, "ballR or comma-separated words"},
      {"depth", "depth", Kind::Int, "cylinder depth"},
      {"threshold", "threshold", Kind::Num, "freeness threshold"}}},
    {"srs-escape",
     {{"mu", "mu", Kind::Measure, "measure: uniform or a JSON file"},
      {"start", "start", Kind::Str, "generator of the starting subgroup (1 for trivial)"},
      {"steps", "steps", Kind::Int, "steps per chain"},
      {"trials", "trials", Kind::Int, "number of chains"},
      {"threshold", "threshold", Kind::Int, "root length threshold T"}}},
    {"pdf-check",
     {{"samples", "samples", Kind::Int, "number of subgroup samples"},
      {"tuples", "tuples", Kind::Int, "tuples per sample"},
      {"tuple-size", "tuple_size", Kind::Int, "words per tuple"}}},
    {"fdstates",
     {{"rep", "rep", Kind::File, "JSON file with generator permutations"},
      {"mu", "mu", Kind::Measure, "measure: uniform or a JSON file"},
      {"tol", "tol", Kind::Num, "stationarity tolerance"}}},
    {"norm",
     {{"element", "element", Kind::Element, "a word or a JSON file"},
      {"n-moments", "n_moments", Kind::Int, "number of trace moments"}}},
};

json convert(const Flag& f, const std::string& v)
{
    const std::string ptr = std::string("/") + f.key;
    try {
        switch (f.kind) {
        case Kind::Int: {
            std::size_t used = 0;
            const long x = std::stol(v, &used);
            if (used != v.size())
                break;
            return x;
        }
        case Kind::Num: {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size())
                break;
            return x;
        }
        case Kind::Amplitude:
            return json{{"amplitude", std::stod(v)}};
        case Kind::Str:
            return v;
        case Kind::Measure:
            return v == "uniform" ? json(v) : json{{"file", v}};
        case Kind::Element:
            return std::filesystem::exists(v) ? json{{"file", v}} : json(v);
        case Kind::File:
            return json{{"file", v}};
        case Kind::Words: {
            if (v.rfind("ball", 0) == 0)
                return v;
            json arr = json::array();
            std::size_t start = 0;
            while (start <= v.size()) {
                const std::size_t comma = v.find(',', start);
                arr.push_back(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
                if (comma == std::string::npos)
                    break;
                start = comma + 1;
            }
            return arr;
        }
        }
    } catch (const std::exception&) {
    }
    throw lab::ConfigError(ptr, "cannot read '" + v + "' from --" + f.name);
}

int report(const lab::RunManifest& m, const std::filesystem::path& out_dir)
{
    for (const auto& o : m.outputs)
        std::cout << (out_dir / o.path).string() << "  " << o.sha256 << "\n";
    std::cout << (out_dir / "manifest.json").string() << "\n";
    if (!m.note.empty())
        std::cout << m.experiment << ": " << m.note << "\n";
    return m.status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"stationary-lab: stationary measures, certified norms and averaging on free groups"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    unsigned threads = 0;
    std::optional<std::uint64_t> seed_override;
    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--out-dir", out_dir, "directory for outputs and manifest.json");
    app.add_option("--threads", threads, "worker threads (0 = default)");
    app.add_option("--seed-override", seed_override, "seed for configs that do not pin one");

    std::map<std::string, std::map<std::string, std::string>> given;
    std::map<std::string, std::optional<long>> rank;
    std::map<std::string, std::optional<std::uint64_t>> seed;
    std::map<std::string, std::string> out;
    for (const auto& [name, flags] : kFlags) {
        CLI::App* sub = app.add_subcommand(name, lab::experiment_anchor(name));
        for (const Flag& f : flags)
            sub->add_option(std::string("--") + f.name, given[name][f.key], f.help);
        sub->add_option("--rank", rank[name], "free group rank k");
        sub->add_option("--seed", seed[name], "seed stored in the config");
        sub->add_option("--out", out[name], "file name of the main CSV");
    }
    CLI::App* run_cmd = app.add_subcommand("run", "run the experiment named in --config");
    CLI::App* verify_cmd = app.add_subcommand("verify", "recompute the checksums listed in a manifest");
    std::string manifest_path;
    verify_cmd->add_option("manifest", manifest_path, "manifest.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify_cmd->parsed()) {
            const lab::VerifyResult v = lab::verify(manifest_path);
            for (const auto& n : v.notes)
                std::cout << n << "\n";
            std::cout << (v.ok ? "verify: true" : "verify: false") << "\n";
            return v.ok ? lab::kExitOk : lab::kExitFailure;
        }

        json config = json::object();
        if (!config_path.empty()) {
            try {
                config = json::parse(lab::read_file(config_path));
            } catch (const json::exception& e) {
                throw lab::ConfigError("", std::string("cannot parse config: ") + e.what());
            }
            if (!config.is_object())
                throw lab::ConfigError("", "config must be a JSON object");
        } else if (run_cmd->parsed()) {
            throw lab::ConfigError("", "run needs --config");
        }

        if (!run_cmd->parsed()) {
            const std::string name = app.get_subcommands().front()->get_name();
            if (config.contains("experiment") && config["experiment"] != name)
                throw lab::ConfigError("/experiment", "config names a different experiment than '" + name + "'");
            config["experiment"] = name;
            for (const Flag& f : kFlags.at(name)) {
                const std::string& v = given[name][f.key];
                if (!v.empty())
                    config[f.key] = convert(f, v);
            }
            if (rank[name])
                config["rank"] = *rank[name];
            if (seed[name])
                config["seed"] = *seed[name];
            if (!out[name].empty())
                config["out"] = out[name];
        }

        lab::RunOptions opts;
        opts.out_dir = out_dir;
        opts.threads = threads;
        opts.seed_override = seed_override;
        return report(lab::run(config, opts), opts.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "stationary-lab: " << e.what() << "\n";
        return lab::exit_code_for(e);
    }
}

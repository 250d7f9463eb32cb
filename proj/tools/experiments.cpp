#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <optional>

#include "lab.hpp"

#include "statlab/boundary.hpp"
#include "statlab/fdstates.hpp"
#include "statlab/norm_bounds.hpp"
#include "statlab/rng.hpp"
#include "statlab/srs.hpp"
#include "statlab/stationarity.hpp"

namespace statlab::lab {

namespace {

// ------------------------------------------------------------------ parsing

json load_json_file(const std::string& path, const std::string& pointer)
{
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(pointer, "cannot parse " + path + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError(pointer, e.what());
    }
}

Word parse_word_at(const json& j, const std::string& pointer, const FreeGroupContext& ctx)
{
    if (!j.is_string())
        throw ConfigError(pointer, "expected a word string");
    try {
        return Word::parse(j.get<std::string>(), ctx);
    } catch (const MalformedInput& e) {
        throw ConfigError(pointer, e.what());
    }
}

Word word_field(const ConfigReader& r, std::string_view key, const FreeGroupContext& ctx)
{
    return parse_word_at(r.raw(key), r.pointer(key), ctx);
}

FreeGroupContext context_of(const ConfigReader& r)
{
    const long k = r.integer("rank", 2);
    if (k < 1 || k > 26)
        r.fail("rank", "rank must be between 1 and 26");
    return FreeGroupContext{static_cast<int>(k)};
}

/// "ballR" (R a nonnegative integer) or an explicit array of words.
std::vector<Word> word_list(const ConfigReader& r, std::string_view key, const FreeGroupContext& ctx,
                            bool drop_identity)
{
    const json& j = r.raw(key);
    std::vector<Word> out;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s.rfind("ball", 0) != 0 || s.size() == 4 ||
            !std::all_of(s.begin() + 4, s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            r.fail(key, "expected \"ballR\" or an array of words");
        out = ball(ctx.rank, std::stoi(s.substr(4)));
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(parse_word_at(j[i], r.pointer(key) + "/" + std::to_string(i), ctx));
    } else {
        r.fail(key, "expected \"ballR\" or an array of words");
    }
    if (drop_identity)
        out.erase(std::remove_if(out.begin(), out.end(), [](const Word& w) { return w.is_identity(); }), out.end());
    return out;
}

void check_context_field(const ConfigReader& r, const FreeGroupContext& ctx)
{
    if (r.has("context") && r.integer("context") != ctx.rank)
        r.fail("context", "rank " + std::to_string(r.integer("context")) + " differs from the experiment rank " +
                              std::to_string(ctx.rank));
}

/// Mass given as a rational string or a number.
std::optional<Rational> exact_mass(const json& m, const std::string& pointer, double& approx)
{
    try {
        if (m.is_string()) {
            const Rational q = parse_rational(m.get<std::string>());
            approx = static_cast<double>(q);
            return q;
        }
    } catch (const MalformedInput& e) {
        throw ConfigError(pointer, e.what());
    }
    if (!m.is_number())
        throw ConfigError(pointer, "expected a mass");
    approx = m.get<double>();
    return std::nullopt;
}

/// "uniform", {"uniform": words}, {"file": path}, or
/// {"context": k, "atoms": [{"word": w, "p": mass}, ...]} (atoms may also be
/// an object mapping words to masses).
GroupMeasure parse_measure(const json& j, const std::string& pointer, const FreeGroupContext& ctx)
{
    if (j.is_string()) {
        if (j.get<std::string>() == "uniform")
            return GroupMeasure::uniform_generators(ctx);
        throw ConfigError(pointer, "unknown measure shorthand '" + j.get<std::string>() + "'");
    }
    const ConfigReader r(j, pointer);
    r.allow_only({"context", "uniform", "atoms", "file"});
    if (r.has("file"))
        return parse_measure(load_json_file(r.string("file"), r.pointer("file")), r.pointer("file"), ctx);
    check_context_field(r, ctx);
    if (r.has("uniform")) {
        const std::vector<Word> words = word_list(r, "uniform", ctx, false);
        try {
            return GroupMeasure::uniform(ctx, words);
        } catch (const MalformedInput& e) {
            r.fail("uniform", e.what());
        }
    }
    const json& atoms = r.raw("atoms");
    if (!(atoms.is_object() || atoms.is_array()) || atoms.empty())
        r.fail("atoms", "expected a nonempty array of {word, p} or an object mapping words to masses");
    std::vector<std::pair<Word, Rational>> exact;
    std::vector<std::pair<Word, double>> approx;
    bool all_exact = true;
    auto add = [&](const json& word, const json& mass, const std::string& p) {
        double x = 0.0;
        const std::optional<Rational> q = exact_mass(mass, p, x);
        const Word w = parse_word_at(word, p, ctx);
        all_exact = all_exact && q.has_value();
        if (q)
            exact.emplace_back(w, *q);
        approx.emplace_back(w, x);
    };
    if (atoms.is_array()) {
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const std::string p = r.pointer("atoms") + "/" + std::to_string(i);
            const ConfigReader a(atoms[i], p);
            a.allow_only({"word", "p"});
            add(a.raw("word"), a.raw("p"), p);
        }
    } else {
        for (const auto& [w, m] : atoms.items())
            add(json(w), m, r.pointer("atoms") + "/" + w);
    }
    try {
        return all_exact ? GroupMeasure::from_exact(ctx, std::move(exact))
                         : GroupMeasure::from_masses(ctx, std::move(approx));
    } catch (const MalformedInput& e) {
        r.fail("atoms", e.what());
    }
}

GroupMeasure measure_field(const ConfigReader& r, std::string_view key, const FreeGroupContext& ctx)
{
    return parse_measure(r.raw(key), r.pointer(key), ctx);
}

/// A word, {"file": path}, or {"context": k, "terms": [{"word": w, "re": x,
/// "im": y}, ...]} (terms may also map words to a number or [re, im]).
AlgebraElement parse_element(const json& j, const std::string& pointer, const FreeGroupContext& ctx)
{
    if (j.is_string())
        return AlgebraElement::delta(ctx, parse_word_at(j, pointer, ctx));
    const ConfigReader r(j, pointer);
    r.allow_only({"context", "terms", "file"});
    if (r.has("file"))
        return parse_element(load_json_file(r.string("file"), r.pointer("file")), r.pointer("file"), ctx);
    check_context_field(r, ctx);
    const json& terms = r.raw("terms");
    std::vector<Term> v;
    if (terms.is_array()) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const ConfigReader t(terms[i], r.pointer("terms") + "/" + std::to_string(i));
            t.allow_only({"word", "re", "im"});
            v.push_back({parse_word_at(t.raw("word"), t.pointer("word"), ctx),
                         Complex(t.number("re", 0.0), t.number("im", 0.0))});
        }
    } else if (terms.is_object()) {
        for (const auto& [w, c] : terms.items()) {
            const std::string p = r.pointer("terms") + "/" + w;
            Complex coeff;
            if (c.is_number())
                coeff = c.get<double>();
            else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
                coeff = Complex(c[0].get<double>(), c[1].get<double>());
            else
                throw ConfigError(p, "expected a number or [re, im]");
            v.push_back({parse_word_at(json(w), p, ctx), coeff});
        }
    } else {
        r.fail("terms", "expected an array of {word, re, im}");
    }
    return AlgebraElement::from_terms(ctx, std::move(v));
}

AlgebraElement element_field(const ConfigReader& r, std::string_view key, const FreeGroupContext& ctx)
{
    return parse_element(r.raw(key), r.pointer(key), ctx);
}

FiniteQuotient parse_rep(const json& j, const std::string& pointer, const FreeGroupContext& ctx)
{
    const ConfigReader r(j, pointer);
    r.allow_only({"permutations", "regular", "file"});
    if (r.has("file"))
        return parse_rep(load_json_file(r.string("file"), r.pointer("file")), r.pointer("file"), ctx);
    const json& perms = r.raw("permutations");
    std::vector<std::vector<int>> p;
    try {
        p = perms.get<std::vector<std::vector<int>>>();
    } catch (const json::exception&) {
        r.fail("permutations", "expected an array of integer arrays");
    }
    try {
        return r.boolean("regular", false) ? FiniteQuotient::regular_representation(ctx, p)
                                           : FiniteQuotient::from_permutations(ctx, p);
    } catch (const MalformedInput& e) {
        r.fail("permutations", e.what());
    }
}

/// "uniform" or "hitting" (the exit law of the walk driven by mu).
MarkovBoundaryMeasure boundary_field(const ConfigReader& r, std::string_view key, const GroupMeasure& mu)
{
    const std::string s = r.string(key, "uniform");
    if (s == "uniform")
        return MarkovBoundaryMeasure::uniform(mu.context());
    if (s == "hitting")
        return hitting_measure(mu);
    r.fail(key, "expected \"uniform\" or \"hitting\"");
}

std::size_t positive(const ConfigReader& r, std::string_view key, long fallback)
{
    const long v = r.integer(key, fallback);
    if (v < 1)
        r.fail(key, "must be positive");
    return static_cast<std::size_t>(v);
}

std::string out_name(const ConfigReader& r, const std::string& fallback)
{
    return r.string("out", fallback);
}

std::string summary(const json& j)
{
    return j.dump(2) + "\n";
}

std::string cnum(Complex c)
{
    return num(c.real()) + "," + num(c.imag());
}

// -------------------------------------------------------------- experiments

ExperimentResult run_cesaro(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "mu", "element", "n_max", "n_moments", "moment_cap",
                  "support_cap", "id"});
    const FreeGroupContext ctx = context_of(r);
    const GroupMeasure mu = measure_field(r, "mu", ctx);
    const AlgebraElement a = element_field(r, "element", ctx);
    CesaroOptions o;
    o.n_moments = static_cast<int>(positive(r, "n_moments", o.n_moments));
    o.moment_cap = positive(r, "moment_cap", static_cast<long>(o.moment_cap));
    o.support_cap = positive(r, "support_cap", static_cast<long>(o.support_cap));
    const CesaroReport rep = cesaro_test(a, mu, static_cast<int>(positive(r, "n_max", 0)), o, r.string("id", "a"));

    CsvTable t(experiment_anchor("cesaro"),
               {"n", "lower", "upper", "lower_method", "upper_method", "support", "moments_capped"});
    for (const auto& row : rep.rows)
        t.row({num(static_cast<long>(row.n)), num(row.lower), num(row.upper), row.lower_method, row.upper_method,
               num(row.support), row.moments_capped ? "1" : "0"});
    ExperimentResult res;
    res.files.push_back({out_name(r, "report.csv"), t.render()});
    res.files.push_back({"summary.json", summary({{"element", rep.element_id},
                                                  {"trace", {rep.trace.real(), rep.trace.imag()}},
                                                  {"mu_generating", to_string(rep.mu_generating)},
                                                  {"decaying", rep.decaying},
                                                  {"partial", rep.partial},
                                                  {"rows", rep.rows.size()},
                                                  {"verdict", rep.verdict()}})});
    res.note = rep.verdict();
    if (rep.verdict() != "consistent with unique stationarity")
        res.status = kExitInconclusive;
    return res;
}

PowersOptions powers_options(const ConfigReader& r, const FreeGroupContext& ctx)
{
    PowersOptions o;
    const std::string s = r.string("strategy", "geometric");
    if (s == "geometric")
        o.strategy = PowersStrategy::Geometric;
    else if (s == "random")
        o.strategy = PowersStrategy::Random;
    else
        r.fail("strategy", "expected \"geometric\" or \"random\"");
    o.max_n = static_cast<int>(positive(r, "max_n", o.max_n));
    o.word_radius = static_cast<int>(positive(r, "word_radius", o.word_radius));
    o.radius = static_cast<int>(positive(r, "radius", o.radius));
    o.tries_per_n = static_cast<int>(positive(r, "tries_per_n", o.tries_per_n));
    if (r.has("fixed_w"))
        o.fixed_w = word_field(r, "fixed_w", ctx);
    if (o.strategy == PowersStrategy::Random)
        o.seed = r.seed();
    return o;
}

ExperimentResult run_powers(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "g", "targets", "eps", "strategy", "max_n", "word_radius",
                  "fixed_w", "radius", "tries_per_n"});
    const FreeGroupContext ctx = context_of(r);
    std::vector<Word> targets;
    if (r.has("targets"))
        targets = word_list(r, "targets", ctx, false);
    else
        targets.push_back(word_field(r, "g", ctx));
    const PowersOptions o = powers_options(r, ctx);
    const PowersCertificate c = powers_search(ctx, targets, r.number("eps"), o);

    CsvTable t(experiment_anchor("powers"), {"target", "certified_upper", "eps", "below_eps"});
    for (std::size_t i = 0; i < c.targets.size(); ++i)
        t.row({c.targets[i].str(), num(c.target_upper[i]), num(c.eps), c.target_upper[i] < c.eps ? "1" : "0"});
    CsvTable h("conjugators h_k of the certified average", {"k", "conjugator"});
    for (std::size_t k = 0; k < c.conjugators.size(); ++k)
        h.row({num(k + 1), c.conjugators[k].str()});
    ExperimentResult res;
    res.files.push_back({out_name(r, "powers.csv"), t.render()});
    res.files.push_back({"conjugators.csv", h.render()});
    res.files.push_back({"summary.json", summary({{"n", c.n()},
                                                  {"w", c.w ? c.w->str() : ""},
                                                  {"strategy", c.strategy},
                                                  {"upper", c.upper},
                                                  {"eps", c.eps},
                                                  {"success", c.success},
                                                  {"verified", verify_certificate(ctx, c)}})});
    if (!c.success) {
        res.status = kExitInconclusive;
        res.note = "no certificate below eps within the search budget";
    }
    return res;
}

ExperimentResult run_build_mu(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "family", "levels", "eps", "search", "product_cap",
                  "direct_cap"});
    const FreeGroupContext ctx = context_of(r);
    const std::vector<Word> fam_words = word_list(r, "family", ctx, false);
    std::vector<AlgebraElement> family;
    for (const Word& g : fam_words)
        family.push_back(AlgebraElement::delta(ctx, g));
    BuilderOptions o;
    o.levels = static_cast<int>(positive(r, "levels", o.levels));
    if (r.has("eps")) {
        const json& e = r.raw("eps");
        if (!e.is_array() || !std::all_of(e.begin(), e.end(), [](const json& x) { return x.is_number(); }))
            r.fail("eps", "expected an array of numbers");
        o.eps = e.get<std::vector<double>>();
    }
    if (r.has("search")) {
        const ConfigReader s = r.child("search");
        s.allow_only({"strategy", "max_n", "word_radius", "fixed_w", "radius", "tries_per_n", "seed"});
        o.search = powers_options(s, ctx);
    }
    o.product_cap = positive(r, "product_cap", static_cast<long>(o.product_cap));
    o.direct_cap = positive(r, "direct_cap", static_cast<long>(o.direct_cap));
    const CStarSimpleMeasure m = build_c_star_simple_measure(family, o);

    CsvTable lv(experiment_anchor("build-mu"),
                {"level", "eps", "schedule_n", "conjugator_products", "targets", "n", "w", "certified_bound"});
    for (const auto& l : m.levels)
        lv.row({num(static_cast<long>(l.level)), num(l.eps), num(static_cast<long>(l.schedule_n)),
                num(l.conjugator_products), num(l.targets), num(l.search.n()), l.search.w ? l.search.w->str() : "",
                num(l.bound)});
    CsvTable mu("atoms of the truncated mixture measure", {"word", "mass_exact", "mass"});
    for (std::size_t i = 0; i < m.mu.support_size(); ++i)
        mu.row({m.mu.atoms()[i].word.str(), m.mu.exact_masses()[i].str(), num(m.mu.atoms()[i].mass)});
    CsvTable ch("certified bounds on ||mu^n_j * a - tau_0(a) 1|| against 5 eps_j",
                {"j", "n_j", "element", "low_level_mass", "split_bound", "direct_bound", "bound", "threshold", "pass"});
    for (const auto& c : m.checks)
        ch.row({num(static_cast<long>(c.j)), num(static_cast<long>(c.n_j)), fam_words[c.element].str(),
                num(c.low_level_mass), num(c.split_bound), num(c.direct_bound), num(c.bound), num(c.threshold),
                c.pass ? "1" : "0"});
    ExperimentResult res;
    res.files.push_back({out_name(r, "levels.csv"), lv.render()});
    res.files.push_back({"mu.csv", mu.render()});
    res.files.push_back({"checks.csv", ch.render()});
    const bool verified = verify_construction(m, o);
    res.files.push_back({"summary.json", summary({{"levels", m.levels.size()},
                                                  {"schedule", m.schedule},
                                                  {"tail_mass", m.tail_mass},
                                                  {"support", m.mu.support_size()},
                                                  {"generating", to_string(m.mu.generating())},
                                                  {"all_pass", m.all_pass()},
                                                  {"verified", verified}})});
    if (!m.all_pass() || !verified) {
        res.status = kExitInconclusive;
        res.note = "a final check or the recomputation failed";
    }
    return res;
}

CsvTable cylinder_table(const std::string& description, const CylinderMeasure& nu)
{
    CsvTable t(description, {"word", "depth", "mass"});
    for (int n = 1; n <= nu.depth(); ++n) {
        const auto& lv = nu.level(n);
        std::size_t i = 0;
        for (const Word& w : sphere(nu.context().rank, n))
            t.row({w.str(), num(static_cast<long>(n)), num(lv[i++])});
    }
    return t;
}

ExperimentResult run_boundary_solve(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "mu", "depth", "tol", "max_iter", "perturbation"});
    const FreeGroupContext ctx = context_of(r);
    const GroupMeasure mu = measure_field(r, "mu", ctx);
    SolveOptions o;
    o.depth = static_cast<int>(positive(r, "depth", o.depth));
    o.tol = r.number("tol", o.tol);
    o.max_iter = static_cast<int>(positive(r, "max_iter", o.max_iter));
    if (r.has("perturbation")) {
        const ConfigReader p = r.child("perturbation");
        p.allow_only({"amplitude"});
        const double amp = p.number("amplitude");
        if (!(amp >= 0.0 && amp < 1.0))
            p.fail("amplitude", "must lie in [0, 1)");
        CounterRng rng(r.seed(), 0);
        const int wd = o.depth + 2 * static_cast<int>(mu.max_length());
        const CylinderMeasure u = uniform_boundary_measure(ctx, wd);
        std::vector<double> deep = u.level(wd);
        double total = 0.0;
        for (double& x : deep) {
            x *= 1.0 + amp * (2.0 * rng.uniform() - 1.0);
            total += x;
        }
        for (double& x : deep)
            x /= total;
        o.seed = CylinderMeasure::from_deepest(ctx, wd, std::move(deep));
    }
    const StationarySolution s = solve_stationary(mu, o);

    ExperimentResult res;
    res.files.push_back({out_name(r, "boundary.csv"), cylinder_table(experiment_anchor("boundary-solve"),
                                                                     s.measure.truncated(o.depth)).render()});
    CsvTable tr("step change of the stationary iteration", {"iteration", "change"});
    for (std::size_t i = 0; i < s.residual_trace.size(); ++i)
        tr.row({num(i + 1), num(s.residual_trace[i])});
    res.files.push_back({"trace.csv", tr.render()});
    json sj = {{"iterations", s.iterations}, {"residual", s.residual}, {"working_depth", s.working_depth}};
    if (s.hitting_tv)
        sj["hitting_tv"] = *s.hitting_tv;
    res.files.push_back({"summary.json", summary(sj)});
    return res;
}

ExperimentResult run_conditional(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "mu", "nu", "paths", "length", "disintegration_paths",
                  "disintegration_depth"});
    const FreeGroupContext ctx = context_of(r);
    const GroupMeasure mu = measure_field(r, "mu", ctx);
    const MarkovBoundaryMeasure nu = boundary_field(r, "nu", mu);
    const std::uint64_t seed = r.seed();
    const std::size_t paths = positive(r, "paths", 100);
    const std::size_t length = positive(r, "length", 30);
    const std::size_t dpaths = positive(r, "disintegration_paths", 10000);
    const int ddepth = static_cast<int>(positive(r, "disintegration_depth", 2));

    CsvTable t(experiment_anchor("conditional"), {"path", "top_mass", "position_length", "dirac"});
    std::size_t dirac = 0;
    for (std::size_t i = 0; i < paths; ++i) {
        const PathSample p = sample_path(mu, length, seed, i);
        const ConditionalMeasure c = conditional_measure(nu, p, length, 1);
        const bool d = c.top_mass > 0.9;
        dirac += d;
        t.row({num(i), num(c.top_mass), num(c.position.length()), d ? "1" : "0"});
    }

    const std::vector<Word> cyl = sphere(ctx.rank, ddepth);
    std::vector<double> sum(cyl.size(), 0.0), sumsq(cyl.size(), 0.0);
    for (std::size_t i = 0; i < dpaths; ++i) {
        const PathSample p = sample_path(mu, length, seed, i);
        const ConditionalMeasure c = conditional_measure(nu, p, length, ddepth);
        const auto& lv = c.measure.level(ddepth);
        for (std::size_t k = 0; k < cyl.size(); ++k) {
            sum[k] += lv[k];
            sumsq[k] += lv[k] * lv[k];
        }
    }
    CsvTable d("path average of omega_n nu against nu on cylinders", {"word", "empirical", "stderr", "nu", "z"});
    double max_z = 0.0;
    const double dn = static_cast<double>(dpaths);
    for (std::size_t k = 0; k < cyl.size(); ++k) {
        const double mean = sum[k] / dn;
        const double var = std::max(0.0, sumsq[k] / dn - mean * mean) * dn / std::max(1.0, dn - 1.0);
        const double se = std::sqrt(var / dn);
        const double target = nu.mass(cyl[k]);
        const double z = se > 0.0 ? (mean - target) / se : (mean == target ? 0.0 : INFINITY);
        max_z = std::max(max_z, std::abs(z));
        d.row({cyl[k].str(), num(mean), num(se), num(target), num(z)});
    }
    ExperimentResult res;
    res.files.push_back({out_name(r, "conditional.csv"), t.render()});
    res.files.push_back({"disintegration.csv", d.render()});
    res.files.push_back({"summary.json", summary({{"paths", paths},
                                                  {"dirac_paths", dirac},
                                                  {"disintegration_paths", dpaths},
                                                  {"max_abs_z", max_z}})});
    return res;
}

ExperimentResult run_bnd_map(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "mu", "paths", "length", "min_depth"});
    const FreeGroupContext ctx = context_of(r);
    const GroupMeasure mu = measure_field(r, "mu", ctx);
    const std::uint64_t seed = r.seed();
    const std::size_t paths = positive(r, "paths", 1000);
    const std::size_t length = positive(r, "length", 60);
    const int min_depth = static_cast<int>(positive(r, "min_depth", 1));

    CsvTable t(experiment_anchor("bnd-map"), {"path", "prefix", "resolved_depth", "resolved"});
    std::map<Word, std::size_t> first;
    std::size_t resolved = 0;
    for (std::size_t i = 0; i < paths; ++i) {
        const PathSample p = sample_path(mu, length, seed, i);
        try {
            const BoundaryPoint b = boundary_map(p, min_depth);
            ++resolved;
            ++first[b.prefix.prefix(1)];
            t.row({num(i), b.prefix.str(), num(static_cast<long>(b.resolved_depth)), "1"});
        } catch (const UnresolvedError& e) {
            t.row({num(i), e.partial_prefix(), num(static_cast<long>(e.partial_prefix().size())), "0"});
        }
    }
    json freq = json::object();
    for (const auto& [w, n] : first)
        freq[w.str()] = static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(resolved, 1));
    ExperimentResult res;
    res.files.push_back({out_name(r, "boundary_map.csv"), t.render()});
    res.files.push_back({"summary.json", summary({{"paths", paths}, {"resolved", resolved}, {"first_letter", freq}})});
    return res;
}

ExperimentResult run_fix_mass(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "mu", "nu", "gens", "depth", "threshold"});
    const FreeGroupContext ctx = context_of(r);
    const GroupMeasure mu = r.has("mu") ? measure_field(r, "mu", ctx) : GroupMeasure::uniform_generators(ctx);
    const MarkovBoundaryMeasure nu = boundary_field(r, "nu", mu);
    const std::vector<Word> gens = word_list(r, "gens", ctx, true);
    const int depth = static_cast<int>(positive(r, "depth", 8));
    const FreenessReport rep = freeness_report(mu, nu, gens, depth, r.number("threshold", 1e-3));

    CsvTable t(experiment_anchor("fix-mass"), {"g", "attracting_prefix", "repelling_prefix", "upper"});
    for (const auto& row : rep.rows)
        t.row({row.g.str(), row.bound.attracting_prefix.str(), row.bound.repelling_prefix.str(),
               num(row.bound.upper)});
    CsvTable p("upper bounds on phi(g) = nu(Fix(g))", {"word", "phi"});
    p.row({"1", num(1.0)});
    for (const auto& row : rep.rows)
        p.row({row.g.str(), num(row.bound.upper)});
    ExperimentResult res;
    res.files.push_back({out_name(r, "fix_mass.csv"), t.render()});
    res.files.push_back({"pdf.csv", p.render()});
    res.files.push_back({"summary.json", summary({{"depth", depth},
                                                  {"stationarity_residual", rep.residual},
                                                  {"threshold", rep.threshold},
                                                  {"verdict", rep.verdict}})});
    res.note = rep.verdict;
    if (!rep.essentially_free)
        res.status = kExitInconclusive;
    return res;
}

ExperimentResult run_srs_escape(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "mu", "start", "steps", "trials", "threshold",
                  "pdf_radius"});
    const FreeGroupContext ctx = context_of(r);
    const GroupMeasure mu = measure_field(r, "mu", ctx);
    const CyclicSubgroup start = CyclicSubgroup::containing(word_field(r, "start", ctx));
    EscapeOptions o;
    o.seed = r.seed();
    o.steps = static_cast<std::size_t>(r.integer("steps", static_cast<long>(o.steps)));
    o.trials = positive(r, "trials", static_cast<long>(o.trials));
    o.threshold = positive(r, "threshold", static_cast<long>(o.threshold));
    const int radius = static_cast<int>(r.integer("pdf_radius", 2));
    const EscapeReport rep = srs_escape_experiment(mu, start, o);

    CsvTable t(experiment_anchor("srs-escape"), {"step", "median_root_len", "q25", "q75", "frac_beyond_T"});
    for (const auto& row : rep.rows)
        t.row({num(row.step), num(row.median), num(row.q25), num(row.q75), num(row.frac_beyond)});
    std::vector<std::pair<CyclicSubgroup, double>> sample;
    for (const auto& s : rep.final_states)
        sample.emplace_back(s, 1.0 / static_cast<double>(rep.final_states.size()));
    const PositiveDefiniteFn phi = pdf_from_subgroup_sample(ctx, sample, radius);
    CsvTable p("empirical phi_t(g) at the final step", {"word", "phi"});
    for (const Word& w : ball(ctx.rank, radius))
        p.row({w.str(), num(phi.at(w))});
    ExperimentResult res;
    res.files.push_back({out_name(r, "escape.csv"), t.render()});
    res.files.push_back({"pdf.csv", p.render()});
    res.files.push_back({"summary.json",
                         summary({{"verdict", rep.verdict},
                                  {"slope", rep.slope},
                                  {"final_median", rep.rows.back().median},
                                  {"model", "amenable subgroups of a free group are cyclic"}})});
    res.note = rep.verdict;
    if (rep.verdict == "not escaping")
        res.status = kExitInconclusive;
    return res;
}

ExperimentResult run_pdf_check(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "samples", "subgroups_per_sample", "root_radius", "tuples",
                  "tuple_size", "tuple_radius"});
    const FreeGroupContext ctx = context_of(r);
    const std::uint64_t seed = r.seed();
    const std::size_t samples = positive(r, "samples", 100);
    const std::size_t per = positive(r, "subgroups_per_sample", 8);
    const int root_radius = static_cast<int>(positive(r, "root_radius", 3));
    const std::size_t tuples = positive(r, "tuples", 100);
    const std::size_t size = positive(r, "tuple_size", 5);
    const int tuple_radius = static_cast<int>(positive(r, "tuple_radius", 3));
    const std::vector<Word> roots = ball(ctx.rank, root_radius);
    const std::vector<Word> pool = ball(ctx.rank, tuple_radius);

    CsvTable t(experiment_anchor("pdf-check"), {"sample", "tuple", "min_eigenvalue"});
    std::size_t failures = 0;
    double worst = INFINITY;
    for (std::size_t s = 0; s < samples; ++s) {
        CounterRng rng(seed, s);
        std::vector<std::pair<CyclicSubgroup, double>> sample;
        for (std::size_t i = 0; i < per; ++i)
            sample.emplace_back(CyclicSubgroup::containing(roots[rng.below(roots.size())]),
                                1.0 / static_cast<double>(per));
        const PositiveDefiniteFn phi = pdf_from_subgroup_sample(ctx, sample, 2 * tuple_radius);
        std::vector<std::vector<Word>> tup(tuples);
        for (auto& tp : tup)
            for (std::size_t i = 0; i < size; ++i)
                tp.push_back(pool[rng.below(pool.size())]);
        const PsdReport rep = psd_check(phi, tup);
        failures += rep.failures;
        for (std::size_t i = 0; i < tuples; ++i) {
            worst = std::min(worst, rep.min_eigenvalues[i]);
            t.row({num(s), num(i), num(rep.min_eigenvalues[i])});
        }
    }
    ExperimentResult res;
    res.files.push_back({out_name(r, "psd.csv"), t.render()});
    res.files.push_back({"summary.json", summary({{"samples", samples},
                                                  {"tuples_per_sample", tuples},
                                                  {"failures", failures},
                                                  {"min_eigenvalue", worst},
                                                  {"tolerance", kPsdTolerance}})});
    if (failures) {
        res.status = kExitInconclusive;
        res.note = std::to_string(failures) + " Gram matrices below tolerance";
    }
    return res;
}

ExperimentResult run_fdstates(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "rep", "mu", "tol"});
    const FreeGroupContext ctx = context_of(r);
    const FiniteQuotient rep = parse_rep(r.raw("rep"), r.pointer("rep"), ctx);
    const GroupMeasure mu = measure_field(r, "mu", ctx);
    const double tol = r.number("tol", 1e-9);
    const Eigen::MatrixXd fixed = stationary_fixed_space(rep, mu);
    const std::vector<DensityState> states = finite_dim_stationary_states(rep, mu, tol);

    CsvTable t(experiment_anchor("fdstates"), {"state", "row", "col", "re", "im"});
    json per = json::array();
    for (std::size_t s = 0; s < states.size(); ++s) {
        const CMatrix& rho = states[s].rho;
        for (Eigen::Index i = 0; i < rho.rows(); ++i)
            for (Eigen::Index j = 0; j < rho.cols(); ++j)
                t.row({num(s), num(static_cast<long>(i)), num(static_cast<long>(j)), cnum(rho(i, j))});
        per.push_back({{"residual", states[s].residual}, {"adjustment", states[s].adjustment}});
    }
    ExperimentResult res;
    res.files.push_back({out_name(r, "states.csv"), t.render()});
    res.files.push_back({"summary.json", summary({{"dimension", rep.dimension()},
                                                  {"fixed_space_dimension", fixed.cols()},
                                                  {"states", states.size()},
                                                  {"per_state", per}})});
    return res;
}

ExperimentResult run_norm(const ConfigReader& r)
{
    r.allow_only({"experiment", "rank", "seed", "out", "element", "n_moments", "support_cap"});
    const FreeGroupContext ctx = context_of(r);
    const AlgebraElement x = element_field(r, "element", ctx);
    MomentOptions o;
    o.support_cap = positive(r, "support_cap", static_cast<long>(o.support_cap));
    const int n = static_cast<int>(positive(r, "n_moments", 64));
    const NormBracket b = certify_norm(x, n, o);
    const MomentTable m = trace_moments(x, n, o);

    CsvTable t(experiment_anchor("norm"),
               {"lower", "upper", "lower_method", "upper_method", "moments_used", "capped"});
    t.row({num(b.lower), num(b.upper), b.lower_method, b.upper_method, num(static_cast<long>(b.moments_used)),
           b.capped ? "1" : "0"});
    CsvTable mt("trace moments tau_0((x* x)^m)", {"m", "moment"});
    for (const auto& [k, v] : m.values)
        mt.row({num(static_cast<long>(k)), num(v)});
    ExperimentResult res;
    res.files.push_back({out_name(r, "norm.csv"), t.render()});
    res.files.push_back({"moments.csv", mt.render()});
    return res;
}

struct Entry {
    const char* name;
    const char* anchor;
    ExperimentResult (*fn)(const ConfigReader&);
};

const Entry kEntries[] = {
    {"cesaro", "certified norm bracket of the Cesaro average of mu^k * a minus tau_0(a) 1", run_cesaro},
    {"powers", "certified upper bound on the norm of (1/n) sum_k lambda(h_k^-1 t h_k) per target t", run_powers},
    {"build-mu", "level certificates of the averaging measure mu = sum_l 2^-l mu_l", run_build_mu},
    {"boundary-solve", "cylinder masses of the mu-stationary boundary measure", run_boundary_solve},
    {"conditional", "top level-1 mass of the conditional measure omega_n nu along sample paths", run_conditional},
    {"bnd-map", "boundary point read off the tail of each sample path", run_bnd_map},
    {"fix-mass", "upper bounds on nu(Fix(g)) from the axis cylinders of g", run_fix_mass},
    {"srs-escape", "primitive-root length of conjugation chains of cyclic subgroups", run_srs_escape},
    {"pdf-check", "minimum eigenvalue of Gram matrices of subgroup-sample positive definite functions",
     run_pdf_check},
    {"fdstates", "density matrices of mu-stationary states of the finite quotient", run_fdstates},
    {"norm", "certified bracket on the reduced norm from trace moments and Haagerup bounds", run_norm},
};

const Entry& entry(const std::string& name)
{
    for (const Entry& e : kEntries)
        if (name == e.name)
            return e;
    throw ConfigError("/experiment", "unknown experiment '" + name + "'");
}

} // namespace

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const Entry& e : kEntries)
            v.emplace_back(e.name);
        return v;
    }();
    return names;
}

std::string experiment_anchor(const std::string& experiment)
{
    return entry(experiment).anchor;
}

ExperimentResult run_experiment(const std::string& experiment, const ConfigReader& cfg)
{
    return entry(experiment).fn(cfg);
}

} // namespace statlab::lab

// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <map>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <fmt/format.h>
#include <unistd.h>

#include "lab.hpp"
#include "oracles.hpp"
#include "statlab/boundary.hpp"
#include "statlab/fdstates.hpp"
#include "statlab/norm_bounds.hpp"
#include "statlab/rng.hpp"
#include "statlab/srs.hpp"
#include "statlab/stationarity.hpp"

using namespace statlab;
namespace fs = std::filesystem;

namespace {

const FreeGroupContext F2{2};

Word W(const char* s)
{
    return Word::parse(s);
}

GroupMeasure uniform()
{
    return GroupMeasure::uniform_generators(F2);
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = t < time_limit;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << fmt::format("{} criterion {}: {}: {}; {:.3f} s (limit {} s){}\n", pass ? "PASS" : "FAIL", id, name,
                             o.detail, t, time_limit, in_time ? "" : ", too slow")
              << std::flush;
}

Outcome uniform_stationarity()
{
    const CylinderMeasure nu = uniform_boundary_measure(F2, 7);
    const double r = stationarity_residual(uniform(), nu, 6);
    return {r < 1e-12, fmt::format("residual at depth 6 = {:.3g}", r)};
}

Outcome perturbed_solve()
{
    const int depth = 5, working = depth + 2;
    std::vector<double> deep = uniform_boundary_measure(F2, working).level(working);
    CounterRng rng(20240501, 0);
    double total = 0.0;
    for (double& x : deep) {
        x *= 1.0 + 0.3 * (2.0 * rng.uniform() - 1.0);
        total += x;
    }
    for (double& x : deep)
        x /= total;
    SolveOptions o;
    o.depth = depth;
    o.max_iter = 200;
    o.seed = CylinderMeasure::from_deepest(F2, working, std::move(deep));
    const double start_tv = total_variation(*o.seed, uniform_boundary_measure(F2, depth), depth);
    const StationarySolution s = solve_stationary(uniform(), o);
    const double tv = total_variation(s.measure, uniform_boundary_measure(F2, depth), depth);
    return {tv < 1e-8 && s.iterations <= 200,
            fmt::format("start TV {:.3g}, final TV {:.3g} after {} iterations", start_tv, tv, s.iterations)};
}

Outcome norm_bracket()
{
    const AlgebraElement x = AlgebraElement::delta(F2, W("a")) + AlgebraElement::delta(F2, W("A")) +
                             AlgebraElement::delta(F2, W("b")) + AlgebraElement::delta(F2, W("B"));
    const double lo = norm_lower_bound(x, 64);
    const double up = norm_upper_bound(x);
    const MomentTable m = trace_moments(x, 64);
    double worst = 0.0;
    for (const auto& [j, v] : m.values)
        worst = std::max(worst, std::abs(v / oracle::closed_walks(2, 2 * j).convert_to<double>() - 1.0));
    const bool ok = lo >= 3.39 && lo <= 3.4642 && up >= lo && worst < 1e-12;
    return {ok, fmt::format("lower {:.6f}, upper {:.6f}, target {:.6f}, moment oracle rel. error {:.2g}", lo, up,
                            2.0 * std::sqrt(3.0), worst)};
}

Outcome conditional_dirac()
{
    const MarkovBoundaryMeasure nu = MarkovBoundaryMeasure::uniform(F2);
    const std::uint64_t seed = 31337;
    int dirac = 0;
    for (std::uint64_t i = 0; i < 100; ++i)
        dirac += conditional_measure(nu, sample_path(uniform(), 30, seed, i), 30).top_mass > 0.9 ? 1 : 0;

    const std::vector<Word> cyl = sphere(2, 2);
    std::vector<double> sum(cyl.size(), 0.0), sumsq(cyl.size(), 0.0);
    const std::size_t n = 10000;
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> lv =
            conditional_measure(nu, sample_path(uniform(), 30, seed, i), 30, 2).measure.level(2);
        for (std::size_t k = 0; k < cyl.size(); ++k) {
            sum[k] += lv[k];
            sumsq[k] += lv[k] * lv[k];
        }
    }
    double max_z = 0.0;
    for (std::size_t k = 0; k < cyl.size(); ++k) {
        const double mean = sum[k] / static_cast<double>(n);
        const double var = (sumsq[k] / static_cast<double>(n) - mean * mean) * static_cast<double>(n) / (n - 1.0);
        max_z = std::max(max_z, std::abs(mean - nu.mass(cyl[k])) / std::sqrt(var / static_cast<double>(n)));
    }
    return {dirac >= 95 && max_z <= 3.0,
            fmt::format("{} of 100 paths with top mass > 0.9; disintegration max |z| = {:.2f}", dirac, max_z)};
}

Outcome powers_certificate()
{
    PowersOptions o;
    o.fixed_w = W("b");
    o.max_n = 16;
    const PowersCertificate c = powers_search(F2, W("a"), 0.75, o);
    const bool ok = c.success && c.n() <= 16 && c.upper < 0.75 && verify_certificate(F2, c);
    return {ok, fmt::format("n = {}, certified upper {:.4f}", c.n(), c.upper)};
}

bool schedule_holds(const std::vector<int>& s)
{
    for (std::size_t k = 1; k <= s.size(); ++k) {
        const Rational target(1, oracle::BigInt(1) << k);
        const Rational base = 1 - target;
        Rational p = 1;
        for (int i = 0; i < s[k - 1]; ++i)
            p *= base;
        if (!(p < target) || (k > 1 && s[k - 1] <= s[k - 2]))
            return false;
        if (k > 1 && s[k - 1] - 1 > s[k - 2] && p / base < target)
            return false;
        if (k == 1 && s[0] > 1 && p / base < target)
            return false;
    }
    return true;
}

Outcome builder()
{
    BuilderOptions o;
    o.levels = 2;
    const CStarSimpleMeasure m = build_c_star_simple_measure(ball_family(F2, 1), o);
    bool ok = m.schedule == std::vector<int>{2, 5} && schedule_holds(m.schedule) && verify_construction(m, o);
    std::string detail = fmt::format("schedule {}, {}", m.schedule[0], m.schedule[1]);
    for (const LevelCertificate& l : m.levels) {
        ok = ok && l.bound < l.eps && verify_certificate(F2, l.search);
        detail += fmt::format("; level {} bound {:.4f} < {}", l.level, l.bound, l.eps);
    }
    std::map<int, double> worst;
    for (const FinalCheck& c : m.checks) {
        ok = ok && c.bound < 5.0 * std::ldexp(1.0, -c.j);
        worst[c.j] = std::max(worst[c.j], c.bound);
    }
    for (const auto& [j, b] : worst)
        detail += fmt::format("; j = {} max final bound {:.4f} < {}", j, b, 5.0 * std::ldexp(1.0, -j));
    return {ok, detail};
}

Outcome fd_states()
{
    const FiniteQuotient rep = FiniteQuotient::regular_representation(F2, {{1, 0, 2}, {1, 2, 0}});
    const Eigen::MatrixXd fixed = stationary_fixed_space(rep, uniform());
    const Eigen::MatrixXd ref = oracle::commutant_hermitian_basis({rep.image(W("a")), rep.image(W("b"))});
    const std::vector<DensityState> states = finite_dim_stationary_states(rep, uniform());
    Eigen::MatrixXd span(fixed.rows(), static_cast<Eigen::Index>(states.size()));
    double worst = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        span.col(static_cast<Eigen::Index>(i)) = hermitian_coordinates(states[i].rho);
        worst = std::max(worst, states[i].residual);
    }
    const double d_fixed = subspace_distance(fixed, ref);
    const double d_states = subspace_distance(span, ref);
    return {d_fixed < 1e-8 && d_states < 1e-8 && worst < 1e-9,
            fmt::format("{} states, dim {}; distance to invariant solver {:.2g} (fixed space), {:.2g} (states)",
                        states.size(), ref.cols(), d_fixed, d_states)};
}

Outcome freeness()
{
    std::vector<Word> gens = ball(2, 2);
    gens.erase(gens.begin());
    const FreenessReport r = freeness_report(uniform(), MarkovBoundaryMeasure::uniform(F2), gens, 8);
    const double closed = 2.0 / (4.0 * std::pow(3.0, 7));
    double worst = 0.0, dev = 0.0;
    for (const FreenessRow& row : r.rows) {
        worst = std::max(worst, row.bound.upper);
        dev = std::max(dev, std::abs(row.bound.upper - closed) / closed);
    }
    return {r.essentially_free && worst < 1e-3 && dev < 1e-12,
            fmt::format("{} generators, max bound {:.6g}, closed form {:.6g}, rel. deviation {:.2g}", r.rows.size(),
                        worst, closed, dev)};
}

Outcome psd()
{
    const std::vector<Word> roots = ball(2, 3), pool = ball(2, 3);
    std::size_t bad = 0;
    double worst = INFINITY;
    for (std::uint64_t s = 0; s < 100; ++s) {
        CounterRng rng(4242, s);
        std::vector<std::pair<CyclicSubgroup, double>> sample;
        for (int i = 0; i < 8; ++i)
            sample.emplace_back(CyclicSubgroup::containing(roots[rng.below(roots.size())]), 1.0 / 8.0);
        const PositiveDefiniteFn phi = pdf_from_subgroup_sample(F2, sample, 6);
        std::vector<std::vector<Word>> tuples(100);
        for (auto& t : tuples)
            for (int i = 0; i < 5; ++i)
                t.push_back(pool[rng.below(pool.size())]);
        const PsdReport rep = psd_check(phi, tuples);
        bad += rep.failures;
        for (double e : rep.min_eigenvalues)
            worst = std::min(worst, e);
    }
    return {bad == 0, fmt::format("{} of 10000 Gram matrices below -1e-9; smallest eigenvalue {:.3g}", bad, worst)};
}

Outcome escape()
{
    EscapeOptions o;
    o.steps = 200;
    o.trials = 500;
    o.seed = 99;
    const EscapeReport r = srs_escape_experiment(uniform(), CyclicSubgroup::containing(W("a")), o);
    std::vector<std::pair<CyclicSubgroup, double>> sample;
    for (const auto& s : r.final_states)
        sample.emplace_back(s, 1.0 / static_cast<double>(r.final_states.size()));
    const double phi_a = pdf_from_subgroup_sample(F2, sample, 1).at(W("a"));
    const double median = r.rows.back().median;
    return {median >= 100 && phi_a < 0.01,
            fmt::format("median root length {} at step 200, phi_200(a) = {}, verdict {}", median, phi_a, r.verdict)};
}

Outcome determinism()
{
    const fs::path root = fs::temp_directory_path() / ("stationary-lab-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    using lab::json;
    const json s3 = {{"permutations", {{1, 0, 2}, {1, 2, 0}}}, {"regular", true}};
    const std::vector<json> configs = {
        {{"experiment", "boundary-solve"}, {"mu", "uniform"}, {"depth", 6}},
        {{"experiment", "boundary-solve"}, {"mu", "uniform"}, {"depth", 5}, {"max_iter", 200},
         {"perturbation", {{"amplitude", 0.3}}}, {"seed", 7}},
        {{"experiment", "norm"}, {"element", {{"terms", {{"a", 1.0}, {"A", 1.0}, {"b", 1.0}, {"B", 1.0}}}}},
         {"n_moments", 64}},
        {{"experiment", "conditional"}, {"mu", "uniform"}, {"paths", 100}, {"length", 30},
         {"disintegration_paths", 10000}, {"seed", 11}},
        {{"experiment", "powers"}, {"g", "a"}, {"eps", 0.75}, {"fixed_w", "b"}, {"max_n", 16}},
        {{"experiment", "build-mu"}, {"family", "ball1"}, {"levels", 2}},
        {{"experiment", "fdstates"}, {"rep", s3}, {"mu", "uniform"}},
        {{"experiment", "fix-mass"}, {"mu", "uniform"}, {"gens", "ball2"}, {"depth", 8}},
        {{"experiment", "pdf-check"}, {"samples", 100}, {"tuples", 100}, {"tuple_size", 5}, {"seed", 13}},
        {{"experiment", "srs-escape"}, {"mu", "uniform"}, {"start", "a"}, {"steps", 200}, {"trials", 500},
         {"seed", 17}},
    };
    std::size_t files = 0;
    std::string problem;
    for (std::size_t i = 0; i < configs.size() && problem.empty(); ++i) {
        std::vector<lab::RunManifest> runs;
        for (int rep = 0; rep < 2; ++rep) {
            lab::RunOptions o;
            o.out_dir = root / fmt::format("{}-{}", i, rep);
            runs.push_back(lab::run(configs[i], o));
            if (!lab::verify(o.out_dir / "manifest.json").ok)
                problem = fmt::format("verify failed for {}", configs[i]["experiment"].get<std::string>());
        }
        if (runs[0].outputs.size() != runs[1].outputs.size())
            problem = "output lists differ";
        for (std::size_t k = 0; problem.empty() && k < runs[0].outputs.size(); ++k) {
            const auto& a = runs[0].outputs[k];
            const auto& b = runs[1].outputs[k];
            if (a.path != b.path || a.sha256 != b.sha256)
                problem = fmt::format("{} differs between runs", a.path);
            files += a.path.size() > 4 && a.path.substr(a.path.size() - 4) == ".csv" ? 1 : 0;
        }
    }
    fs::remove_all(root);
    if (!problem.empty())
        return {false, problem};
    return {true, fmt::format("10 experiments run twice, {} CSV files byte-identical, all manifests verify", files)};
}

} // namespace

int main()
{
    criterion(1, "uniform boundary measure is stationary", 1, uniform_stationarity);
    criterion(2, "solver recovers the uniform measure from a perturbed start", 10, perturbed_solve);
    criterion(3, "norm bracket of the generator sum", 60, norm_bracket);
    criterion(4, "conditional measures become Dirac and disintegrate to nu", 30, conditional_dirac);
    criterion(5, "geometric averaging certificate below 0.75", 60, powers_certificate);
    criterion(6, "two-level measure construction on ball(1)", 300, builder);
    criterion(7, "stationary states of the S3 regular representation", 1, fd_states);
    criterion(8, "fixed-point masses for ball(2) at depth 8", 1, freeness);
    criterion(9, "Gram matrices of subgroup positive definite functions", 30, psd);
    criterion(10, "conjugation chains escape from <a>", 60, escape);
    criterion(11, "reruns give byte-identical outputs", 600, determinism);
    std::cout << (failures ? fmt::format("{} criteria failed\n", failures) : std::string("all criteria passed\n"));
    return failures ? 1 : 0;
}

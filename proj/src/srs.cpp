#include "statlab/srs.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <thread>

#include <Eigen/Dense>

#include "statlab/algebra.hpp"
#include "statlab/errors.hpp"
#include "statlab/rng.hpp"

namespace statlab {

Word primitive_root(const Word& g)
{
    if (g.is_identity())
        return g;
    const auto [u, core] = cyclic_reduction(g);
    const std::string_view c = core.codes();
    const std::size_t n = c.size();
    std::size_t period = n;
    for (std::size_t d = 1; d < n; ++d) {
        if (n % d != 0)
            continue;
        bool periodic = true;
        for (std::size_t i = d; i < n && periodic; ++i)
            periodic = c[i] == c[i - d];
        if (periodic) {
            period = d;
            break;
        }
    }
    const Word r = multiply(multiply(u, core.prefix(period)), u.inverse());
    const Word rinv = r.inverse();
    return rinv < r ? rinv : r;
}

bool CyclicSubgroup::contains(const Word& g) const
{
    if (g.is_identity())
        return true;
    if (root_.is_identity())
        return false;
    const auto [u, p] = cyclic_reduction(root_);
    if (g.length() <= 2 * u.length())
        return false;
    const std::size_t rest = g.length() - 2 * u.length();
    if (rest % p.length() != 0)
        return false;
    const long m = static_cast<long>(rest / p.length());
    return g == power(root_, m) || g == power(root_, -m);
}

SubgroupChain conjugation_chain(const GroupMeasure& mu, const CyclicSubgroup& start, std::size_t steps,
                                std::uint64_t seed, std::uint64_t stream)
{
    const IncrementSampler sampler(mu);
    CounterRng rng(seed, stream);
    SubgroupChain chain{seed, stream, {start}};
    chain.states.reserve(steps + 1);
    for (std::size_t t = 0; t < steps; ++t) {
        const Word& g = sampler.word(sampler.index_for(rng.uniform()));
        chain.states.push_back(chain.states.back().conjugated(g));
    }
    return chain;
}

double PositiveDefiniteFn::at(const Word& g) const
{
    if (static_cast<int>(g.length()) > radius)
        throw CoverageError("pdf has no value at " + g.str() + " outside ball(" + std::to_string(radius) + ")");
    auto it = values.find(g);
    return it == values.end() ? 0.0 : it->second;
}

PositiveDefiniteFn pdf_from_subgroup_sample(FreeGroupContext ctx,
                                            const std::vector<std::pair<CyclicSubgroup, double>>& sample,
                                            int radius)
{
    if (radius < 0)
        throw PreconditionError("pdf radius must be nonnegative");
    double total = 0.0;
    for (const auto& [h, w] : sample) {
        check_word(h.root(), ctx);
        if (!(w >= 0.0))
            throw PreconditionError("subgroup weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > GroupMeasure::kMassTolerance)
        throw PreconditionError("subgroup weights sum to " + std::to_string(total) + ", not 1");

    PositiveDefiniteFn phi{ctx, radius, {}};
    phi.values[Word{}] = 1.0;
    for (const auto& [h, w] : sample) {
        if (h.is_trivial())
            continue;
        for (long sign : {1L, -1L}) {
            for (long m = 1;; ++m) {
                const Word g = power(h.root(), sign * m);
                if (static_cast<int>(g.length()) > radius)
                    break;
                phi.values[g] += w;
            }
        }
    }
    return phi;
}

PsdReport psd_check(const PositiveDefiniteFn& phi, const std::vector<std::vector<Word>>& tuples)
{
    std::vector<std::string> missing;
    for (const auto& tuple : tuples)
        for (const Word& gi : tuple)
            for (const Word& gj : tuple) {
                const Word p = multiply(gi, gj.inverse());
                if (static_cast<int>(p.length()) > phi.radius)
                    missing.push_back(p.str());
            }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        std::string list;
        for (const auto& s : missing)
            list += (list.empty() ? "" : ", ") + s;
        throw CoverageError("psd_check needs values outside ball(" + std::to_string(phi.radius) + "): " + list);
    }

    PsdReport rep;
    for (const auto& tuple : tuples) {
        const Eigen::Index n = static_cast<Eigen::Index>(tuple.size());
        Eigen::MatrixXd gram(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                gram(i, j) = phi.at(multiply(tuple[static_cast<std::size_t>(i)],
                                             tuple[static_cast<std::size_t>(j)].inverse()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
        const double lo = n ? es.eigenvalues().minCoeff() : 0.0;
        rep.min_eigenvalues.push_back(lo);
        if (lo < kPsdTolerance)
            ++rep.failures;
    }
    return rep;
}

namespace {

/// Linear interpolation between order statistics of a sorted sample.
double quantile(const std::vector<std::size_t>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) * (1.0 - frac) + static_cast<double>(sorted[hi]) * frac;
}

double least_squares_slope(const std::vector<EscapeRow>& rows, std::size_t from)
{
    const std::size_t n = rows.size() - from;
    if (n < 2)
        return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = from; i < rows.size(); ++i) {
        const double x = static_cast<double>(rows[i].step);
        sx += x;
        sy += rows[i].median;
        sxx += x * x;
        sxy += x * rows[i].median;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

} // namespace

EscapeReport srs_escape_experiment(const GroupMeasure& mu, const CyclicSubgroup& start, const EscapeOptions& opts)
{
    check_word(start.root(), mu.context());
    if (opts.trials == 0)
        throw PreconditionError("srs_escape_experiment needs at least one trial");
    mu.require_generating("srs_escape_experiment");

    EscapeReport rep;
    rep.degenerate = start.is_trivial();
    // lengths[t][i] = root length of trial i after t steps.
    std::vector<std::vector<std::size_t>> lengths(opts.steps + 1, std::vector<std::size_t>(opts.trials));
    rep.final_states.resize(opts.trials);

    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const SubgroupChain c = conjugation_chain(mu, start, opts.steps, opts.seed, i);
            for (std::size_t t = 0; t <= opts.steps; ++t)
                lengths[t][i] = c.states[t].root().length();
            rep.final_states[i] = c.states.back();
        }
    };
    const std::size_t threads = std::min<std::size_t>(std::max(1u, default_threads()), opts.trials);
    if (threads <= 1) {
        run(0, opts.trials);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (opts.trials + threads - 1) / threads;
        for (std::size_t b = 0; b < opts.trials; b += chunk)
            pool.emplace_back(run, b, std::min(opts.trials, b + chunk));
    }

    for (std::size_t t = 0; t <= opts.steps; ++t) {
        std::vector<std::size_t>& l = lengths[t];
        std::sort(l.begin(), l.end());
        const auto beyond = static_cast<std::size_t>(
            l.end() - std::upper_bound(l.begin(), l.end(), opts.threshold));
        rep.rows.push_back({t, quantile(l, 0.5), quantile(l, 0.25), quantile(l, 0.75),
                            static_cast<double>(beyond) / static_cast<double>(opts.trials)});
    }
    rep.slope = least_squares_slope(rep.rows, rep.rows.size() / 2);
    if (rep.degenerate)
        rep.verdict = "degenerate";
    else
        rep.verdict = rep.slope >= opts.min_slope ? "escaping" : "not escaping";
    return rep;
}

FreenessReport freeness_report(const GroupMeasure& mu, const BoundaryMassSource& nu, const std::vector<Word>& gens,
                               int depth, double threshold)
{
    require_same_context(mu.context(), nu.context(), "freeness_report");
    FreenessReport rep;
    rep.depth = depth;
    rep.threshold = threshold;
    const int m = static_cast<int>(mu.max_length());
    const int check_depth = nu.max_depth() == INT_MAX ? depth : std::min(depth, nu.max_depth() - m);
    rep.residual = stationarity_residual(mu, nu, check_depth);
    if (!(rep.residual < 1e-9))
        throw PreconditionError("freeness_report: nu is not mu-stationary (residual " +
                                std::to_string(rep.residual) + ")");
    rep.pdf_upper[Word{}] = 1.0;
    rep.essentially_free = true;
    for (const Word& g : gens) {
        FreenessRow row{g, fix_mass(g, nu, depth)};
        rep.essentially_free = rep.essentially_free && row.bound.upper < threshold;
        rep.pdf_upper[g] = row.bound.upper;
        rep.rows.push_back(std::move(row));
    }
    rep.verdict = (rep.essentially_free ? "essentially free at depth " : "not certified free at depth ") +
                  std::to_string(depth);
    return rep;
}

} // namespace statlab

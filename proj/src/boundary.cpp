#include "statlab/boundary.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "statlab/errors.hpp"

namespace statlab {

namespace {

void require_depth(int required, int available, const std::string& what)
{
    if (required > available)
        throw DepthUnderflow(what + " needs cylinder depth " + std::to_string(required) +
                                 ", have " + std::to_string(available),
                             required, available);
}

} // namespace

CylinderMeasure::CylinderMeasure(FreeGroupContext ctx, int depth) : ctx_(ctx), depth_(depth)
{
    if (depth < 1)
        throw PreconditionError("cylinder measure depth must be >= 1");
    levels_.resize(static_cast<std::size_t>(depth));
    for (int n = 1; n <= depth; ++n)
        levels_[static_cast<std::size_t>(n - 1)].assign(sphere_size(ctx.rank, n), 0.0);
}

CylinderMeasure CylinderMeasure::from_deepest(FreeGroupContext ctx, int depth, std::vector<double> deepest)
{
    CylinderMeasure m(ctx, depth);
    if (deepest.size() != m.levels_.back().size())
        throw MalformedInput("deepest level has " + std::to_string(deepest.size()) + " entries, expected " +
                             std::to_string(m.levels_.back().size()));
    m.levels_.back() = std::move(deepest);
    const std::size_t branch = static_cast<std::size_t>(2 * ctx.rank - 1);
    for (int n = depth; n >= 2; --n) {
        const auto& child = m.levels_[static_cast<std::size_t>(n - 1)];
        auto& parent = m.levels_[static_cast<std::size_t>(n - 2)];
        for (std::size_t i = 0; i < child.size(); ++i)
            parent[i / branch] += child[i];
    }
    return m;
}

std::size_t CylinderMeasure::index_of(const Word& w) const
{
    const std::size_t branch = static_cast<std::size_t>(2 * ctx_.rank - 1);
    std::size_t idx = w[0];
    for (std::size_t i = 1; i < w.length(); ++i) {
        const Letter back = inverse_letter(w[i - 1]);
        const Letter x = w[i];
        idx = idx * branch + (x < back ? x : x - 1u);
    }
    return idx;
}

double CylinderMeasure::mass(const Word& w) const
{
    if (w.is_identity())
        return 1.0;
    require_depth(static_cast<int>(w.length()), depth_, "cylinder [" + w.str() + "]");
    return levels_[w.length() - 1][index_of(w)];
}

CylinderMeasure CylinderMeasure::truncated(int depth) const
{
    if (depth > depth_)
        require_depth(depth, depth_, "truncation");
    CylinderMeasure m(ctx_, depth);
    for (int n = 0; n < depth; ++n)
        m.levels_[static_cast<std::size_t>(n)] = levels_[static_cast<std::size_t>(n)];
    return m;
}

double CylinderMeasure::consistency_error() const
{
    const std::size_t branch = static_cast<std::size_t>(2 * ctx_.rank - 1);
    double err = 0.0;
    for (const auto& level : levels_) {
        double s = 0.0;
        for (double v : level)
            s += v;
        err = std::max(err, std::abs(s - 1.0));
    }
    for (std::size_t n = 0; n + 1 < levels_.size(); ++n) {
        const auto& parent = levels_[n];
        const auto& child = levels_[n + 1];
        for (std::size_t j = 0; j < parent.size(); ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < branch; ++c)
                s += child[j * branch + c];
            err = std::max(err, std::abs(parent[j] - s));
        }
    }
    return err;
}

MarkovBoundaryMeasure::MarkovBoundaryMeasure(FreeGroupContext ctx, std::vector<double> initial,
                                             std::vector<std::vector<double>> transition)
    : ctx_(ctx), initial_(std::move(initial)), transition_(std::move(transition))
{
    const auto a = static_cast<std::size_t>(ctx.alphabet_size());
    if (initial_.size() != a || transition_.size() != a)
        throw MalformedInput("Markov boundary measure needs 2k initial masses and 2k transition rows");
    for (auto& row : transition_)
        if (row.size() != a)
            throw MalformedInput("Markov boundary measure transition rows need 2k entries");
}

MarkovBoundaryMeasure MarkovBoundaryMeasure::uniform(FreeGroupContext ctx)
{
    const int a = ctx.alphabet_size();
    std::vector<double> init(static_cast<std::size_t>(a), 1.0 / a);
    std::vector<std::vector<double>> trans(static_cast<std::size_t>(a),
                                           std::vector<double>(static_cast<std::size_t>(a)));
    for (int l = 0; l < a; ++l)
        for (int x = 0; x < a; ++x)
            if (x != inverse_letter(static_cast<Letter>(l)))
                trans[static_cast<std::size_t>(l)][static_cast<std::size_t>(x)] = 1.0 / (a - 1);
    return MarkovBoundaryMeasure(ctx, std::move(init), std::move(trans));
}

int MarkovBoundaryMeasure::max_depth() const { return INT_MAX; }

double MarkovBoundaryMeasure::mass(const Word& w) const
{
    if (w.is_identity())
        return 1.0;
    double m = initial_[w[0]];
    for (std::size_t i = 1; i < w.length() && m != 0.0; ++i)
        m *= transition_[w[i - 1]][w[i]];
    return m;
}

CylinderMeasure MarkovBoundaryMeasure::to_table(int depth) const
{
    return CylinderMeasure::from_function(ctx_, depth, [this](const Word& w) { return mass(w); });
}

CylinderMeasure uniform_boundary_measure(FreeGroupContext ctx, int depth)
{
    const double a = ctx.alphabet_size();
    return CylinderMeasure::from_function(ctx, depth, [a](const Word& w) {
        return 1.0 / (a * std::pow(a - 1.0, static_cast<double>(w.length() - 1)));
    });
}

double translate_mass(const Word& g, const Word& w, const BoundaryMassSource& nu)
{
    if (w.is_identity())
        return 1.0;
    const std::size_t c = common_prefix_length(g, w);
    const Word ginv = g.inverse();
    if (c == w.length())
        return 1.0 - nu.mass(ginv.prefix(g.length() - w.length() + 1));
    return nu.mass(multiply(ginv, w));
}

CylinderMeasure translate(const Word& g, const BoundaryMassSource& nu, int out_depth)
{
    check_word(g, nu.context());
    require_depth(static_cast<int>(g.length()) + out_depth, nu.max_depth(), "translate by " + g.str());
    const Word ginv = g.inverse();
    return CylinderMeasure::from_function(nu.context(), out_depth, [&](const Word& w) {
        const std::size_t c = common_prefix_length(g, w);
        if (c == w.length())
            return 1.0 - nu.mass(ginv.prefix(g.length() - w.length() + 1));
        return nu.mass(multiply(ginv, w));
    });
}

CylinderMeasure translate(const Word& g, const CylinderMeasure& nu)
{
    const int out = nu.depth() - static_cast<int>(g.length());
    if (out < 1)
        require_depth(static_cast<int>(g.length()) + 1, nu.depth(), "translate by " + g.str());
    return translate(g, static_cast<const BoundaryMassSource&>(nu), out);
}

double stationarity_residual(const GroupMeasure& mu, const BoundaryMassSource& nu, int depth)
{
    require_same_context(mu.context(), nu.context(), "stationarity_residual");
    const int m = static_cast<int>(mu.max_length());
    if (depth < 0) {
        if (nu.max_depth() == INT_MAX)
            throw PreconditionError("stationarity_residual needs an explicit depth for this measure");
        depth = nu.max_depth() - m;
    }
    require_depth(depth + m, nu.max_depth(), "stationarity residual");
    if (depth < 1)
        require_depth(m + 1, nu.max_depth(), "stationarity residual");
    double r = 0.0;
    for (int n = 1; n <= depth; ++n) {
        for (const Word& w : sphere(nu.context().rank, n)) {
            double s = 0.0;
            for (const auto& a : mu.atoms())
                s += a.mass * translate_mass(a.word, w, nu);
            r = std::max(r, std::abs(s - nu.mass(w)));
        }
    }
    return r;
}

double total_variation(const BoundaryMassSource& a, const BoundaryMassSource& b, int level)
{
    double s = 0.0;
    for (const Word& w : sphere(a.context().rank, level))
        s += std::abs(a.mass(w) - b.mass(w));
    return 0.5 * s;
}

std::vector<double> first_passage_probabilities(const GroupMeasure& mu)
{
    if (!mu.nearest_neighbour())
        throw PreconditionError("first-passage probabilities need a measure supported in ball(1)");
    const int a = mu.context().alphabet_size();
    std::vector<double> p(static_cast<std::size_t>(a), 0.0);
    for (const auto& atom : mu.atoms())
        if (!atom.word.is_identity())
            p[atom.word[0]] = atom.mass;
    std::vector<double> F(static_cast<std::size_t>(a), 0.0);

    if (a == 2) {
        // Biased walk on Z: P(ever reach +1) = min(1, p / q).
        F[0] = p[1] > 0.0 ? std::min(1.0, p[0] / p[1]) : (p[0] > 0.0 ? 1.0 : 0.0);
        F[1] = p[0] > 0.0 ? std::min(1.0, p[1] / p[0]) : (p[1] > 0.0 ? 1.0 : 0.0);
        return F;
    }

    // F(s) = mu(s) / (1 - mu(e) - sum_{t != s} mu(t) F(t^-1)), iterated from 0;
    // the iterates increase to the minimal solution.
    const double pe = mu.mass(Word{});
    for (int it = 0; it < 1'000'000; ++it) {
        double change = 0.0;
        for (int s = 0; s < a; ++s) {
            double denom = 1.0 - pe;
            for (int t = 0; t < a; ++t)
                if (t != s)
                    denom -= p[static_cast<std::size_t>(t)] * F[inverse_letter(static_cast<Letter>(t))];
            double v = denom > 0.0 ? std::min(1.0, p[static_cast<std::size_t>(s)] / denom) : 1.0;
            change = std::max(change, std::abs(v - F[static_cast<std::size_t>(s)]));
            F[static_cast<std::size_t>(s)] = v;
        }
        if (change < 1e-17)
            break;
    }
    return F;
}

MarkovBoundaryMeasure hitting_measure(const GroupMeasure& mu)
{
    const std::vector<double> F = first_passage_probabilities(mu);
    const int a = mu.context().alphabet_size();
    std::vector<double> level1(static_cast<std::size_t>(a));
    for (int s = 0; s < a; ++s) {
        const double fs = F[static_cast<std::size_t>(s)];
        const double fi = F[inverse_letter(static_cast<Letter>(s))];
        if (fs * fi > 1.0 - 1e-12)
            throw PreconditionError("the walk is recurrent; it has no exit law");
        level1[static_cast<std::size_t>(s)] = fs * (1.0 - fi) / (1.0 - fs * fi);
    }
    std::vector<std::vector<double>> trans(static_cast<std::size_t>(a),
                                           std::vector<double>(static_cast<std::size_t>(a), 0.0));
    for (int l = 0; l < a; ++l) {
        const Letter back = inverse_letter(static_cast<Letter>(l));
        const double rest = 1.0 - level1[back];
        for (int x = 0; x < a; ++x) {
            if (x == back)
                continue;
            trans[static_cast<std::size_t>(l)][static_cast<std::size_t>(x)] =
                rest > 0.0 ? level1[static_cast<std::size_t>(x)] / rest : 1.0 / (a - 1);
        }
    }
    return MarkovBoundaryMeasure(mu.context(), std::move(level1), std::move(trans));
}

CylinderMeasure markov_extend(const CylinderMeasure& nu, int depth)
{
    if (depth <= nu.depth())
        return nu.truncated(depth);
    const int d0 = nu.depth();
    const int branch = 2 * nu.context().rank - 1;
    std::vector<double> prev = nu.level(d0);
    for (int n = d0 + 1; n <= depth; ++n) {
        std::vector<double> next(sphere_size(nu.context().rank, n));
        std::size_t i = 0;
        for (const Word& wx : sphere(nu.context().rank, n)) {
            const double parent = prev[i / static_cast<std::size_t>(branch)];
            const Word sx = wx.suffix_from(static_cast<std::size_t>(n - d0));
            const double num = nu.mass(sx);
            // With depth-1 data the next letter is conditioned on not backtracking.
            const double denom = d0 >= 2 ? nu.mass(sx.prefix(static_cast<std::size_t>(d0 - 1)))
                                         : 1.0 - nu.mass(Word::generator(letter_index(wx[wx.length() - 2]),
                                                                         !letter_is_inverse(wx[wx.length() - 2])));
            next[i] = denom > 0.0 ? parent * num / denom : parent / branch;
            ++i;
        }
        prev = std::move(next);
    }
    return CylinderMeasure::from_deepest(nu.context(), depth, std::move(prev));
}

namespace {

StationarySolution solve_rank_one(const GroupMeasure& mu, const SolveOptions& opts)
{
    double drift = 0.0;
    bool zero = false;
    if (mu.exact()) {
        Rational d = 0;
        for (std::size_t i = 0; i < mu.support_size(); ++i) {
            const Word& w = mu.atoms()[i].word;
            long s = w.is_identity() ? 0 : (letter_is_inverse(w[0]) ? -1 : 1) * static_cast<long>(w.length());
            d += mu.exact_masses()[i] * s;
        }
        zero = d == 0;
        drift = static_cast<double>(d);
    } else {
        for (const auto& a : mu.atoms()) {
            long s = a.word.is_identity() ? 0
                                          : (letter_is_inverse(a.word[0]) ? -1 : 1) * static_cast<long>(a.word.length());
            drift += a.mass * static_cast<double>(s);
        }
        zero = std::abs(drift) < 1e-14;
    }
    if (zero)
        throw PreconditionError("zero-drift walk on Z is recurrent; it has no exit law");
    const Letter end = drift > 0 ? make_letter(1, false) : make_letter(1, true);
    std::vector<double> init(2, 0.0);
    init[end] = 1.0;
    std::vector<std::vector<double>> trans(2, std::vector<double>(2, 0.0));
    trans[0][0] = 1.0;
    trans[1][1] = 1.0;
    MarkovBoundaryMeasure exit(mu.context(), init, trans);

    StationarySolution sol{exit.to_table(opts.depth), 0, 0.0, opts.depth, {}, {}};
    sol.residual = stationarity_residual(mu, exit, opts.depth);
    if (mu.nearest_neighbour())
        sol.hitting_tv = total_variation(sol.measure, hitting_measure(mu), opts.depth);
    return sol;
}

} // namespace

StationarySolution solve_stationary(const GroupMeasure& mu, const SolveOptions& opts)
{
    if (opts.depth < 1)
        throw PreconditionError("solve_stationary needs depth >= 1");
    mu.require_generating("solve_stationary");
    if (mu.context().rank == 1)
        return solve_rank_one(mu, opts);

    const int m = static_cast<int>(mu.max_length());
    const int work = opts.depth + 2 * m;
    CylinderMeasure nu = opts.seed ? markov_extend(*opts.seed, work)
                                   : uniform_boundary_measure(mu.context(), work);
    if (opts.seed)
        require_same_context(mu.context(), opts.seed->context(), "solve_stationary seed");

    std::vector<double> trace;
    double residual = INFINITY;
    for (int it = 1; it <= opts.max_iter; ++it) {
        CylinderMeasure next = CylinderMeasure::from_function(mu.context(), work - m, [&](const Word& w) {
            double s = 0.0;
            for (const auto& a : mu.atoms())
                s += a.mass * translate_mass(a.word, w, nu);
            return s;
        });
        residual = 0.0;
        for (int n = 1; n <= work - m; ++n) {
            const auto& x = next.level(n);
            const auto& y = nu.level(n);
            for (std::size_t i = 0; i < x.size(); ++i)
                residual = std::max(residual, std::abs(x[i] - y[i]));
        }
        trace.push_back(residual);
        if (residual < opts.tol) {
            StationarySolution sol{nu.truncated(opts.depth), it, residual, work, std::move(trace), {}};
            if (mu.nearest_neighbour())
                sol.hitting_tv = total_variation(sol.measure, hitting_measure(mu), opts.depth);
            return sol;
        }
        nu = markov_extend(next, work);
    }
    throw ConvergenceError("solve_stationary did not reach tol " + std::to_string(opts.tol) + " in " +
                               std::to_string(opts.max_iter) + " iterations; last residual " +
                               std::to_string(residual),
                           residual);
}

ConditionalMeasure conditional_measure(const BoundaryMassSource& nu, const PathSample& path,
                                       std::size_t n, int out_depth)
{
    if (n >= path.positions.size())
        throw PreconditionError("conditional_measure: path has only " +
                                std::to_string(path.positions.size() - 1) + " steps");
    const Word& g = path.positions[n];
    require_depth(static_cast<int>(g.length()) + out_depth, nu.max_depth(),
                  "conditional measure at step " + std::to_string(n));
    ConditionalMeasure c{translate(g, nu, out_depth), 0.0, g};
    for (double v : c.measure.level(1))
        c.top_mass = std::max(c.top_mass, v);
    return c;
}

BoundaryPoint boundary_map(const PathSample& path, int min_depth)
{
    const std::size_t n = path.positions.size() - 1;
    const std::size_t start = n - n / 3;
    const Word& first = path.positions[start];
    std::size_t len = first.length();
    for (std::size_t j = start + 1; j <= n && len > 0; ++j)
        len = std::min(len, common_prefix_length(first, path.positions[j]));
    BoundaryPoint p{first.prefix(len), static_cast<int>(len)};
    if (p.resolved_depth < min_depth)
        throw UnresolvedError("boundary_map: only " + std::to_string(len) +
                                  " letters are stable over the final third of the path",
                              p.prefix.str());
    return p;
}

int CylinderFunction::level() const
{
    std::size_t l = 0;
    for (const auto& [w, c] : terms)
        l = std::max(l, w.length());
    return static_cast<int>(l);
}

Complex CylinderFunction::at(const Word& point_prefix) const
{
    Complex s{};
    for (const auto& [w, c] : terms)
        if (common_prefix_length(w, point_prefix) == w.length())
            s += c;
    return s;
}

double CylinderFunction::sup_norm_bound() const
{
    double s = 0.0;
    for (const auto& [w, c] : terms)
        s += std::abs(c);
    return s;
}

Complex HarmonicFunction::value(const Word& g) const
{
    auto it = values_.find(g);
    if (it == values_.end())
        throw CoverageError("harmonic function is tabulated on ball(" + std::to_string(radius_) +
                            "), missing " + g.str());
    return it->second;
}

double HarmonicFunction::sup_abs() const
{
    double s = 0.0;
    for (const auto& [w, v] : values_)
        s = std::max(s, std::abs(v));
    return s;
}

double HarmonicFunction::harmonicity_residual(const GroupMeasure& mu) const
{
    const int r = radius_ - static_cast<int>(mu.max_length());
    if (r < 0)
        throw CoverageError("harmonicity residual needs radius >= " + std::to_string(mu.max_length()));
    double res = 0.0;
    for_each_in_ball(ctx_.rank, r, [&](const Word& g) {
        Complex s{};
        for (const auto& a : mu.atoms())
            s += a.mass * value(multiply(g, a.word));
        res = std::max(res, std::abs(value(g) - s));
    });
    return res;
}

HarmonicFunction poisson_map(const CylinderFunction& f, const BoundaryMassSource& nu,
                             const GroupMeasure& mu, int radius)
{
    require_same_context(mu.context(), nu.context(), "poisson_map");
    if (radius < 0)
        throw PreconditionError("poisson_map needs radius >= 0");
    for (const auto& [w, c] : f.terms)
        check_word(w, nu.context());
    require_depth(radius + f.level(), nu.max_depth(), "poisson map on ball(" + std::to_string(radius) + ")");
    HarmonicFunction h(nu.context(), radius);
    for_each_in_ball(nu.context().rank, radius, [&](const Word& g) {
        Complex s{};
        for (const auto& [w, c] : f.terms)
            s += c * translate_mass(g, w, nu);
        h.set(g, s);
    });
    if (radius >= static_cast<int>(mu.max_length()))
        h.residual = h.harmonicity_residual(mu);
    return h;
}

HarmonicProduct harmonic_multiply(const HarmonicFunction& f1, const HarmonicFunction& f2,
                                  const GroupMeasure& mu, int n_max)
{
    require_same_context(f1.context(), f2.context(), "harmonic_multiply");
    require_same_context(f1.context(), mu.context(), "harmonic_multiply");
    if (n_max < 1)
        throw PreconditionError("harmonic_multiply needs n_max >= 1");
    const int R = std::min(f1.radius(), f2.radius());
    const int m = static_cast<int>(mu.max_length());
    const int n = m == 0 ? n_max : std::min(n_max, R / m);
    if (n < 1)
        throw CoverageError("harmonic_multiply: inputs on ball(" + std::to_string(R) +
                            ") cannot absorb one step of length " + std::to_string(m));
    const int out = R - n * m;

    std::vector<Word> pts = ball(f1.context().rank, out);
    std::vector<Complex> prev, cur(pts.size());
    std::vector<double> cauchy;
    GroupMeasure power = GroupMeasure::delta(mu.context(), Word{});
    for (int step = 1; step <= n; ++step) {
        power = convolve_measures(power, mu);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Complex s{};
            for (const auto& a : power.atoms()) {
                const Word gh = multiply(pts[i], a.word);
                s += a.mass * f1.value(gh) * f2.value(gh);
            }
            cur[i] = s;
        }
        if (!prev.empty()) {
            double d = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                d = std::max(d, std::abs(cur[i] - prev[i]));
            cauchy.push_back(d);
        }
        prev = cur;
    }
    HarmonicProduct out_product{HarmonicFunction(f1.context(), out), std::move(cauchy), n, n < n_max};
    for (std::size_t i = 0; i < pts.size(); ++i)
        out_product.product.set(pts[i], cur[i]);
    return out_product;
}

FixMassBound fix_mass(const Word& g, const BoundaryMassSource& nu, int depth)
{
    if (g.is_identity())
        throw PreconditionError("fix_mass: the identity fixes the whole boundary");
    check_word(g, nu.context());
    if (depth < 1)
        throw PreconditionError("fix_mass needs depth >= 1");
    require_depth(depth, nu.max_depth(), "fix_mass");
    FixMassBound b;
    b.depth = depth;
    b.attracting_prefix = axis_prefix(g, static_cast<std::size_t>(depth));
    b.repelling_prefix = axis_prefix(g.inverse(), static_cast<std::size_t>(depth));
    b.upper = nu.mass(b.attracting_prefix);
    if (b.repelling_prefix != b.attracting_prefix)
        b.upper += nu.mass(b.repelling_prefix);
    return b;
}

FixMassBound fix_mass(const Word& g, const CylinderMeasure& nu)
{
    return fix_mass(g, static_cast<const BoundaryMassSource&>(nu), nu.depth());
}

} // namespace statlab

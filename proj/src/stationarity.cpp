#include "statlab/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "statlab/errors.hpp"
#include "statlab/rng.hpp"

namespace statlab {

namespace {

AlgebraElement divided(const AlgebraElement& x, int n)
{
    std::vector<Term> terms(x.terms().begin(), x.terms().end());
    for (auto& t : terms)
        t.coeff /= static_cast<double>(n);
    return AlgebraElement::from_terms(x.context(), std::move(terms));
}

AlgebraElement centered(const AlgebraElement& a)
{
    return a - AlgebraElement::delta(a.context(), Word{}, canonical_trace(a));
}

} // namespace

std::string CesaroReport::verdict() const
{
    if (mu_generating == Generating::No)
        return "not generating";
    return decaying ? "consistent with unique stationarity" : "inconclusive";
}

CesaroReport cesaro_test(const AlgebraElement& a, const GroupMeasure& mu, int n_max,
                         const CesaroOptions& opts, std::string element_id)
{
    require_same_context(a.context(), mu.context(), "cesaro_test");
    if (n_max < 1)
        throw PreconditionError("cesaro_test needs n_max >= 1");
    CesaroReport rep;
    rep.element_id = std::move(element_id);
    rep.trace = canonical_trace(a);
    rep.mu_generating = mu.generating();

    const AlgebraElement scalar = AlgebraElement::delta(a.context(), Word{}, rep.trace);
    MomentOptions mopts{opts.moment_cap, false, 0};
    AlgebraElement power = a;
    AlgebraElement sum = a;
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) {
            if (mu.support_size() * power.support_size() > 4 * opts.support_cap) {
                rep.partial = true;
                break;
            }
            power = measure_convolve_element(mu, power);
            if (power.support_size() > opts.support_cap) {
                rep.partial = true;
                break;
            }
            sum += power;
        }
        const AlgebraElement b = divided(sum, n) - scalar;
        const NormBracket br = certify_norm(b, opts.n_moments, mopts);
        rep.rows.push_back({n, br.lower, br.upper, br.lower_method, br.upper_method, b.support_size(), br.capped});
    }
    const auto& r = rep.rows;
    if (r.size() >= 3) {
        const std::size_t k = r.size();
        auto drops = [](double a, double b) { return b < a * (1.0 - 1e-9); };
        rep.decaying = drops(r[k - 3].upper, r[k - 2].upper) && drops(r[k - 2].upper, r[k - 1].upper);
    }
    return rep;
}

UpperBound certify_average(FreeGroupContext ctx, const Word& target, const std::vector<Word>& conjugators)
{
    if (conjugators.empty())
        throw PreconditionError("certify_average needs at least one conjugator");
    const double share = 1.0 / static_cast<double>(conjugators.size());
    std::vector<Term> terms;
    terms.reserve(conjugators.size());
    for (const Word& h : conjugators)
        terms.push_back({conjugate(target, h), share});
    return certify_upper(AlgebraElement::from_terms(ctx, std::move(terms)));
}

namespace {

/// Writes t = w^-r t' w^r with r maximal and returns t'. With h_k = w^k the
/// averages for t and t' are conjugate by lambda_{w^r}, so they have the
/// same norm.
Word strip_axis(const Word& t, const Word& w)
{
    const std::string_view s = t.codes();
    const Word winv = w.inverse();
    const std::string_view a = winv.codes();
    const std::string_view b = w.codes();
    const std::size_t len = b.size();
    std::size_t lead = 0, trail = 0;
    while ((lead + 1) * len <= s.size() && s.substr(lead * len, len) == a)
        ++lead;
    while ((trail + 1) * len <= s.size() && s.substr(s.size() - (trail + 1) * len, len) == b)
        ++trail;
    std::size_t r = std::min(lead, trail);
    while (r > 0 && 2 * r * len > s.size())
        --r;
    if (r == 0)
        return t;
    return t.prefix(s.size() - r * len).suffix_from(r * len);
}

bool is_geometric(const std::vector<Word>& conj, const std::optional<Word>& w)
{
    if (!w || w->is_identity() || !is_cyclically_reduced(*w))
        return false;
    Word p;
    for (const Word& h : conj) {
        p = multiply(p, *w);
        if (h != p)
            return false;
    }
    return true;
}

/// Per-target bounds for one conjugator tuple, memoized on stripped targets.
class AverageEvaluator {
public:
    AverageEvaluator(FreeGroupContext ctx, const std::vector<Word>& conj, const std::optional<Word>& w)
        : ctx_(ctx), conj_(conj), w_(w), geometric_(is_geometric(conj, w))
    {
    }

    double bound(const Word& t)
    {
        const Word key = geometric_ ? strip_axis(t, *w_) : t;
        auto it = memo_.find(key);
        if (it != memo_.end())
            return it->second;
        const double u = certify_average(ctx_, key, conj_).value;
        memo_.emplace(key, u);
        return u;
    }

private:
    FreeGroupContext ctx_;
    const std::vector<Word>& conj_;
    std::optional<Word> w_;
    bool geometric_;
    std::unordered_map<Word, double, WordHash> memo_;
};

struct Trial {
    std::vector<Word> conj;
    std::optional<Word> w;
    std::vector<double> per_target;
    double max = 0.0;
    bool complete = false;
};

Trial evaluate(FreeGroupContext ctx, const std::vector<Word>& targets, std::vector<Word> conj,
               std::optional<Word> w, double eps, bool early_exit)
{
    Trial t{std::move(conj), std::move(w), {}, 0.0, true};
    AverageEvaluator ev(ctx, t.conj, t.w);
    t.per_target.reserve(targets.size());
    for (const Word& target : targets) {
        const double u = ev.bound(target);
        t.per_target.push_back(u);
        t.max = std::max(t.max, u);
        if (early_exit && u >= eps) {
            t.complete = t.per_target.size() == targets.size();
            break;
        }
    }
    return t;
}

PowersCertificate to_certificate(const std::vector<Word>& targets, Trial t, double eps, const char* strategy)
{
    PowersCertificate c;
    c.targets = targets;
    c.conjugators = std::move(t.conj);
    c.w = std::move(t.w);
    c.target_upper = std::move(t.per_target);
    c.upper = t.max;
    c.eps = eps;
    c.success = t.complete && t.max < eps;
    c.strategy = strategy;
    return c;
}

std::vector<Word> powers_of(const Word& w, int n)
{
    std::vector<Word> out;
    Word p;
    for (int k = 1; k <= n; ++k) {
        p = multiply(p, w);
        out.push_back(p);
    }
    return out;
}

} // namespace

PowersCertificate powers_search(FreeGroupContext ctx, const std::vector<Word>& raw_targets, double eps,
                                const PowersOptions& opts)
{
    if (!(eps > 0.0))
        throw PreconditionError("powers_search needs eps > 0");
    if (opts.max_n < 1)
        throw PreconditionError("powers_search needs max_n >= 1");
    std::vector<Word> targets = raw_targets;
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (const Word& t : targets) {
        if (t.is_identity())
            throw PreconditionError("powers_search: the identity cannot be averaged away");
        check_word(t, ctx);
    }

    // Best incomplete attempt, re-evaluated in full on failure.
    std::optional<Trial> best;
    auto consider = [&](const Trial& t) {
        if (!best || t.max < best->max)
            best = t;
    };

    if (opts.strategy == PowersStrategy::Geometric) {
        std::vector<Word> candidates;
        if (opts.fixed_w) {
            check_word(*opts.fixed_w, ctx);
            if (opts.fixed_w->is_identity())
                throw PreconditionError("powers_search: w must not be the identity");
            candidates.push_back(*opts.fixed_w);
        } else {
            for (const Word& w : ball(ctx.rank, opts.word_radius))
                if (!w.is_identity() && is_cyclically_reduced(w))
                    candidates.push_back(w);
        }
        for (int n = 1; n <= opts.max_n; ++n) {
            for (const Word& w : candidates) {
                Trial t = evaluate(ctx, targets, powers_of(w, n), w, eps, true);
                if (t.complete && t.max < eps)
                    return to_certificate(targets, std::move(t), eps, "geometric");
                consider(t);
            }
        }
        Trial full = evaluate(ctx, targets, best->conj, best->w, eps, false);
        return to_certificate(targets, std::move(full), eps, "geometric");
    }

    const std::vector<Word> pool = ball(ctx.rank, opts.radius);
    for (int n = 1; n <= opts.max_n; ++n) {
        CounterRng rng(opts.seed, static_cast<std::uint64_t>(n));
        std::optional<Trial> winner;
        for (int k = 0; k < opts.tries_per_n; ++k) {
            std::vector<Word> conj;
            for (int i = 0; i < n; ++i)
                conj.push_back(pool[rng.below(pool.size())]);
            Trial t = evaluate(ctx, targets, std::move(conj), std::nullopt, eps, true);
            if (t.complete && t.max < eps) {
                if (!winner || t.conj < winner->conj)
                    winner = std::move(t);
            } else {
                consider(t);
            }
        }
        if (winner)
            return to_certificate(targets, std::move(*winner), eps, "random");
    }
    Trial full = evaluate(ctx, targets, best->conj, std::nullopt, eps, false);
    return to_certificate(targets, std::move(full), eps, "random");
}

PowersCertificate powers_search(FreeGroupContext ctx, const Word& g, double eps, const PowersOptions& opts)
{
    if (g.is_identity())
        throw PreconditionError("powers_search: g must not be the identity");
    return powers_search(ctx, std::vector<Word>{g}, eps, opts);
}

bool verify_certificate(FreeGroupContext ctx, const PowersCertificate& cert)
{
    if (cert.conjugators.empty() || cert.target_upper.size() != cert.targets.size())
        return false;
    Trial t = evaluate(ctx, cert.targets, cert.conjugators, cert.w, cert.eps, false);
    if (t.per_target != cert.target_upper || t.max != cert.upper)
        return false;
    return cert.success == (t.max < cert.eps);
}

// ----------------------------------------------------------------- builder

namespace {

std::vector<Word> conjugator_products(const std::vector<Word>& atoms, int fewer_than, std::size_t cap)
{
    std::unordered_set<Word, WordHash> seen{Word{}};
    std::vector<Word> all{Word{}};
    std::vector<Word> layer{Word{}};
    for (int r = 1; r < fewer_than && !atoms.empty(); ++r) {
        std::vector<Word> next;
        for (const Word& h : layer) {
            for (const Word& g : atoms) {
                Word p = multiply(h, g);
                if (seen.insert(p).second) {
                    next.push_back(p);
                    all.push_back(p);
                    if (all.size() > cap)
                        throw ConstructionError("more than " + std::to_string(cap) +
                                                " conjugator products at depth " + std::to_string(r));
                }
            }
        }
        layer = std::move(next);
    }
    std::sort(all.begin(), all.end());
    return all;
}

std::vector<Word> level_targets(const std::vector<Word>& base, const std::vector<Word>& products)
{
    std::set<Word> out;
    for (const Word& h : products)
        for (const Word& c : base)
            out.insert(conjugate(c, h));
    return {out.begin(), out.end()};
}

std::vector<Word> atoms_before(const std::vector<GroupMeasure>& levels, std::size_t l)
{
    std::set<Word> s;
    for (std::size_t i = 0; i < l; ++i)
        for (const auto& a : levels[i].atoms())
            s.insert(a.word);
    return {s.begin(), s.end()};
}

std::vector<Rational> level_weights(int L)
{
    std::vector<Rational> w;
    for (int l = 1; l <= L; ++l) {
        const int e = l < L ? l : L - 1;
        w.push_back(Rational(1, boost::multiprecision::cpp_int(1) << e));
    }
    return w;
}

std::vector<FinalCheck> final_checks(const CStarSimpleMeasure& m, const BuilderOptions& opts)
{
    std::vector<FinalCheck> out;
    const int L = static_cast<int>(m.levels.size());
    for (int j = 1; j <= L; ++j) {
        const int nj = m.schedule[static_cast<std::size_t>(j - 1)];
        Rational low_base = 0;
        for (int i = 1; i < j; ++i)
            low_base += m.weights[static_cast<std::size_t>(i - 1)];
        Rational low_exact = 1;
        for (int t = 0; t < nj; ++t)
            low_exact *= low_base;
        double beta = 0.0;
        for (int l = j; l <= L; ++l)
            beta = std::max(beta, m.levels[static_cast<std::size_t>(l - 1)].search.upper);
        for (std::size_t s = 0; s < m.family.size(); ++s) {
            const AlgebraElement b = centered(m.family[s]);
            if (b.is_zero())
                continue;
            FinalCheck c;
            c.j = j;
            c.n_j = nj;
            c.element = s;
            c.low_level_mass = static_cast<double>(low_exact);
            c.split_bound = c.low_level_mass * norm_upper_bound(b) + (1.0 - c.low_level_mass) * beta * b.l1_norm();
            AlgebraElement x = b;
            bool feasible = true;
            for (int t = 0; t < nj && feasible; ++t) {
                if (m.mu.support_size() * x.support_size() > 20 * opts.direct_cap) {
                    feasible = false;
                    break;
                }
                x = measure_convolve_element(m.mu, x);
                feasible = x.support_size() <= opts.direct_cap;
            }
            if (feasible)
                c.direct_bound = norm_upper_bound(x);
            c.bound = c.direct_bound >= 0.0 ? std::min(c.split_bound, c.direct_bound) : c.split_bound;
            c.threshold = 5.0 * m.eps[static_cast<std::size_t>(j - 1)];
            c.pass = c.bound < c.threshold;
            out.push_back(c);
        }
    }
    return out;
}

std::vector<double> resolve_eps(const BuilderOptions& opts)
{
    std::vector<double> eps = opts.eps;
    if (eps.empty())
        for (int l = 1; l <= opts.levels; ++l)
            eps.push_back(std::ldexp(1.0, -l));
    if (static_cast<int>(eps.size()) != opts.levels)
        throw PreconditionError("builder needs one eps per level");
    return eps;
}

struct FamilyData {
    std::vector<Word> base;
    double l1 = 0.0;
};

FamilyData family_data(const std::vector<AlgebraElement>& family)
{
    FamilyData d;
    std::set<Word> base;
    for (const auto& a : family) {
        const AlgebraElement b = centered(a);
        d.l1 = std::max(d.l1, b.l1_norm());
        for (const auto& t : b.terms())
            base.insert(t.word);
    }
    d.base.assign(base.begin(), base.end());
    return d;
}

} // namespace

bool CStarSimpleMeasure::all_pass() const
{
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const FinalCheck& c) { return c.pass; });
}

CStarSimpleMeasure build_c_star_simple_measure(const std::vector<AlgebraElement>& family, const BuilderOptions& opts)
{
    if (family.empty())
        throw PreconditionError("builder needs a nonempty test family");
    if (opts.levels < 1)
        throw PreconditionError("builder needs at least one level");
    const FreeGroupContext ctx = family.front().context();
    for (const auto& a : family) {
        require_same_context(ctx, a.context(), "build_c_star_simple_measure");
        if (a.l1_norm() > 1.0 + 1e-12)
            throw PreconditionError("test family members must have l1 norm at most 1");
    }

    CStarSimpleMeasure m;
    m.ctx = ctx;
    m.family = family;
    m.schedule = averaging_schedule(opts.levels);
    m.eps = resolve_eps(opts);
    const FamilyData fam = family_data(family);

    for (int l = 1; l <= opts.levels; ++l) {
        LevelCertificate lc;
        lc.level = l;
        lc.eps = m.eps[static_cast<std::size_t>(l - 1)];
        lc.schedule_n = m.schedule[static_cast<std::size_t>(l - 1)];
        lc.family_l1 = fam.l1;
        const std::vector<Word> products = conjugator_products(
            atoms_before(m.level_measures, static_cast<std::size_t>(l - 1)), lc.schedule_n, opts.product_cap);
        lc.conjugator_products = products.size();
        const std::vector<Word> targets = level_targets(fam.base, products);
        lc.targets = targets.size();
        if (targets.empty()) {
            lc.search.conjugators = {Word{}};
            lc.search.eps = lc.eps;
            lc.search.success = true;
            lc.search.strategy = "none";
        } else {
            lc.search = powers_search(ctx, targets, lc.eps / fam.l1, opts.search);
            if (!lc.search.success)
                throw ConstructionError("level " + std::to_string(l) + ": best certified bound " +
                                        std::to_string(lc.search.upper * fam.l1) + " is not below " +
                                        std::to_string(lc.eps));
        }
        lc.bound = lc.search.upper * fam.l1;
        std::vector<std::pair<Word, Rational>> atoms;
        for (const Word& h : lc.search.conjugators)
            atoms.emplace_back(h, Rational(1, static_cast<long>(lc.search.conjugators.size())));
        m.level_measures.push_back(GroupMeasure::from_exact(ctx, std::move(atoms)));
        m.levels.push_back(std::move(lc));
    }

    m.weights = level_weights(opts.levels);
    m.mu = mixture(m.level_measures, m.weights);
    m.tail_mass = std::ldexp(1.0, -opts.levels);
    m.checks = final_checks(m, opts);
    return m;
}

bool verify_construction(const CStarSimpleMeasure& m, const BuilderOptions& opts)
{
    const int L = static_cast<int>(m.levels.size());
    if (L != opts.levels || m.schedule != averaging_schedule(L) || m.eps != resolve_eps(opts))
        return false;
    const FamilyData fam = family_data(m.family);
    for (int l = 1; l <= L; ++l) {
        const LevelCertificate& lc = m.levels[static_cast<std::size_t>(l - 1)];
        const std::vector<Word> products = conjugator_products(
            atoms_before(m.level_measures, static_cast<std::size_t>(l - 1)), lc.schedule_n, opts.product_cap);
        const std::vector<Word> targets = level_targets(fam.base, products);
        if (targets.size() != lc.targets || products.size() != lc.conjugator_products)
            return false;
        if (!targets.empty()) {
            if (targets != lc.search.targets || !verify_certificate(m.ctx, lc.search))
                return false;
            if (!(lc.search.upper * fam.l1 < lc.eps) || lc.bound != lc.search.upper * fam.l1)
                return false;
        }
    }
    if (m.weights != level_weights(L))
        return false;
    const GroupMeasure mu = mixture(m.level_measures, m.weights);
    if (mu.support_size() != m.mu.support_size())
        return false;
    for (std::size_t i = 0; i < mu.support_size(); ++i)
        if (mu.atoms()[i].word != m.mu.atoms()[i].word || mu.exact_masses()[i] != m.mu.exact_masses()[i])
            return false;
    const std::vector<FinalCheck> checks = final_checks(m, opts);
    if (checks.size() != m.checks.size())
        return false;
    for (std::size_t i = 0; i < checks.size(); ++i)
        if (checks[i].bound != m.checks[i].bound || checks[i].pass != m.checks[i].pass)
            return false;
    return true;
}

std::vector<AlgebraElement> ball_family(FreeGroupContext ctx, int radius)
{
    std::vector<AlgebraElement> out;
    for (const Word& g : ball(ctx.rank, radius))
        out.push_back(AlgebraElement::delta(ctx, g));
    return out;
}

Complex crossed_product_state(const std::vector<std::pair<Word, CylinderFunction>>& terms,
                              const BoundaryMassSource& nu)
{
    Complex s{};
    for (const auto& [g, f] : terms) {
        check_word(g, nu.context());
        if (!g.is_identity())
            continue;
        for (const auto& [w, c] : f.terms) {
            check_word(w, nu.context());
            s += c * nu.mass(w);
        }
    }
    return s;
}

} // namespace statlab

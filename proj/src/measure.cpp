#include "statlab/measure.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "statlab/errors.hpp"
#include "statlab/rng.hpp"
#include "statlab/stallings.hpp"

namespace statlab {

namespace mp = boost::multiprecision;

namespace {

constexpr std::size_t kGeneratingNodeBudget = 1u << 20;

mp::cpp_int parse_integer(std::string_view digits, std::string_view whole)
{
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw MalformedInput("not a rational number: \"" + std::string(whole) + "\"");
    const std::size_t nz = digits.find_first_not_of('0');
    if (nz == std::string_view::npos)
        return 0;
    // A leading zero would select octal.
    return mp::cpp_int(std::string(digits.substr(nz)));
}

Rational parse_decimal(std::string_view text, std::string_view whole)
{
    std::size_t e = text.find_first_of("eE");
    long exponent = 0;
    if (e != std::string_view::npos) {
        std::string_view ex = text.substr(e + 1);
        bool neg = !ex.empty() && ex.front() == '-';
        if (!ex.empty() && (ex.front() == '-' || ex.front() == '+'))
            ex.remove_prefix(1);
        exponent = static_cast<long>(parse_integer(ex, whole));
        if (neg)
            exponent = -exponent;
        text = text.substr(0, e);
    }
    std::string digits;
    std::size_t dot = text.find('.');
    if (dot == std::string_view::npos) {
        digits = std::string(text);
    } else {
        digits = std::string(text.substr(0, dot)) + std::string(text.substr(dot + 1));
        exponent -= static_cast<long>(text.size() - dot - 1);
    }
    if (digits.empty())
        throw MalformedInput("not a rational number: \"" + std::string(whole) + "\"");
    Rational r(parse_integer(digits, whole));
    mp::cpp_int scale = mp::pow(mp::cpp_int(10), static_cast<unsigned>(std::labs(exponent)));
    return exponent >= 0 ? r * Rational(scale) : r / Rational(scale);
}

/// Accumulates masses keyed by word, exact alongside floating point.
class MassTable {
public:
    explicit MassTable(bool exact) : exact_(exact) {}

    void add(const Word& w, double m, const Rational* q)
    {
        auto [it, inserted] = index_.try_emplace(w, words_.size());
        if (inserted) {
            words_.push_back(w);
            mass_.push_back(m);
            if (exact_)
                exact_mass_.push_back(*q);
        } else {
            mass_[it->second] += m;
            if (exact_)
                exact_mass_[it->second] += *q;
        }
    }

    std::size_t size() const { return words_.size(); }

    std::vector<std::size_t> sorted_order() const
    {
        std::vector<std::size_t> order(words_.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return words_[a] < words_[b]; });
        return order;
    }

    bool exact_;
    std::unordered_map<Word, std::size_t, WordHash> index_;
    std::vector<Word> words_;
    std::vector<double> mass_;
    std::vector<Rational> exact_mass_;
};

} // namespace

Rational parse_rational(std::string_view text)
{
    const std::string_view whole = text;
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    bool neg = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        neg = text.front() == '-';
        text.remove_prefix(1);
    }
    Rational r;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        mp::cpp_int num = parse_integer(text.substr(0, slash), whole);
        mp::cpp_int den = parse_integer(text.substr(slash + 1), whole);
        if (den == 0)
            throw MalformedInput("zero denominator in \"" + std::string(whole) + "\"");
        r = Rational(num, den);
    } else {
        r = parse_decimal(text, whole);
    }
    return neg ? Rational(-r) : r;
}

std::string to_string(Generating g)
{
    switch (g) {
    case Generating::Yes:
        return "yes";
    case Generating::No:
        return "no";
    default:
        return "unknown";
    }
}

struct GroupMeasure::GeneratingCache {
    std::once_flag once;
    Generating value = Generating::Unknown;
};

/// Constructs measures from already canonical data.
class MeasureBuilder {
public:
    static GroupMeasure make(FreeGroupContext ctx, std::vector<Atom> atoms,
                             std::optional<std::vector<Rational>> exact)
    {
        GroupMeasure m(ctx);
        m.atoms_ = std::move(atoms);
        m.exact_ = std::move(exact);
        return m;
    }

    static GroupMeasure from_table(FreeGroupContext ctx, const MassTable& t)
    {
        std::vector<Atom> atoms;
        std::optional<std::vector<Rational>> exact;
        if (t.exact_)
            exact.emplace();
        for (std::size_t i : t.sorted_order()) {
            if (t.exact_) {
                if (t.exact_mass_[i] == 0)
                    continue;
                atoms.push_back({t.words_[i], static_cast<double>(t.exact_mass_[i])});
                exact->push_back(t.exact_mass_[i]);
            } else if (t.mass_[i] > 0.0) {
                atoms.push_back({t.words_[i], t.mass_[i]});
            }
        }
        return make(ctx, std::move(atoms), std::move(exact));
    }
};

GroupMeasure::GroupMeasure(FreeGroupContext ctx)
    : ctx_(ctx), cache_(std::make_shared<GeneratingCache>())
{
}

GroupMeasure GroupMeasure::from_masses(FreeGroupContext ctx, std::vector<std::pair<Word, double>> atoms)
{
    MassTable t(false);
    double total = 0.0;
    for (auto& [w, m] : atoms) {
        check_word(w, ctx);
        if (!(m >= 0.0) || !std::isfinite(m))
            throw MalformedInput("measure mass must be a nonnegative number, got " + std::to_string(m) +
                                 " at " + w.str());
        total += m;
        t.add(w, m, nullptr);
    }
    if (std::abs(total - 1.0) > kMassTolerance)
        throw MalformedInput("measure masses sum to " + std::to_string(total) + ", not 1");
    GroupMeasure mu = MeasureBuilder::from_table(ctx, t);
    if (mu.atoms_.empty())
        throw MalformedInput("measure has empty support");
    return mu;
}

GroupMeasure GroupMeasure::from_exact(FreeGroupContext ctx, std::vector<std::pair<Word, Rational>> atoms)
{
    MassTable t(true);
    Rational total = 0;
    for (auto& [w, q] : atoms) {
        check_word(w, ctx);
        if (q < 0)
            throw MalformedInput("measure mass must be nonnegative at " + w.str());
        total += q;
        t.add(w, static_cast<double>(q), &q);
    }
    if (total != 1)
        throw MalformedInput("measure masses sum to " + total.str() + ", not 1");
    return MeasureBuilder::from_table(ctx, t);
}

GroupMeasure GroupMeasure::delta(FreeGroupContext ctx, const Word& w)
{
    return from_exact(ctx, {{w, Rational(1)}});
}

GroupMeasure GroupMeasure::uniform(FreeGroupContext ctx, const std::vector<Word>& words)
{
    if (words.empty())
        throw MalformedInput("uniform measure on an empty set");
    std::vector<std::pair<Word, Rational>> atoms;
    for (const Word& w : words)
        atoms.emplace_back(w, Rational(1, static_cast<long>(words.size())));
    GroupMeasure mu = from_exact(ctx, std::move(atoms));
    if (mu.support_size() != words.size())
        throw MalformedInput("uniform measure needs distinct words");
    return mu;
}

GroupMeasure GroupMeasure::uniform_generators(FreeGroupContext ctx)
{
    std::vector<Word> gens;
    for (int i = 1; i <= ctx.rank; ++i) {
        gens.push_back(Word::generator(i, false));
        gens.push_back(Word::generator(i, true));
    }
    return uniform(ctx, gens);
}

double GroupMeasure::mass(const Word& w) const
{
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), w,
                               [](const Atom& a, const Word& key) { return a.word < key; });
    return (it != atoms_.end() && it->word == w) ? it->mass : 0.0;
}

Rational GroupMeasure::exact_mass(const Word& w) const
{
    if (!exact_)
        throw PreconditionError("measure has no exact masses");
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), w,
                               [](const Atom& a, const Word& key) { return a.word < key; });
    if (it != atoms_.end() && it->word == w)
        return (*exact_)[static_cast<std::size_t>(it - atoms_.begin())];
    return 0;
}

std::size_t GroupMeasure::max_length() const noexcept
{
    return atoms_.empty() ? 0 : atoms_.back().word.length();
}

double GroupMeasure::total_mass() const noexcept
{
    double s = 0.0;
    for (const auto& a : atoms_)
        s += a.mass;
    return s;
}

namespace {

Generating compute_generating(const GroupMeasure& mu)
{
    const int k = mu.context().rank;
    std::vector<Word> supp;
    for (const auto& a : mu.atoms())
        if (!a.word.is_identity())
            supp.push_back(a.word);
    if (!generates_whole_group(supp, mu.context().alphabet_size()))
        return Generating::No;

    // Exponent sums of one generator all of one sign: the semigroup misses a
    // letter or its inverse.
    for (int i = 1; i <= k; ++i) {
        bool pos = false, neg = false;
        for (const Word& w : supp) {
            long s = 0;
            for (std::size_t j = 0; j < w.length(); ++j)
                if (letter_index(w[j]) == i)
                    s += letter_is_inverse(w[j]) ? -1 : 1;
            pos = pos || s > 0;
            neg = neg || s < 0;
        }
        if (!pos || !neg)
            return Generating::No;
    }

    const std::size_t radius = 2 * mu.max_length() + 2;
    std::unordered_set<Word, WordHash> seen;
    std::queue<Word> queue;
    int letters_found = 0;
    auto visit = [&](const Word& w) {
        if (w.length() > radius || !seen.insert(w).second)
            return;
        if (w.length() == 1)
            ++letters_found;
        queue.push(w);
    };
    for (const Word& w : supp)
        visit(w);
    while (!queue.empty() && letters_found < 2 * k) {
        if (seen.size() > kGeneratingNodeBudget)
            return Generating::Unknown;
        Word x = queue.front();
        queue.pop();
        for (const Word& s : supp)
            visit(multiply(x, s));
    }
    return letters_found == 2 * k ? Generating::Yes : Generating::Unknown;
}

} // namespace

Generating GroupMeasure::generating() const
{
    std::call_once(cache_->once, [this] { cache_->value = compute_generating(*this); });
    return cache_->value;
}

void GroupMeasure::require_generating(const char* op) const
{
    Generating g = generating();
    if (g == Generating::No)
        throw PreconditionError(std::string(op) + ": measure is not generating");
    if (g == Generating::Unknown)
        throw PreconditionError(std::string(op) +
                                ": could not certify that the measure is generating within ball(" +
                                std::to_string(2 * max_length() + 2) + ")");
}

AlgebraElement GroupMeasure::as_element() const
{
    std::vector<Term> terms;
    terms.reserve(atoms_.size());
    for (const auto& a : atoms_)
        terms.push_back({a.word, a.mass});
    return AlgebraElement::from_terms(ctx_, std::move(terms));
}

GroupMeasure convolve_measures(const GroupMeasure& mu, const GroupMeasure& nu, const MeasureOptions& opts)
{
    require_same_context(mu.context(), nu.context(), "convolve_measures");
    const bool exact = mu.exact() && nu.exact();
    MassTable t(exact);
    auto ma = mu.atoms();
    auto na = nu.atoms();
    for (std::size_t i = 0; i < ma.size(); ++i) {
        for (std::size_t j = 0; j < na.size(); ++j) {
            if (exact) {
                Rational q = mu.exact_masses()[i] * nu.exact_masses()[j];
                t.add(multiply(ma[i].word, na[j].word), ma[i].mass * na[j].mass, &q);
            } else {
                t.add(multiply(ma[i].word, na[j].word), ma[i].mass * na[j].mass, nullptr);
            }
            if (t.size() > opts.support_cap)
                throw ResourceLimitError("measure convolution support exceeds the cap of " +
                                             std::to_string(opts.support_cap) + " words",
                                         opts.support_cap);
        }
    }
    return MeasureBuilder::from_table(mu.context(), t);
}

GroupMeasure convolution_power(const GroupMeasure& mu, int n, const MeasureOptions& opts)
{
    if (n < 0)
        throw PreconditionError("convolution power needs n >= 0");
    GroupMeasure p = GroupMeasure::delta(mu.context(), Word{});
    for (int i = 0; i < n; ++i)
        p = convolve_measures(p, mu, opts);
    return p;
}

GroupMeasure cesaro_measure(const GroupMeasure& mu, int n, const MeasureOptions& opts)
{
    if (n < 1)
        throw PreconditionError("cesaro_measure needs n >= 1");
    std::vector<GroupMeasure> powers;
    powers.push_back(GroupMeasure::delta(mu.context(), Word{}));
    for (int k = 1; k < n; ++k)
        powers.push_back(convolve_measures(powers.back(), mu, opts));
    return mixture(powers, std::vector<Rational>(static_cast<std::size_t>(n), Rational(1, n)));
}

GroupMeasure mixture(const std::vector<GroupMeasure>& parts, const std::vector<Rational>& weights)
{
    if (parts.empty() || parts.size() != weights.size())
        throw PreconditionError("mixture needs one weight per component");
    Rational total = 0;
    bool exact = true;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        require_same_context(parts[0].context(), parts[i].context(), "mixture");
        if (weights[i] < 0)
            throw PreconditionError("mixture weights must be nonnegative");
        total += weights[i];
        exact = exact && parts[i].exact();
    }
    if (total != 1)
        throw PreconditionError("mixture weights sum to " + total.str());
    MassTable t(exact);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const double w = static_cast<double>(weights[i]);
        auto atoms = parts[i].atoms();
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            if (exact) {
                Rational q = weights[i] * parts[i].exact_masses()[j];
                t.add(atoms[j].word, w * atoms[j].mass, &q);
            } else {
                t.add(atoms[j].word, w * atoms[j].mass, nullptr);
            }
        }
    }
    return MeasureBuilder::from_table(parts[0].context(), t);
}

IncrementSampler::IncrementSampler(const GroupMeasure& mu)
{
    double acc = 0.0;
    for (const auto& a : mu.atoms()) {
        acc += a.mass;
        words_.push_back(a.word);
        cdf_.push_back(acc);
    }
}

std::size_t IncrementSampler::index_for(double u) const
{
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u * cdf_.back());
    auto i = static_cast<std::size_t>(it - cdf_.begin());
    return std::min(i, cdf_.size() - 1);
}

PathSample sample_path(const GroupMeasure& mu, std::size_t length, std::uint64_t seed, std::uint64_t stream)
{
    IncrementSampler sampler(mu);
    CounterRng rng(seed, stream);
    PathSample p;
    p.seed = seed;
    p.stream = stream;
    p.increments.reserve(length);
    p.positions.reserve(length + 1);
    p.positions.emplace_back();
    for (std::size_t i = 0; i < length; ++i) {
        const Word& g = sampler.word(sampler.index_for(rng.uniform()));
        p.increments.push_back(g);
        p.positions.push_back(multiply(p.positions.back(), g));
    }
    return p;
}

AlgebraElement measure_convolve_element(const GroupMeasure& mu, const AlgebraElement& a)
{
    require_same_context(mu.context(), a.context(), "measure_convolve_element");
    std::vector<Term> terms;
    terms.reserve(mu.support_size() * a.support_size());
    for (const auto& g : mu.atoms())
        for (const auto& t : a.terms())
            terms.push_back({conjugate(t.word, g.word), g.mass * t.coeff});
    return AlgebraElement::from_terms(a.context(), std::move(terms));
}

std::vector<int> averaging_schedule(int k_max)
{
    if (k_max < 1)
        throw PreconditionError("averaging_schedule needs k_max >= 1");
    std::vector<int> out;
    int n = 0;
    for (int k = 1; k <= k_max; ++k) {
        // (1 - 2^-k)^n < 2^-k  <=>  (2^k - 1)^n * 2^k < 2^(k n)
        const mp::cpp_int base = (mp::cpp_int(1) << k) - 1;
        ++n;
        mp::cpp_int lhs = mp::pow(base, static_cast<unsigned>(n)) << k;
        mp::cpp_int rhs = mp::cpp_int(1) << (k * n);
        while (!(lhs < rhs)) {
            ++n;
            lhs *= base;
            rhs <<= k;
        }
        out.push_back(n);
    }
    return out;
}

} // namespace statlab

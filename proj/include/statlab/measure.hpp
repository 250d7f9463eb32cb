#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "statlab/algebra.hpp"
#include "statlab/word.hpp"

namespace statlab {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", "-p/q", integers and decimals such as "0.125" or "1e-3"
/// exactly. Throws MalformedInput otherwise.
Rational parse_rational(std::string_view text);

enum class Generating { Yes, No, Unknown };
std::string to_string(Generating g);

struct Atom {
    Word word;
    double mass;
};

/// A finitely supported probability measure on F_k. Atoms are sorted in
/// shortlex order with strictly positive mass. Measures built from rational
/// input also carry exact masses, which every derived measure keeps as long as
/// all of its inputs are exact.
class GroupMeasure {
public:
    static constexpr double kMassTolerance = 1e-12;

    /// Duplicates are summed; throws MalformedInput for negative masses, an
    /// empty support, or a total off by more than kMassTolerance. Zero masses
    /// are dropped.
    static GroupMeasure from_masses(FreeGroupContext ctx, std::vector<std::pair<Word, double>> atoms);
    /// Same with exact masses; the total must be exactly 1.
    static GroupMeasure from_exact(FreeGroupContext ctx, std::vector<std::pair<Word, Rational>> atoms);

    static GroupMeasure delta(FreeGroupContext ctx, const Word& w);
    /// Uniform on the given (distinct) words, exact.
    static GroupMeasure uniform(FreeGroupContext ctx, const std::vector<Word>& words);
    /// Uniform on the 2k letters a, A, b, B, ...
    static GroupMeasure uniform_generators(FreeGroupContext ctx);

    const FreeGroupContext& context() const noexcept { return ctx_; }
    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t support_size() const noexcept { return atoms_.size(); }
    double mass(const Word& w) const;
    std::size_t max_length() const noexcept;
    double total_mass() const noexcept;

    bool exact() const noexcept { return exact_.has_value(); }
    /// Aligned with atoms(); only valid when exact().
    const std::vector<Rational>& exact_masses() const { return *exact_; }
    Rational exact_mass(const Word& w) const;

    /// Whether supp(mu) generates F_k as a semigroup. Computed once per
    /// measure (thread-safe) by closing the support under multiplication
    /// inside ball(2 * max_length + 2).
    Generating generating() const;
    /// Throws PreconditionError unless generating() is Yes.
    void require_generating(const char* op) const;

    /// True when the support lies in ball(1).
    bool nearest_neighbour() const noexcept { return max_length() <= 1; }

    /// The element sum_g mu(g) lambda_g.
    AlgebraElement as_element() const;

private:
    friend class MeasureBuilder;
    explicit GroupMeasure(FreeGroupContext ctx);

    struct GeneratingCache;

    FreeGroupContext ctx_;
    std::vector<Atom> atoms_;
    std::optional<std::vector<Rational>> exact_;
    std::shared_ptr<GeneratingCache> cache_;
};

struct MeasureOptions {
    std::size_t support_cap = 5'000'000;
};

/// (mu * nu)(w) = sum_{uv = w} mu(u) nu(v).
GroupMeasure convolve_measures(const GroupMeasure& mu, const GroupMeasure& nu,
                               const MeasureOptions& opts = {});
/// mu^n with mu^0 = delta_e.
GroupMeasure convolution_power(const GroupMeasure& mu, int n, const MeasureOptions& opts = {});
/// (1/n) sum_{k=0}^{n-1} mu^k.
GroupMeasure cesaro_measure(const GroupMeasure& mu, int n, const MeasureOptions& opts = {});
/// sum_i w_i mu_i for weights summing to 1; exact when every part is.
GroupMeasure mixture(const std::vector<GroupMeasure>& parts, const std::vector<Rational>& weights);

struct PathSample {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<Word> increments;  // g_1 .. g_n
    std::vector<Word> positions;   // omega_0 = e, omega_k = omega_{k-1} g_k
};

/// Draws increments i.i.d. from mu by inverse CDF over the shortlex atom
/// order, using CounterRng(seed, stream).
PathSample sample_path(const GroupMeasure& mu, std::size_t length, std::uint64_t seed,
                       std::uint64_t stream = 0);

/// Reusable inverse-CDF sampler.
class IncrementSampler {
public:
    explicit IncrementSampler(const GroupMeasure& mu);
    /// Atom index for a uniform draw u in [0, 1).
    std::size_t index_for(double u) const;
    const Word& word(std::size_t i) const { return words_[i]; }

private:
    std::vector<Word> words_;
    std::vector<double> cdf_;
};

/// mu * a = sum_g mu(g) Ad_{g^-1}(a), i.e. lambda_c goes to the average of
/// lambda_{g^-1 c g}. Note (mu * nu) * a = nu * (mu * a).
AlgebraElement measure_convolve_element(const GroupMeasure& mu, const AlgebraElement& a);

/// Least increasing n_1 < n_2 < ... < n_{k_max} with
/// (sum_{i <= k} 2^-i)^{n_k} < 2^-k, checked in exact integer arithmetic.
std::vector<int> averaging_schedule(int k_max);

} // namespace statlab

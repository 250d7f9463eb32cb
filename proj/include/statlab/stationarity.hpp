#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "statlab/algebra.hpp"
#include "statlab/boundary.hpp"
#include "statlab/measure.hpp"
#include "statlab/norm_bounds.hpp"

namespace statlab {

// ---------------------------------------------------------------- Cesaro test

struct CesaroRow {
    int n = 0;
    double lower = 0.0;
    double upper = 0.0;
    std::string lower_method;
    std::string upper_method;
    std::size_t support = 0;
    bool moments_capped = false;
};

struct CesaroOptions {
    int n_moments = 2;                  // moments per lower bound
    std::size_t moment_cap = 200'000;   // support cap inside the lower bound
    std::size_t support_cap = 5'000'000;
};

/// Brackets on ||mu_n * a - tau_0(a) 1|| for n = 1..n_max, where mu_n is the
/// Cesaro average (1/n) sum_{k<n} mu^k.
struct CesaroReport {
    std::string element_id;
    Complex trace;
    std::vector<CesaroRow> rows;
    Generating mu_generating = Generating::Unknown;
    /// Upper bounds decreasing over the last three rows, each step by more
    /// than a relative 1e-9.
    bool decaying = false;
    /// Stopped before n_max at the support cap.
    bool partial = false;

    /// "consistent with unique stationarity", "inconclusive" or
    /// "not generating".
    std::string verdict() const;
};

CesaroReport cesaro_test(const AlgebraElement& a, const GroupMeasure& mu, int n_max,
                         const CesaroOptions& opts = {}, std::string element_id = "");

// -------------------------------------------------------------- Powers search

enum class PowersStrategy { Geometric, Random };

struct PowersOptions {
    PowersStrategy strategy = PowersStrategy::Geometric;
    int max_n = 256;
    /// Geometric: candidates w run over cyclically reduced words of
    /// ball(word_radius) in shortlex order, unless fixed_w is set.
    int word_radius = 3;
    std::optional<Word> fixed_w;
    /// Random: tries_per_n tuples drawn from ball(radius) per n.
    int radius = 2;
    int tries_per_n = 64;
    std::uint64_t seed = 0;
};

/// Conjugators h_1..h_n with a certified upper bound on
/// max_t ||(1/n) sum_k lambda_{h_k^-1 t h_k}|| over the targets t.
struct PowersCertificate {
    std::vector<Word> targets;
    std::vector<Word> conjugators;
    std::optional<Word> w;  // geometric strategy: h_k = w^k
    std::vector<double> target_upper;
    double upper = 0.0;
    double eps = 0.0;
    bool success = false;
    std::string strategy;

    std::size_t n() const noexcept { return conjugators.size(); }
};

/// Certified upper bound on ||(1/n) sum_k lambda_{h_k^-1 t h_k}||.
UpperBound certify_average(FreeGroupContext ctx, const Word& target, const std::vector<Word>& conjugators);

/// Returns the smallest n (then the least w, or the lexicographically least
/// tuple) whose certified bound is below eps; otherwise the best bound found,
/// marked unsuccessful. Throws PreconditionError if a target is e or eps <= 0.
PowersCertificate powers_search(FreeGroupContext ctx, const std::vector<Word>& targets, double eps,
                                const PowersOptions& opts = {});
PowersCertificate powers_search(FreeGroupContext ctx, const Word& g, double eps,
                                const PowersOptions& opts = {});

/// Recomputes every per-target bound from the conjugators and compares
/// bit-for-bit.
bool verify_certificate(FreeGroupContext ctx, const PowersCertificate& cert);

// ------------------------------------------------------ C*-simple measure builder

struct BuilderOptions {
    int levels = 2;
    /// eps_l for l = 1..levels; 2^-l when empty.
    std::vector<double> eps;
    PowersOptions search;
    /// Largest conjugator set enumerated for the target sets.
    std::size_t product_cap = 200'000;
    /// Largest support tried for the direct evaluation of mu^n * a.
    std::size_t direct_cap = 1'000'000;
};

struct LevelCertificate {
    int level = 0;
    double eps = 0.0;
    int schedule_n = 0;
    std::size_t conjugator_products = 0;  // |H_l|
    std::size_t targets = 0;              // |C_l|
    double family_l1 = 0.0;               // max_s ||a_s - tau_0(a_s)||_1
    PowersCertificate search;
    /// search.upper * family_l1, required < eps.
    double bound = 0.0;
};

struct FinalCheck {
    int j = 0;
    int n_j = 0;
    std::size_t element = 0;
    /// Mass of step sequences that never use a level >= j.
    double low_level_mass = 0.0;
    double split_bound = 0.0;
    double direct_bound = -1.0;  // < 0 when not evaluated
    double bound = 0.0;
    double threshold = 0.0;      // 5 eps_j
    bool pass = false;
};

/// mu = sum_{l<L} 2^-l mu_l + 2^-(L-1) mu_L, each mu_l uniform on the
/// conjugators found at level l.
struct CStarSimpleMeasure {
    FreeGroupContext ctx;
    std::vector<AlgebraElement> family;
    std::vector<int> schedule;
    std::vector<double> eps;
    std::vector<GroupMeasure> level_measures;
    std::vector<Rational> weights;
    GroupMeasure mu = GroupMeasure::delta(FreeGroupContext{}, Word{});
    double tail_mass = 0.0;
    std::vector<LevelCertificate> levels;
    std::vector<FinalCheck> checks;

    bool all_pass() const;
};

/// Level l searches conjugators for every word t = h^-1 c h, c in the
/// support of a family member minus e and h a product of fewer than n_l atoms
/// of the earlier levels, so that max_t ||mu_l * lambda_t|| times the largest
/// ||a - tau_0(a)||_1 is certified below eps_l. Each final check bounds
/// ||mu^{n_j} * a - tau_0(a) 1|| by splitting the step sequences at the first
/// level >= j, and by direct expansion when small enough.
/// Throws ConstructionError when a level's search fails.
CStarSimpleMeasure build_c_star_simple_measure(const std::vector<AlgebraElement>& family,
                                               const BuilderOptions& opts = {});

/// Recomputes schedule, target sets, certificates, mixture and final checks
/// and compares them with the stored ones.
bool verify_construction(const CStarSimpleMeasure& m, const BuilderOptions& opts);

/// {lambda_g : g in ball(radius)}, each of l1 norm 1.
std::vector<AlgebraElement> ball_family(FreeGroupContext ctx, int radius);

// ------------------------------------------------------------ crossed product

/// tau(sum_g f_g lambda_g) = integral of f_e dnu; the other terms vanish.
Complex crossed_product_state(const std::vector<std::pair<Word, CylinderFunction>>& terms,
                              const BoundaryMassSource& nu);

} // namespace statlab

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "statlab/boundary.hpp"
#include "statlab/measure.hpp"
#include "statlab/word.hpp"

namespace statlab {

/// Smallest r with g in <r>: for g = u c u^-1, c cyclically reduced and
/// c = p^k with p of least period, r = u p u^-1, oriented as the shortlex
/// smaller of r and r^-1. Returns e for g = e.
Word primitive_root(const Word& g);

/// A cyclic subgroup <root> of F_k, root primitive and canonically oriented;
/// root = e is the trivial subgroup.
class CyclicSubgroup {
public:
    CyclicSubgroup() = default;
    /// The maximal cyclic subgroup containing g.
    static CyclicSubgroup containing(const Word& g) { return CyclicSubgroup(primitive_root(g)); }

    const Word& root() const noexcept { return root_; }
    bool is_trivial() const noexcept { return root_.is_identity(); }
    /// g = root^m for some integer m, decided by exact word comparison.
    bool contains(const Word& g) const;
    /// h^-1 Lambda h.
    CyclicSubgroup conjugated(const Word& h) const { return CyclicSubgroup(primitive_root(conjugate(root_, h))); }

    friend bool operator==(const CyclicSubgroup&, const CyclicSubgroup&) = default;

private:
    explicit CyclicSubgroup(Word root) : root_(std::move(root)) {}
    Word root_;
};

/// Lambda_{t+1} = g_t^-1 Lambda_t g_t with g_t drawn from mu.
struct SubgroupChain {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<CyclicSubgroup> states;  // states[0] = start
};

SubgroupChain conjugation_chain(const GroupMeasure& mu, const CyclicSubgroup& start, std::size_t steps,
                                std::uint64_t seed, std::uint64_t stream);

/// phi on ball(radius), phi(e) = 1; unset words in the ball are 0.
struct PositiveDefiniteFn {
    FreeGroupContext ctx;
    int radius = 0;
    std::unordered_map<Word, double, WordHash> values;

    /// Throws CoverageError outside ball(radius).
    double at(const Word& g) const;
};

/// phi(g) = sum of the weights of the sampled subgroups containing g.
/// Throws PreconditionError unless the weights are nonnegative and sum to 1.
PositiveDefiniteFn pdf_from_subgroup_sample(FreeGroupContext ctx,
                                            const std::vector<std::pair<CyclicSubgroup, double>>& sample,
                                            int radius);

inline constexpr double kPsdTolerance = -1e-9;

struct PsdReport {
    std::vector<double> min_eigenvalues;  // one per tuple
    std::size_t failures = 0;             // tuples below kPsdTolerance
    bool pass() const noexcept { return failures == 0; }
};

/// Minimum eigenvalue of [phi(g_i g_j^-1)] for every tuple. Throws
/// CoverageError naming the products outside ball(radius).
PsdReport psd_check(const PositiveDefiniteFn& phi, const std::vector<std::vector<Word>>& tuples);

struct EscapeRow {
    std::size_t step = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double frac_beyond = 0.0;  // fraction of chains with root length > threshold
};

struct EscapeOptions {
    std::size_t steps = 200;
    std::size_t trials = 500;
    std::uint64_t seed = 0;
    std::size_t threshold = 10;
    /// Least-squares slope of the median over the last half required for
    /// the "escaping" verdict.
    double min_slope = 0.1;
};

struct EscapeReport {
    std::vector<EscapeRow> rows;    // steps 0..steps
    std::vector<CyclicSubgroup> final_states;  // per trial, in seed order
    double slope = 0.0;
    bool degenerate = false;        // started at the trivial subgroup
    std::string verdict;            // "escaping", "not escaping" or "degenerate"
};

/// Runs `trials` chains, trial i on stream i.
EscapeReport srs_escape_experiment(const GroupMeasure& mu, const CyclicSubgroup& start, const EscapeOptions& opts);

struct FreenessRow {
    Word g;
    FixMassBound bound;
};

struct FreenessReport {
    int depth = 0;
    double residual = 0.0;   // stationarity residual of nu
    double threshold = 1e-3;
    std::vector<FreenessRow> rows;
    /// phi(g) <= nu(Fix(g)) upper bounds, phi(e) = 1.
    std::unordered_map<Word, double, WordHash> pdf_upper;
    bool essentially_free = false;
    std::string verdict;
};

/// Tabulates fix_mass upper bounds at `depth`. Throws PreconditionError when
/// nu is not stationary for mu within 1e-9 on the checkable levels.
FreenessReport freeness_report(const GroupMeasure& mu, const BoundaryMassSource& nu, const std::vector<Word>& gens,
                               int depth, double threshold = 1e-3);

} // namespace statlab

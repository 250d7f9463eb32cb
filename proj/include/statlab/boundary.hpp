#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "statlab/algebra.hpp"
#include "statlab/measure.hpp"
#include "statlab/word.hpp"

namespace statlab {

/// Anything that can report nu([w]) for cylinders [w] of the boundary of F_k,
/// the space of infinite reduced words. mass(e) = 1.
class BoundaryMassSource {
public:
    virtual ~BoundaryMassSource() = default;
    virtual const FreeGroupContext& context() const = 0;
    /// Longest cylinder word this source can evaluate.
    virtual int max_depth() const = 0;
    /// Throws DepthUnderflow for |w| > max_depth().
    virtual double mass(const Word& w) const = 0;
};

/// Finite table of cylinder masses for all reduced words of length 1..depth.
/// Level n is stored in shortlex order, so index i is sphere(k, n)[i].
class CylinderMeasure final : public BoundaryMassSource {
public:
    CylinderMeasure(FreeGroupContext ctx, int depth);

    /// Builds every level from a mass function.
    template <class F>
    static CylinderMeasure from_function(FreeGroupContext ctx, int depth, F&& f)
    {
        CylinderMeasure m(ctx, depth);
        for (int n = 1; n <= depth; ++n) {
            std::size_t i = 0;
            for (const Word& w : sphere(ctx.rank, n))
                m.levels_[static_cast<std::size_t>(n - 1)][i++] = f(w);
        }
        return m;
    }

    /// Deepest level given; shallower levels are the sums over extensions.
    static CylinderMeasure from_deepest(FreeGroupContext ctx, int depth, std::vector<double> deepest);

    const FreeGroupContext& context() const override { return ctx_; }
    int max_depth() const override { return depth_; }
    int depth() const noexcept { return depth_; }
    double mass(const Word& w) const override;

    /// Masses of level n (1-based) in shortlex order.
    const std::vector<double>& level(int n) const { return levels_.at(static_cast<std::size_t>(n - 1)); }
    /// Position of a reduced word of length 1..depth within its level.
    std::size_t index_of(const Word& w) const;

    /// Same masses on levels 1..depth (depth <= this->depth()).
    CylinderMeasure truncated(int depth) const;

    /// max over levels of |sum - 1| and over cylinders of the Kolmogorov
    /// defect |mass[w] - sum_x mass[wx]|.
    double consistency_error() const;

private:
    FreeGroupContext ctx_;
    int depth_;
    std::vector<std::vector<double>> levels_;
};

/// Boundary measure of a nearest-letter Markov chain: the first letter has
/// law initial(l), and each next letter x after l has law transition(l, x),
/// with transition(l, l^-1) = 0. Evaluates cylinders of any length.
class MarkovBoundaryMeasure final : public BoundaryMassSource {
public:
    MarkovBoundaryMeasure(FreeGroupContext ctx, std::vector<double> initial,
                          std::vector<std::vector<double>> transition);

    /// nu([w]) = 1 / (2k (2k-1)^(|w|-1)).
    static MarkovBoundaryMeasure uniform(FreeGroupContext ctx);

    const FreeGroupContext& context() const override { return ctx_; }
    int max_depth() const override;
    double mass(const Word& w) const override;

    double initial(Letter l) const { return initial_[l]; }
    double transition(Letter from, Letter to) const { return transition_[from][to]; }

    CylinderMeasure to_table(int depth) const;

private:
    FreeGroupContext ctx_;
    std::vector<double> initial_;
    std::vector<std::vector<double>> transition_;
};

CylinderMeasure uniform_boundary_measure(FreeGroupContext ctx, int depth);

/// (g nu)([w]) = nu(g^-1 [w]). When w is a prefix of g the preimage is the
/// complement of the cylinder at the prefix of g^-1 of length |g| - |w| + 1;
/// otherwise it is the cylinder [g^-1 w]. Needs |g| + |w| <= nu.max_depth().
double translate_mass(const Word& g, const Word& w, const BoundaryMassSource& nu);

/// g nu as a table of the given depth; throws DepthUnderflow unless
/// |g| + out_depth <= nu.max_depth().
CylinderMeasure translate(const Word& g, const BoundaryMassSource& nu, int out_depth);
/// Output depth nu.depth() - |g|.
CylinderMeasure translate(const Word& g, const CylinderMeasure& nu);

/// max over cylinders of length 1..depth of |sum_g mu(g) (g nu)[w] - nu[w]|.
/// depth < 0 selects nu.max_depth() - max |g|.
double stationarity_residual(const GroupMeasure& mu, const BoundaryMassSource& nu, int depth = -1);

/// (1/2) sum over cylinders of length `level` of |a[w] - b[w]|.
double total_variation(const BoundaryMassSource& a, const BoundaryMassSource& b, int level);

/// First-passage probabilities F(s) = P(the mu-walk from e ever visits s),
/// for mu supported in ball(1), indexed by letter code.
std::vector<double> first_passage_probabilities(const GroupMeasure& mu);

/// Exit law of a transient nearest-neighbour walk: nu([s]) =
/// F(s)(1 - F(s^-1)) / (1 - F(s)F(s^-1)), continued as a Markov chain with
/// transition(l, x) = nu([x]) / (1 - nu([l^-1])). Throws PreconditionError
/// for supports outside ball(1) or recurrent walks.
MarkovBoundaryMeasure hitting_measure(const GroupMeasure& mu);

struct SolveOptions {
    int depth = 5;
    double tol = 1e-12;
    int max_iter = 1000;
    /// Starting measure; the uniform measure when empty.
    std::optional<CylinderMeasure> seed;
};

struct StationarySolution {
    CylinderMeasure measure;
    int iterations = 0;
    double residual = 0.0;
    int working_depth = 0;
    std::vector<double> residual_trace;
    /// Total variation at `depth` against hitting_measure, for mu in ball(1).
    std::optional<double> hitting_tv;
};

/// Iterates nu -> sum_g mu(g) g nu on tables of depth depth + 2 max|g|,
/// restoring the lost levels after each step by the Markov extension
/// nu[wx] = nu[w] nu[sx] / nu[s] (s the longest known suffix of w), until
/// the step change is below tol. On F_1 every boundary measure is stationary
/// and the exit law of the walk (by the sign of its drift) is returned.
/// Throws PreconditionError for non-generating mu and ConvergenceError with
/// the last residual after max_iter steps.
StationarySolution solve_stationary(const GroupMeasure& mu, const SolveOptions& opts);

/// Extends (or truncates) a table to the given depth with the Markov
/// extension above.
CylinderMeasure markov_extend(const CylinderMeasure& nu, int depth);

inline constexpr double kDiracThreshold = 0.99;

struct ConditionalMeasure {
    CylinderMeasure measure;  // omega_n nu
    double top_mass = 0.0;    // largest level-1 mass
    Word position;            // omega_n
};

/// omega_n nu at the given output depth.
ConditionalMeasure conditional_measure(const BoundaryMassSource& nu, const PathSample& path,
                                       std::size_t n, int out_depth = 1);

struct BoundaryPoint {
    Word prefix;
    int resolved_depth = 0;
};

/// Longest prefix shared by every position in the final third of the path.
/// Throws UnresolvedError when it is shorter than min_depth.
BoundaryPoint boundary_map(const PathSample& path, int min_depth = 1);

/// f = sum_w c_w 1_[w]; the identity word stands for the constant function.
struct CylinderFunction {
    std::vector<std::pair<Word, Complex>> terms;

    static CylinderFunction indicator(const Word& w) { return {{{w, 1.0}}}; }
    static CylinderFunction constant(Complex c) { return {{{Word{}, c}}}; }
    int level() const;
    /// Evaluates at a boundary point given by a prefix of length >= level().
    Complex at(const Word& point_prefix) const;
    double sup_norm_bound() const;
};

/// Values on ball(radius), keyed by word.
class HarmonicFunction {
public:
    HarmonicFunction(FreeGroupContext ctx, int radius) : ctx_(ctx), radius_(radius) {}

    const FreeGroupContext& context() const noexcept { return ctx_; }
    int radius() const noexcept { return radius_; }
    /// Throws CoverageError outside ball(radius).
    Complex value(const Word& g) const;
    void set(const Word& g, Complex v) { values_[g] = v; }
    double sup_abs() const;

    /// max over g in ball(radius - max|h|) of |f(g) - sum_h mu(h) f(gh)|.
    double harmonicity_residual(const GroupMeasure& mu) const;

    /// Residual recorded by poisson_map, if any.
    std::optional<double> residual;

private:
    FreeGroupContext ctx_;
    int radius_;
    std::unordered_map<Word, Complex, WordHash> values_;
};

/// P_nu(f)(g) = integral of f(gx) dnu(x) = sum_w c_w (g nu)[w] on ball(R),
/// with its mu-harmonicity residual recorded.
HarmonicFunction poisson_map(const CylinderFunction& f, const BoundaryMassSource& nu,
                             const GroupMeasure& mu, int radius);

struct HarmonicProduct {
    HarmonicFunction product;
    /// cauchy[i] = max |A_{i+2} - A_{i+1}| on the output ball, A_n the n-step
    /// approximant.
    std::vector<double> cauchy;
    int n_used = 0;
    bool partial = false;  // n_max exceeded the lookup range
};

/// (f1 . f2)(g) approximated by A_n(g) = sum_h mu^n(h) f1(gh) f2(gh) on
/// ball(R - n max|h|), R the smaller input radius. When n_max does not fit,
/// the largest feasible n is used and the result is marked partial; throws
/// CoverageError if not even n = 1 fits.
HarmonicProduct harmonic_multiply(const HarmonicFunction& f1, const HarmonicFunction& f2,
                                  const GroupMeasure& mu, int n_max);

struct FixMassBound {
    double lower = 0.0;
    double upper = 0.0;
    int depth = 0;
    Word attracting_prefix;
    Word repelling_prefix;
};

/// nu(Fix(g)) lies in [0, nu[axis_prefix(g, d)] + nu[axis_prefix(g^-1, d)]].
FixMassBound fix_mass(const Word& g, const BoundaryMassSource& nu, int depth);
/// At the deepest level of the table.
FixMassBound fix_mass(const Word& g, const CylinderMeasure& nu);

} // namespace statlab

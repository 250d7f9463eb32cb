#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "statlab/boundary.hpp"
#include "statlab/errors.hpp"

using namespace statlab;

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

/// Nearest-neighbour walk with drift towards a and b.
GroupMeasure biased()
{
    return GroupMeasure::from_exact(F2, {{W("a"), Rational(2, 5)},
                                         {W("A"), Rational(1, 10)},
                                         {W("b"), Rational(3, 10)},
                                         {W("B"), Rational(1, 5)}});
}

std::string key(const Word& w)
{
    return w.is_identity() ? "" : w.str();
}

Word random_word(std::mt19937_64& rng, std::size_t max_len)
{
    const std::vector<Word> b = ball(2, static_cast<int>(max_len));
    return b[std::uniform_int_distribution<std::size_t>(0, b.size() - 1)(rng)];
}

PathSample fixed_path(const std::vector<Word>& increments)
{
    PathSample p;
    p.increments = increments;
    p.positions.push_back(Word{});
    for (const Word& g : increments)
        p.positions.push_back(multiply(p.positions.back(), g));
    return p;
}

} // namespace

TEST(UniformBoundary, MassFormula)
{
    const CylinderMeasure nu = uniform_boundary_measure(F2, 6);
    EXPECT_DOUBLE_EQ(nu.mass(W("a")), 0.25);
    EXPECT_DOUBLE_EQ(nu.mass(W("ab")), 1.0 / 12.0);
    EXPECT_DOUBLE_EQ(nu.mass(Word{}), 1.0);
    EXPECT_LT(nu.consistency_error(), 1e-12);
    for (int n = 1; n <= 6; ++n) {
        double s = 0.0;
        for (double m : nu.level(n))
            s += m;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    EXPECT_THROW(nu.mass(W("abababa")), DepthUnderflow);
    const MarkovBoundaryMeasure m = MarkovBoundaryMeasure::uniform(FreeGroupContext{3});
    EXPECT_DOUBLE_EQ(m.mass(W("abc")), 1.0 / (6.0 * 25.0));
}

TEST(Translate, Examples)
{
    const CylinderMeasure nu = uniform_boundary_measure(F2, 6);
    EXPECT_NEAR(translate_mass(W("a"), W("a"), nu), 1.0 - nu.mass(W("A")), 1e-15);
    EXPECT_NEAR(translate_mass(W("a"), W("ab"), nu), nu.mass(W("b")), 1e-15);
    const CylinderMeasure same = translate(Word{}, nu);
    for (int n = 1; n <= 6; ++n)
        EXPECT_EQ(same.level(n), nu.level(n));
    EXPECT_EQ(translate(W("ab"), nu).depth(), 4);
    EXPECT_THROW(translate(W("abab"), nu, 3), DepthUnderflow);
}

TEST(Translate, MatchesCylinderSummation)
{
    const MarkovBoundaryMeasure nu = hitting_measure(biased());
    auto mass = [&](const std::string& v) { return nu.mass(Word::parse(v.empty() ? "1" : v)); };
    std::mt19937_64 rng(51);
    for (int i = 0; i < 200; ++i) {
        const Word g = random_word(rng, 3);
        const Word w = random_word(rng, 3);
        if (w.is_identity())
            continue;
        EXPECT_NEAR(translate_mass(g, w, nu), oracle::translate_by_cylinders(2, key(g), key(w), mass), 1e-14)
            << g.str() << " " << w.str();
    }
}

TEST(Translate, IsAnActionAndStaysConsistent)
{
    const CylinderMeasure nu = hitting_measure(biased()).to_table(8);
    std::mt19937_64 rng(52);
    for (int i = 0; i < 20; ++i) {
        const Word g = random_word(rng, 2), h = random_word(rng, 2);
        const CylinderMeasure gh = translate(multiply(g, h), nu, 3);
        const CylinderMeasure g_h = translate(g, translate(h, nu), 3);
        EXPECT_LT(total_variation(gh, g_h, 3), 1e-14);
        EXPECT_LT(translate(g, nu).consistency_error(), 1e-12);
    }
}

TEST(StationarityResidual, Examples)
{
    const CylinderMeasure nu = uniform_boundary_measure(F2, 7);
    EXPECT_LT(stationarity_residual(uniform(), nu, 6), 1e-12);
    EXPECT_EQ(stationarity_residual(GroupMeasure::delta(F2, Word{}), hitting_measure(biased()), 5), 0.0);
    EXPECT_GT(stationarity_residual(biased(), nu, 4), 1e-3);
    EXPECT_LT(stationarity_residual(biased(), hitting_measure(biased()), 6), 1e-12);
}

TEST(SolveStationary, RecoversUniformMeasure)
{
    SolveOptions o;
    o.depth = 5;
    const StationarySolution s = solve_stationary(uniform(), o);
    EXPECT_LT(total_variation(s.measure, uniform_boundary_measure(F2, 5), 5), 1e-10);
    EXPECT_LT(s.measure.consistency_error(), 1e-12);
}

TEST(SolveStationary, BiasedWalkMatchesExitLaw)
{
    SolveOptions o;
    o.depth = 4;
    const StationarySolution s = solve_stationary(biased(), o);
    ASSERT_TRUE(s.hitting_tv.has_value());
    EXPECT_LT(*s.hitting_tv, 1e-8);
    EXPECT_LT(stationarity_residual(biased(), s.measure, 2), 1e-9);
}

TEST(SolveStationary, BiasedWalkOnIntegers)
{
    const FreeGroupContext f1{1};
    double prev = 0.0;
    for (const Rational& p : {Rational(3, 5), Rational(4, 5), Rational(99, 100)}) {
        const GroupMeasure mu = GroupMeasure::from_exact(f1, {{W("a"), p}, {W("A"), 1 - p}});
        SolveOptions o;
        o.depth = 3;
        const StationarySolution s = solve_stationary(mu, o);
        const double top = s.measure.mass(W("a"));
        EXPECT_GE(top, prev);
        EXPECT_NEAR(top, 1.0, 1e-12);
        prev = top;
    }
    const GroupMeasure zero_drift = GroupMeasure::uniform_generators(f1);
    EXPECT_THROW(hitting_measure(zero_drift), PreconditionError);
}

TEST(SolveStationary, RejectsNonGenerating)
{
    const GroupMeasure lazy = GroupMeasure::from_exact(F2, {{Word{}, Rational(1, 2)}, {W("b"), Rational(1, 2)}});
    EXPECT_THROW(solve_stationary(lazy, {}), PreconditionError);
    SolveOptions o;
    o.max_iter = 1;
    o.seed = hitting_measure(biased()).to_table(7);
    EXPECT_THROW(solve_stationary(uniform(), o), ConvergenceError);
}

TEST(ConditionalMeasure, TranslatesByPosition)
{
    const MarkovBoundaryMeasure nu = MarkovBoundaryMeasure::uniform(F2);
    const PathSample p = sample_path(uniform(), 20, 5);
    const ConditionalMeasure c0 = conditional_measure(nu, p, 0, 3);
    EXPECT_LT(total_variation(c0.measure, nu, 3), 1e-15);
    const ConditionalMeasure c = conditional_measure(nu, p, 12, 2);
    EXPECT_EQ(c.position, p.positions[12]);
    EXPECT_LT(total_variation(c.measure, translate(p.positions[12], nu, 2), 2), 1e-15);
}

TEST(ConditionalMeasure, ConcentratesAlongPaths)
{
    const MarkovBoundaryMeasure nu = MarkovBoundaryMeasure::uniform(F2);
    int dirac = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        const PathSample p = sample_path(uniform(), 30, 77, i);
        dirac += conditional_measure(nu, p, 30).top_mass > kDiracThreshold ? 1 : 0;
    }
    EXPECT_GE(dirac, 45);
}

TEST(BoundaryMap, ConstantIncrements)
{
    const PathSample p = fixed_path(std::vector<Word>(30, W("a")));
    const BoundaryPoint b = boundary_map(p, 1);
    EXPECT_GE(b.resolved_depth, 20);
    EXPECT_EQ(b.prefix, power(W("a"), b.resolved_depth));
}

TEST(BoundaryMap, UnresolvedOnBacktrackingPath)
{
    std::vector<Word> inc;
    for (int i = 0; i < 30; ++i)
        inc.push_back(i % 2 ? W("A") : W("a"));
    try {
        boundary_map(fixed_path(inc), 1);
        FAIL() << "expected UnresolvedError";
    } catch (const UnresolvedError& e) {
        EXPECT_EQ(e.partial_prefix(), "1");
    }
}

TEST(BoundaryMap, ResolvesLongUniformPaths)
{
    int deep = 0;
    for (std::uint64_t i = 0; i < 200; ++i)
        deep += boundary_map(sample_path(uniform(), 200, 3, i), 1).resolved_depth >= 20 ? 1 : 0;
    EXPECT_GE(deep, 198);
}

TEST(BoundaryMap, Equivariant)
{
    const Word h = W("bA");
    for (std::uint64_t i = 0; i < 20; ++i) {
        const PathSample p = sample_path(uniform(), 200, 8, i);
        PathSample q = p;
        for (Word& w : q.positions)
            w = multiply(h, w);
        const BoundaryPoint bp = boundary_map(p), bq = boundary_map(q);
        const Word moved = multiply(h, bp.prefix);
        const std::size_t n = std::min(bq.prefix.length(), moved.length() - h.length());
        EXPECT_EQ(bq.prefix.prefix(n), moved.prefix(n));
    }
}

TEST(PoissonMap, Examples)
{
    const MarkovBoundaryMeasure nu = MarkovBoundaryMeasure::uniform(F2);
    const HarmonicFunction one = poisson_map(CylinderFunction::constant(1.0), nu, uniform(), 3);
    for (const Word& g : ball(2, 3))
        EXPECT_NEAR(std::abs(one.value(g) - 1.0), 0.0, 1e-15);
    const HarmonicFunction f = poisson_map(CylinderFunction::indicator(W("a")), nu, uniform(), 4);
    EXPECT_NEAR(f.value(Word{}).real(), 0.25, 1e-15);
    ASSERT_TRUE(f.residual.has_value());
    EXPECT_LT(*f.residual, 1e-12);
    EXPECT_THROW(f.value(W("ababa")), CoverageError);
}

TEST(PoissonMap, SupApproachesSupNormAlongAxis)
{
    const MarkovBoundaryMeasure nu = MarkovBoundaryMeasure::uniform(F2);
    double prev = 0.0;
    for (int r = 1; r <= 6; ++r) {
        const double s = poisson_map(CylinderFunction::indicator(W("a")), nu, uniform(), r).sup_abs();
        EXPECT_GT(s, prev);
        EXPECT_NEAR(s, 1.0 - 0.75 / std::pow(3.0, r), 1e-12);
        prev = s;
    }
}

TEST(HarmonicMultiply, UnitAndPartial)
{
    const MarkovBoundaryMeasure nu = MarkovBoundaryMeasure::uniform(F2);
    const HarmonicFunction f1 = poisson_map(CylinderFunction::indicator(W("ab")), nu, uniform(), 6);
    const HarmonicFunction one = poisson_map(CylinderFunction::constant(1.0), nu, uniform(), 6);
    const HarmonicProduct p = harmonic_multiply(f1, one, uniform(), 3);
    EXPECT_FALSE(p.partial);
    EXPECT_EQ(p.product.radius(), 3);
    for (const Word& g : ball(2, 3))
        EXPECT_NEAR(std::abs(p.product.value(g) - f1.value(g)), 0.0, 1e-12);
    const HarmonicProduct q = harmonic_multiply(f1, f1, uniform(), 10);
    EXPECT_TRUE(q.partial);
    EXPECT_EQ(q.n_used, 6);
    const HarmonicFunction small = poisson_map(CylinderFunction::constant(1.0), nu, uniform(), 0);
    EXPECT_THROW(harmonic_multiply(small, small, uniform(), 1), CoverageError);
}

TEST(FixMass, Examples)
{
    const CylinderMeasure nu = uniform_boundary_measure(F2, 8);
    const FixMassBound b = fix_mass(W("a"), nu, 5);
    EXPECT_NEAR(b.upper, 1.0 / 162.0, 1e-15);
    EXPECT_EQ(b.lower, 0.0);
    EXPECT_EQ(b.attracting_prefix, W("aaaaa"));
    EXPECT_EQ(b.repelling_prefix, W("AAAAA"));
    EXPECT_THROW(fix_mass(Word{}, nu, 3), PreconditionError);
    double prev = 1.0;
    for (int d = 1; d <= 8; ++d) {
        const double u = fix_mass(W("abA"), nu, d).upper;
        EXPECT_LE(u, prev);
        prev = u;
    }
}

TEST(FixMass, ConjugationCovariance)
{
    const MarkovBoundaryMeasure nu = hitting_measure(biased());
    const CylinderMeasure table = nu.to_table(10);
    const std::vector<std::pair<const char*, const char*>> cases{{"a", "b"}, {"ab", "ba"}, {"aB", "Bab"}};
    for (const auto& [g, h] : cases) {
        const Word gw = W(g), hw = W(h);
        const CylinderMeasure moved = translate(hw, table);
        const Word conj = multiply(multiply(hw, gw), hw.inverse());
        const int d = 4;
        EXPECT_NEAR(fix_mass(conj, moved, d + static_cast<int>(hw.length())).upper, fix_mass(gw, nu, d).upper,
                    1e-12)
            << g << " " << h;
    }
}

TEST(CylinderFunction, Evaluation)
{
    const CylinderFunction f{{{W("a"), 2.0}, {W("ab"), 1.0}, {Word{}, 0.5}}};
    EXPECT_EQ(f.level(), 2);
    EXPECT_EQ(f.at(W("abb")), Complex(3.5));
    EXPECT_EQ(f.at(W("aab")), Complex(2.5));
    EXPECT_EQ(f.at(W("bab")), Complex(0.5));
}

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "statlab/errors.hpp"
#include "statlab/fdstates.hpp"
#include "statlab/stationarity.hpp"

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

std::vector<Word> powers_of(const Word& w, int n)
{
    std::vector<Word> h;
    for (int k = 1; k <= n; ++k)
        h.push_back(power(w, k));
    return h;
}

AlgebraElement explicit_average(const Word& t, const std::vector<Word>& h)
{
    AlgebraElement x(F2);
    for (const Word& c : h)
        x += AlgebraElement::delta(F2, conjugate(t, c), 1.0 / static_cast<double>(h.size()));
    return x;
}

} // namespace

TEST(Cesaro, IdentityElementGivesZeroBrackets)
{
    const CesaroReport r = cesaro_test(AlgebraElement::identity(F2), uniform(), 5);
    ASSERT_EQ(r.rows.size(), 5u);
    for (const CesaroRow& row : r.rows) {
        EXPECT_EQ(row.lower, 0.0);
        EXPECT_EQ(row.upper, 0.0);
    }
}

TEST(Cesaro, FirstRowIsTheElementItself)
{
    const CesaroReport r = cesaro_test(AlgebraElement::delta(F2, W("a")), uniform(), 3);
    EXPECT_NEAR(r.rows.front().upper, 1.0, 1e-15);
    EXPECT_NEAR(r.rows.front().lower, 1.0, 1e-12);
    EXPECT_EQ(r.mu_generating, Generating::Yes);
    for (const CesaroRow& row : r.rows)
        EXPECT_LE(row.lower, row.upper * (1 + 1e-12));
}

TEST(Cesaro, LazyWalkDecaysLikeInverseSquareRoot)
{
    const GroupMeasure lazy = GroupMeasure::from_exact(F2, {{Word{}, Rational(1, 2)}, {W("b"), Rational(1, 2)}});
    const CesaroReport r = cesaro_test(AlgebraElement::delta(F2, W("a")), lazy, 40);
    ASSERT_EQ(r.rows.size(), 40u);
    EXPECT_TRUE(r.decaying);
    EXPECT_EQ(r.verdict(), "not generating");
    const double u10 = r.rows[9].upper * std::sqrt(10.0), u40 = r.rows[39].upper * std::sqrt(40.0);
    EXPECT_LT(r.rows[39].upper, r.rows[9].upper);
    EXPECT_LT(u40, 2.0 * u10);
    EXPECT_GT(u40, 0.5 * u10);
    for (const CesaroRow& row : r.rows)
        EXPECT_LE(row.lower, row.upper * (1 + 1e-12));
    // The lower bounds from moments decay at the same rate.
    EXPECT_GT(r.rows[39].lower * std::sqrt(40.0), 0.25 * u40);
}

TEST(Powers, GeometricSearchWithFixedWord)
{
    PowersOptions o;
    o.fixed_w = W("b");
    const PowersCertificate c = powers_search(F2, W("a"), 0.75, o);
    ASSERT_TRUE(c.success);
    EXPECT_EQ(c.n(), 8u);
    EXPECT_LT(c.upper, 0.75);
    EXPECT_TRUE(verify_certificate(F2, c));
    const NormBracket b = certify_norm(explicit_average(W("a"), c.conjugators), 4);
    EXPECT_LE(b.lower, c.upper * (1 + 1e-12));
    EXPECT_NEAR(b.upper, c.upper, 1e-15);
}

TEST(Powers, DoublingNeverIncreasesTheBound)
{
    for (int n = 1; n <= 64; n *= 2) {
        const double u = certify_average(F2, W("a"), powers_of(W("b"), n)).value;
        const double u2 = certify_average(F2, W("a"), powers_of(W("b"), 2 * n)).value;
        EXPECT_LE(u2, u + 1e-15) << n;
    }
}

TEST(Powers, TamperedCertificateFailsVerification)
{
    PowersCertificate c = powers_search(F2, W("a"), 0.75);
    ASSERT_TRUE(c.success);
    EXPECT_TRUE(verify_certificate(F2, c));
    c.upper *= 0.5;
    EXPECT_FALSE(verify_certificate(F2, c));
}

TEST(Powers, RandomStrategyIsSeeded)
{
    PowersOptions o;
    o.strategy = PowersStrategy::Random;
    o.seed = 5;
    const PowersCertificate a = powers_search(F2, W("a"), 0.9, o), b = powers_search(F2, W("a"), 0.9, o);
    EXPECT_EQ(a.conjugators, b.conjugators);
    EXPECT_TRUE(verify_certificate(F2, a));
}

TEST(Powers, Preconditions)
{
    EXPECT_THROW(powers_search(F2, Word{}, 0.5), PreconditionError);
    EXPECT_THROW(powers_search(F2, W("a"), 0.0), PreconditionError);
    PowersOptions o;
    o.max_n = 2;
    const PowersCertificate c = powers_search(F2, W("a"), 0.1, o);
    EXPECT_FALSE(c.success);
    EXPECT_GT(c.upper, 0.1);
}

TEST(Builder, SingleLevelOnOneGenerator)
{
    BuilderOptions o;
    o.levels = 1;
    const std::vector<AlgebraElement> family{AlgebraElement::delta(F2, W("a"))};
    const CStarSimpleMeasure m = build_c_star_simple_measure(family, o);
    EXPECT_EQ(m.schedule, std::vector<int>{2});
    ASSERT_EQ(m.checks.size(), 1u);
    EXPECT_EQ(m.checks[0].n_j, 2);
    EXPECT_LT(m.checks[0].bound, 0.5);
    EXPECT_TRUE(m.all_pass());
    EXPECT_TRUE(verify_construction(m, o));
    EXPECT_NEAR(m.mu.total_mass(), 1.0, 1e-12);
    for (const AlgebraElement& a : family)
        EXPECT_LT(std::abs(canonical_trace(measure_convolve_element(m.mu, a)) - canonical_trace(a)), 1e-15);
}

TEST(Builder, TwoLevelsOnBallOne)
{
    BuilderOptions o;
    o.levels = 2;
    const std::vector<AlgebraElement> family = ball_family(F2, 1);
    const CStarSimpleMeasure m = build_c_star_simple_measure(family, o);
    EXPECT_EQ(m.schedule, (std::vector<int>{2, 5}));
    EXPECT_EQ(m.weights, (std::vector<Rational>{Rational(1, 2), Rational(1, 2)}));
    for (const LevelCertificate& l : m.levels) {
        EXPECT_LT(l.bound, l.eps);
        EXPECT_TRUE(verify_certificate(F2, l.search));
    }
    for (const FinalCheck& c : m.checks)
        EXPECT_LT(c.bound, 5.0 * std::ldexp(1.0, -c.j));
    EXPECT_TRUE(verify_construction(m, o));
    CStarSimpleMeasure bad = m;
    bad.checks.back().bound *= 0.5;
    EXPECT_FALSE(verify_construction(bad, o));
}

TEST(Builder, FailingLevelRaises)
{
    BuilderOptions o;
    o.levels = 1;
    o.eps = {1e-3};
    o.search.max_n = 4;
    EXPECT_THROW(build_c_star_simple_measure({AlgebraElement::delta(F2, W("a"))}, o), ConstructionError);
}

TEST(CrossedProduct, Examples)
{
    const MarkovBoundaryMeasure nu = MarkovBoundaryMeasure::uniform(F2);
    EXPECT_EQ(crossed_product_state({{Word{}, CylinderFunction::constant(1.0)}}, nu), Complex(1.0));
    EXPECT_NEAR(crossed_product_state({{Word{}, CylinderFunction::indicator(W("a"))}}, nu).real(), 0.25, 1e-15);
    EXPECT_EQ(crossed_product_state({{W("b"), CylinderFunction::indicator(W("a"))}}, nu), Complex(0.0));
}

TEST(FdStates, TrivialRepresentation)
{
    const FreeGroupContext ctx{2};
    const FiniteQuotient rep = FiniteQuotient::from_permutations(ctx, {{0}, {0}});
    const std::vector<DensityState> s = finite_dim_stationary_states(rep, uniform());
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(std::abs(s[0].rho(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(FdStates, SymmetricGroupRegularMatchesCommutant)
{
    const FiniteQuotient rep = FiniteQuotient::regular_representation(F2, {{1, 0, 2}, {1, 2, 0}});
    const Eigen::MatrixXd fixed = stationary_fixed_space(rep, uniform());
    const Eigen::MatrixXd ref =
        oracle::commutant_hermitian_basis({rep.image(W("a")), rep.image(W("b"))});
    EXPECT_EQ(fixed.cols(), 6);
    EXPECT_EQ(ref.cols(), 6);
    EXPECT_LT(subspace_distance(fixed, ref), 1e-8);

    const std::vector<DensityState> states = finite_dim_stationary_states(rep, uniform());
    EXPECT_EQ(states.size(), 6u);
    for (const DensityState& s : states) {
        EXPECT_LT(s.residual, 1e-9);
        EXPECT_NEAR(s.rho.trace().real(), 1.0, 1e-12);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(s.rho);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
        const CMatrix moved = convolve_state(rep, uniform(), s.rho);
        EXPECT_LT((moved - s.rho).norm(), 1e-9);
    }
}

TEST(FdStates, NonGeneratingMeasureHasLargerFixedSpace)
{
    const FiniteQuotient rep = FiniteQuotient::from_permutations(F2, {{1, 0, 2}, {1, 2, 0}});
    const GroupMeasure only_a = GroupMeasure::delta(F2, W("a"));
    const Eigen::MatrixXd fixed = stationary_fixed_space(rep, only_a);
    const Eigen::MatrixXd ref = oracle::commutant_hermitian_basis({rep.image(W("a"))});
    EXPECT_LT(subspace_distance(fixed, ref), 1e-8);
    EXPECT_GT(fixed.cols(), stationary_fixed_space(rep, uniform()).cols());
}

TEST(FdStates, HermitianCoordinatesRoundTrip)
{
    CMatrix h(3, 3);
    h << 1.0, Complex(0.5, -2.0), Complex(0.0, 1.0), Complex(0.5, 2.0), -3.0, 0.25, Complex(0.0, -1.0), 0.25, 2.0;
    const Eigen::VectorXd v = hermitian_coordinates(h);
    EXPECT_NEAR(v.norm(), h.norm(), 1e-12);
    EXPECT_LT((from_hermitian_coordinates(v, 3) - h).norm(), 1e-14);
}

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "statlab/errors.hpp"
#include "statlab/srs.hpp"

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

} // namespace

TEST(PrimitiveRoot, Examples)
{
    EXPECT_EQ(primitive_root(W("aaa")), W("a"));
    EXPECT_EQ(primitive_root(W("AA")), W("a"));
    EXPECT_EQ(primitive_root(W("ababab")), W("ab"));
    EXPECT_EQ(primitive_root(W("baaaB")), W("baB"));
    EXPECT_TRUE(primitive_root(Word{}).is_identity());
}

TEST(PrimitiveRoot, IdempotentUnderPowers)
{
    for (const Word& g : ball(2, 4)) {
        if (g.is_identity())
            continue;
        const Word r = primitive_root(g);
        EXPECT_EQ(primitive_root(r), r);
        for (long k = 1; k <= 5; ++k) {
            EXPECT_EQ(primitive_root(power(g, k)), r) << g.str() << "^" << k;
            EXPECT_EQ(primitive_root(power(g, -k)), r);
        }
        const CyclicSubgroup h = CyclicSubgroup::containing(g);
        EXPECT_TRUE(h.contains(g));
        EXPECT_TRUE(h.contains(g.inverse()));
    }
}

TEST(CyclicSubgroup, Membership)
{
    const CyclicSubgroup h = CyclicSubgroup::containing(W("baB"));
    EXPECT_TRUE(h.contains(Word{}));
    EXPECT_TRUE(h.contains(W("baaaB")));
    EXPECT_TRUE(h.contains(W("bAAB")));
    EXPECT_FALSE(h.contains(W("a")));
    EXPECT_FALSE(h.contains(W("baBb")));
    EXPECT_FALSE(CyclicSubgroup{}.contains(W("a")));
    EXPECT_EQ(h.conjugated(W("b")), CyclicSubgroup::containing(W("a")));
}

TEST(ConjugationChain, ReproducibleAndTrivialIsFixed)
{
    const SubgroupChain a = conjugation_chain(uniform(), CyclicSubgroup::containing(W("a")), 50, 9, 2);
    const SubgroupChain b = conjugation_chain(uniform(), CyclicSubgroup::containing(W("a")), 50, 9, 2);
    EXPECT_EQ(a.states, b.states);
    const SubgroupChain t = conjugation_chain(uniform(), CyclicSubgroup{}, 50, 9, 2);
    for (const auto& s : t.states)
        EXPECT_TRUE(s.is_trivial());
}

TEST(Pdf, Examples)
{
    const PositiveDefiniteFn id = pdf_from_subgroup_sample(F2, {{CyclicSubgroup{}, 1.0}}, 3);
    for (const Word& g : ball(2, 3))
        EXPECT_EQ(id.at(g), g.is_identity() ? 1.0 : 0.0);

    const PositiveDefiniteFn pa = pdf_from_subgroup_sample(F2, {{CyclicSubgroup::containing(W("a")), 1.0}}, 3);
    for (const Word& g : ball(2, 3)) {
        const bool in = g.is_identity() || g == power(W("a"), static_cast<long>(g.length())) ||
                        g == power(W("A"), static_cast<long>(g.length()));
        EXPECT_EQ(pa.at(g), in ? 1.0 : 0.0) << g.str();
    }

    const PositiveDefiniteFn mix =
        pdf_from_subgroup_sample(F2, {{CyclicSubgroup{}, 0.5}, {CyclicSubgroup::containing(W("a")), 0.5}}, 2);
    EXPECT_EQ(mix.at(W("a")), 0.5);
    EXPECT_EQ(mix.at(Word{}), 1.0);
    EXPECT_THROW(mix.at(W("aba")), CoverageError);
    EXPECT_THROW(pdf_from_subgroup_sample(F2, {{CyclicSubgroup{}, 0.5}}, 2), PreconditionError);
}

TEST(Psd, Examples)
{
    const PositiveDefiniteFn id = pdf_from_subgroup_sample(F2, {{CyclicSubgroup{}, 1.0}}, 4);
    const PsdReport r = psd_check(id, {{W("a"), W("b"), W("ab")}});
    EXPECT_NEAR(r.min_eigenvalues[0], 1.0, 1e-12);

    const PositiveDefiniteFn pa = pdf_from_subgroup_sample(F2, {{CyclicSubgroup::containing(W("a")), 1.0}}, 4);
    const PsdReport s = psd_check(pa, {{Word{}, W("a"), W("aa")}});
    EXPECT_NEAR(s.min_eigenvalues[0], 0.0, 1e-12);
    EXPECT_TRUE(s.pass());

    try {
        psd_check(pa, {{W("aaa"), W("BB")}});
        FAIL() << "expected CoverageError";
    } catch (const CoverageError& e) {
        EXPECT_NE(std::string(e.what()).find("aaabb"), std::string::npos);
    }
}

TEST(Psd, RandomSubgroupSamplesPass)
{
    std::mt19937_64 rng(61);
    const std::vector<Word> roots = ball(2, 3), pool = ball(2, 3);
    std::uniform_int_distribution<std::size_t> pr(0, roots.size() - 1), pp(0, pool.size() - 1);
    for (int s = 0; s < 20; ++s) {
        std::vector<std::pair<CyclicSubgroup, double>> sample;
        for (int i = 0; i < 5; ++i)
            sample.emplace_back(CyclicSubgroup::containing(roots[pr(rng)]), 0.2);
        const PositiveDefiniteFn phi = pdf_from_subgroup_sample(F2, sample, 6);
        std::vector<std::vector<Word>> tuples(100);
        for (auto& t : tuples)
            for (int i = 0; i < 5; ++i)
                t.push_back(pool[pp(rng)]);
        EXPECT_TRUE(psd_check(phi, tuples).pass());
    }
}

TEST(Escape, TrivialStartIsDegenerate)
{
    EscapeOptions o;
    o.steps = 20;
    o.trials = 10;
    const EscapeReport r = srs_escape_experiment(uniform(), CyclicSubgroup{}, o);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.verdict, "degenerate");
    for (const EscapeRow& row : r.rows)
        EXPECT_EQ(row.median, 0.0);
}

TEST(Escape, NontrivialStartEscapes)
{
    EscapeOptions o;
    o.steps = 60;
    o.trials = 100;
    o.seed = 4;
    const EscapeReport r = srs_escape_experiment(uniform(), CyclicSubgroup::containing(W("a")), o);
    EXPECT_EQ(r.verdict, "escaping");
    EXPECT_GT(r.slope, 0.5);
    EXPECT_GT(r.rows.back().frac_beyond, 0.9);
    const EscapeReport again = srs_escape_experiment(uniform(), CyclicSubgroup::containing(W("a")), o);
    EXPECT_EQ(again.final_states, r.final_states);
    const GroupMeasure lazy = GroupMeasure::from_exact(F2, {{Word{}, Rational(1, 2)}, {W("b"), Rational(1, 2)}});
    EXPECT_THROW(srs_escape_experiment(lazy, CyclicSubgroup::containing(W("a")), o), PreconditionError);
}

TEST(Freeness, UniformMeasure)
{
    const CylinderMeasure nu = uniform_boundary_measure(F2, 8);
    std::vector<Word> gens = ball(2, 2);
    gens.erase(gens.begin());
    const FreenessReport r = freeness_report(uniform(), nu, gens, 6, 1e-2);
    EXPECT_TRUE(r.essentially_free);
    EXPECT_EQ(r.verdict, "essentially free at depth 6");
    for (const FreenessRow& row : r.rows) {
        EXPECT_LE(row.bound.upper, 2.0 / (4.0 * std::pow(3.0, 5)) + 1e-15);
        EXPECT_EQ(row.bound.upper, fix_mass(row.g.inverse(), nu, 6).upper);
        EXPECT_LE(fix_mass(row.g, nu, 7).upper, row.bound.upper);
    }
    EXPECT_EQ(r.pdf_upper.at(Word{}), 1.0);
}

TEST(Freeness, RejectsNonStationaryMeasure)
{
    const GroupMeasure biased = GroupMeasure::from_exact(F2, {{W("a"), Rational(2, 5)},
                                                               {W("A"), Rational(1, 10)},
                                                               {W("b"), Rational(3, 10)},
                                                               {W("B"), Rational(1, 5)}});
    EXPECT_THROW(freeness_report(biased, uniform_boundary_measure(F2, 8), {W("a")}, 6), PreconditionError);
    EXPECT_NO_THROW(freeness_report(biased, hitting_measure(biased), {W("a")}, 6));
}

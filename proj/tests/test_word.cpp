#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "statlab/errors.hpp"
#include "statlab/finite_quotient.hpp"
#include "statlab/stallings.hpp"
#include "statlab/word.hpp"

using namespace statlab;

namespace {

Word W(const char* s)
{
    return Word::parse(s);
}

std::string random_letters(std::mt19937_64& rng, int k, std::size_t n)
{
    std::uniform_int_distribution<int> d(0, 2 * k - 1);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        const int x = d(rng);
        s += static_cast<char>((x % 2 ? 'A' : 'a') + x / 2);
    }
    return s;
}

Word random_word(std::mt19937_64& rng, int k, std::size_t max_len)
{
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    const std::string s = random_letters(rng, k, len(rng));
    return Word::parse(s.empty() ? "1" : s);
}

} // namespace

TEST(Reduce, CancelsAdjacentInverses)
{
    EXPECT_TRUE(W("aA").is_identity());
    EXPECT_EQ(W("abBa").str(), "aa");
    EXPECT_EQ(W("1").str(), "1");
    EXPECT_EQ(Word{}.str(), "1");
}

TEST(Reduce, MatchesIteratedPairwiseCancellation)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const std::string s = random_letters(rng, 2, 20);
        ASSERT_FALSE(s.empty());
        EXPECT_EQ(Word::parse(s).str(), oracle::show(oracle::reduce(s))) << s;
    }
}

TEST(Reduce, IsIdempotent)
{
    std::mt19937_64 rng(12);
    for (int i = 0; i < 500; ++i) {
        const Word w = random_word(rng, 3, 30);
        EXPECT_EQ(Word::parse(w.str()), w);
        const std::vector<Letter> l = w.letters();
        EXPECT_EQ(reduce(l), w);
    }
}

TEST(Reduce, RejectsGeneratorOutsideRank)
{
    const FreeGroupContext ctx{2};
    EXPECT_THROW(Word::parse("ac", ctx), MalformedInput);
    EXPECT_THROW(Word::parse("a?"), MalformedInput);
    const std::vector<Generator> gens{{1, 1}, {3, -1}};
    EXPECT_THROW(reduce(gens, ctx), MalformedInput);
    EXPECT_THROW(FreeGroupContext::checked(0), MalformedInput);
}

TEST(Multiply, Examples)
{
    EXPECT_EQ(multiply(Word{}, W("ab")), W("ab"));
    EXPECT_EQ(multiply(W("ab"), W("Ba")), W("aa"));
    EXPECT_EQ(power(W("ab"), 3), W("ababab"));
    EXPECT_EQ(power(W("ab"), -2), W("BABA"));
    EXPECT_TRUE(power(W("ab"), 0).is_identity());
}

TEST(Multiply, GroupLawsOnRandomTriples)
{
    std::mt19937_64 rng(13);
    for (int i = 0; i < 10000; ++i) {
        const Word u = random_word(rng, 2, 8), v = random_word(rng, 2, 8), w = random_word(rng, 2, 8);
        ASSERT_EQ(multiply(multiply(u, v), w), multiply(u, multiply(v, w)));
        ASSERT_TRUE(multiply(u, u.inverse()).is_identity());
        ASSERT_TRUE(multiply(u.inverse(), u).is_identity());
        ASSERT_EQ(multiply(u, Word{}), u);
        ASSERT_EQ(multiply(u, v).str(), oracle::show(oracle::multiply(u.is_identity() ? "" : u.str(),
                                                                       v.is_identity() ? "" : v.str())));
    }
}

TEST(Multiply, LengthParity)
{
    std::mt19937_64 rng(14);
    for (int i = 0; i < 2000; ++i) {
        const Word u = random_word(rng, 2, 10), v = random_word(rng, 2, 10);
        EXPECT_EQ(multiply(u, v).length() % 2, (u.length() + v.length()) % 2);
    }
}

TEST(Conjugate, Examples)
{
    const Word g = W("abA");
    EXPECT_EQ(conjugate(g, Word{}), g);
    EXPECT_EQ(conjugate(W("a"), W("b")), W("Bab"));
}

TEST(Ball, Counts)
{
    EXPECT_EQ(ball(2, 0).size(), 1u);
    EXPECT_EQ(ball(2, 1).size(), 5u);
    EXPECT_EQ(ball(2, 3).size(), 53u);
    EXPECT_EQ(ball_size(2, 3), 53u);
    EXPECT_EQ(sphere_size(3, 2), 30u);
    for (int r = 0; r <= 4; ++r)
        EXPECT_EQ(ball(2, r).size(), oracle::ball(2, r).size());
}

TEST(Ball, ShortlexOrderAndDistinct)
{
    const std::vector<Word> b = ball(2, 4);
    for (std::size_t i = 1; i < b.size(); ++i)
        EXPECT_LT(b[i - 1], b[i]);
    EXPECT_EQ(ball(2, 1)[1].str(), "a");
    EXPECT_EQ(ball(2, 1)[2].str(), "A");
    EXPECT_EQ(ball(2, 1)[3].str(), "b");
}

TEST(AxisPrefix, Examples)
{
    EXPECT_EQ(axis_prefix(W("a"), 3), W("aaa"));
    EXPECT_EQ(axis_prefix(W("baB"), 2), W("ba"));
    EXPECT_EQ(axis_prefix(W("ab"), 4), W("abab"));
    EXPECT_THROW(axis_prefix(Word{}, 2), PreconditionError);
}

TEST(AxisPrefix, MatchesPrefixOfLargePower)
{
    std::mt19937_64 rng(15);
    for (int i = 0; i < 300; ++i) {
        const Word g = random_word(rng, 2, 6);
        if (g.is_identity())
            continue;
        for (std::size_t d : {1u, 3u, 7u}) {
            const Word big = power(g, static_cast<long>(d + 2));
            EXPECT_EQ(axis_prefix(g, d), big.prefix(d)) << g.str();
        }
    }
}

TEST(CyclicReduction, Decomposes)
{
    std::mt19937_64 rng(16);
    for (int i = 0; i < 500; ++i) {
        const Word g = random_word(rng, 2, 10);
        const auto [u, core] = cyclic_reduction(g);
        EXPECT_TRUE(is_cyclically_reduced(core));
        EXPECT_EQ(multiply(multiply(u, core), u.inverse()), g);
    }
}

TEST(FiniteQuotient, IsHomomorphism)
{
    const FreeGroupContext ctx{2};
    const auto rep = FiniteQuotient::from_permutations(ctx, {{1, 0, 2}, {1, 2, 0}});
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const Word u = random_word(rng, 2, 6), v = random_word(rng, 2, 6);
        EXPECT_LT((rep.image(multiply(u, v)) - rep.image(u) * rep.image(v)).norm(), 1e-12);
        EXPECT_LT((rep.image(u.inverse()) - rep.image(u).adjoint()).norm(), 1e-12);
    }
    EXPECT_EQ(FiniteQuotient::regular_representation(ctx, {{1, 0, 2}, {1, 2, 0}}).dimension(), 6);
    EXPECT_THROW(FiniteQuotient::from_permutations(ctx, {{0, 0, 1}, {1, 2, 0}}), MalformedInput);
}

TEST(Stallings, RanksAndBases)
{
    const std::vector<Word> gens{W("a"), W("b")};
    EXPECT_TRUE(generates_whole_group(gens, 4));
    const std::vector<Word> sq{W("aa"), W("b")};
    EXPECT_FALSE(generates_whole_group(sq, 4));
    EXPECT_TRUE(is_free_basis(sq, 4));
    const std::vector<Word> dep{W("a"), W("aa")};
    EXPECT_EQ(subgroup_rank(dep, 4), 1u);
    EXPECT_FALSE(is_free_basis(dep, 4));
    const std::vector<Word> conj{W("baB"), W("b")};
    EXPECT_TRUE(generates_whole_group(conj, 4));
}

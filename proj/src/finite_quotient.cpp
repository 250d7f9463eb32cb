#include "statlab/finite_quotient.hpp"

#include <map>
#include <queue>

#include "statlab/errors.hpp"

namespace statlab {

namespace {

using Perm = std::vector<int>;

void check_permutation(const Perm& p, std::size_t m)
{
    if (p.size() != m)
        throw MalformedInput("permutation images must all have the same degree");
    std::vector<bool> seen(m, false);
    for (int x : p) {
        if (x < 0 || static_cast<std::size_t>(x) >= m || seen[static_cast<std::size_t>(x)])
            throw MalformedInput("generator image is not a permutation");
        seen[static_cast<std::size_t>(x)] = true;
    }
}

CMatrix permutation_matrix(const Perm& p)
{
    const auto m = static_cast<Eigen::Index>(p.size());
    CMatrix P = CMatrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        P(p[static_cast<std::size_t>(j)], j) = 1.0;
    return P;
}

Perm compose(const Perm& outer, const Perm& inner)
{
    Perm r(inner.size());
    for (std::size_t i = 0; i < inner.size(); ++i)
        r[i] = outer[static_cast<std::size_t>(inner[i])];
    return r;
}

} // namespace

FiniteQuotient::FiniteQuotient(FreeGroupContext ctx, std::vector<CMatrix> gens)
    : ctx_(ctx), gens_(std::move(gens))
{
    inverses_.reserve(gens_.size());
    for (const auto& g : gens_)
        inverses_.push_back(g.adjoint());
}

FiniteQuotient FiniteQuotient::from_permutations(FreeGroupContext ctx,
                                                 const std::vector<std::vector<int>>& perms)
{
    if (perms.size() != static_cast<std::size_t>(ctx.rank))
        throw MalformedInput("need one permutation per generator");
    std::vector<CMatrix> gens;
    for (const auto& p : perms) {
        check_permutation(p, perms.front().size());
        gens.push_back(permutation_matrix(p));
    }
    return FiniteQuotient(ctx, std::move(gens));
}

FiniteQuotient FiniteQuotient::regular_representation(FreeGroupContext ctx,
                                                      const std::vector<std::vector<int>>& perms)
{
    if (perms.size() != static_cast<std::size_t>(ctx.rank))
        throw MalformedInput("need one permutation per generator");
    for (const auto& p : perms)
        check_permutation(p, perms.front().size());

    // Enumerate the generated group in BFS order from the identity.
    Perm id(perms.front().size());
    for (std::size_t i = 0; i < id.size(); ++i)
        id[i] = static_cast<int>(i);
    std::map<Perm, int> index{{id, 0}};
    std::vector<Perm> elements{id};
    std::queue<Perm> frontier;
    frontier.push(id);
    while (!frontier.empty()) {
        Perm g = frontier.front();
        frontier.pop();
        for (const auto& s : perms) {
            Perm h = compose(s, g);
            if (index.emplace(h, static_cast<int>(elements.size())).second) {
                elements.push_back(h);
                frontier.push(h);
                if (elements.size() > static_cast<std::size_t>(kMaxRegularOrder))
                    throw PreconditionError("generated group exceeds order 64");
            }
        }
    }

    std::vector<CMatrix> gens;
    for (const auto& s : perms) {
        Perm left(elements.size());
        for (std::size_t i = 0; i < elements.size(); ++i)
            left[i] = index.at(compose(s, elements[i]));
        gens.push_back(permutation_matrix(left));
    }
    return FiniteQuotient(ctx, std::move(gens));
}

FiniteQuotient FiniteQuotient::from_unitaries(FreeGroupContext ctx, std::vector<CMatrix> unitaries)
{
    if (unitaries.size() != static_cast<std::size_t>(ctx.rank))
        throw MalformedInput("need one matrix per generator");
    const auto m = unitaries.front().rows();
    for (const auto& u : unitaries) {
        if (u.rows() != m || u.cols() != m)
            throw MalformedInput("generator images must be square of equal size");
        if ((u.adjoint() * u - CMatrix::Identity(m, m)).norm() > 1e-10)
            throw MalformedInput("generator image is not unitary");
    }
    return FiniteQuotient(ctx, std::move(unitaries));
}

const CMatrix& FiniteQuotient::letter_image(Letter l) const
{
    const auto i = static_cast<std::size_t>(letter_index(l) - 1);
    if (i >= gens_.size())
        throw MalformedInput("letter outside the quotient's rank");
    return letter_is_inverse(l) ? inverses_[i] : gens_[i];
}

CMatrix FiniteQuotient::image(const Word& w) const
{
    const auto m = gens_.front().rows();
    CMatrix r = CMatrix::Identity(m, m);
    for (std::size_t i = 0; i < w.length(); ++i)
        r = r * letter_image(w[i]);
    return r;
}

} // namespace statlab

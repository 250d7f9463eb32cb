#pragma once

#include <vector>

#include <Eigen/Dense>

#include "statlab/word.hpp"

namespace statlab {

using CMatrix = Eigen::MatrixXcd;

/// A homomorphism pi: F_k -> U(m), given on generators. Inverse letters map to
/// adjoints, so pi(g^-1) = pi(g)^-1 holds by construction.
class FiniteQuotient {
public:
    /// perms[i] is the image of generator i+1 as a 0-based permutation of
    /// {0..m-1}: point j goes to perms[i][j].
    static FiniteQuotient from_permutations(FreeGroupContext ctx,
                                            const std::vector<std::vector<int>>& perms);

    /// Left regular representation of the finite permutation group generated
    /// by `perms` (group order at most kMaxRegularOrder).
    static FiniteQuotient regular_representation(FreeGroupContext ctx,
                                                 const std::vector<std::vector<int>>& perms);

    /// Throws MalformedInput if any matrix is not unitary within 1e-10.
    static FiniteQuotient from_unitaries(FreeGroupContext ctx, std::vector<CMatrix> unitaries);

    static constexpr int kMaxRegularOrder = 64;

    const FreeGroupContext& context() const noexcept { return ctx_; }
    int dimension() const noexcept { return static_cast<int>(gens_.front().rows()); }
    const CMatrix& letter_image(Letter l) const;
    CMatrix image(const Word& w) const;

private:
    FiniteQuotient(FreeGroupContext ctx, std::vector<CMatrix> gens);

    FreeGroupContext ctx_;
    std::vector<CMatrix> gens_;     // index 0..k-1
    std::vector<CMatrix> inverses_; // adjoints
};

} // namespace statlab

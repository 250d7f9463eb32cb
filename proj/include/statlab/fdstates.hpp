#pragma once

#include <vector>

#include <Eigen/Dense>

#include "statlab/finite_quotient.hpp"
#include "statlab/measure.hpp"

namespace statlab {

/// A density matrix rho (rho >= 0, tr rho = 1) standing for the state
/// x -> tr(rho x) on M_m.
struct DensityState {
    CMatrix rho;
    /// Frobenius size of the correction applied when flooring negative
    /// eigenvalues at 0 and renormalizing.
    double adjustment = 0.0;
    /// Trace norm of mu * rho - rho.
    double residual = 0.0;
};

/// rho -> sum_g mu(g) pi(g) rho pi(g)^*.
CMatrix convolve_state(const FiniteQuotient& rep, const GroupMeasure& mu, const CMatrix& rho);

/// Coordinates of a Hermitian m x m matrix in the orthonormal real basis
/// E_jj, (E_jk + E_kj)/sqrt2, i(E_jk - E_kj)/sqrt2 (j < k), in that order.
Eigen::VectorXd hermitian_coordinates(const CMatrix& h);
CMatrix from_hermitian_coordinates(const Eigen::VectorXd& v, int m);

/// Orthonormal columns spanning the Hermitian fixed points of convolve_state:
/// the kernel of (Phi - I), singular values below tol * max(1, sigma_max).
Eigen::MatrixXd stationary_fixed_space(const FiniteQuotient& rep, const GroupMeasure& mu, double tol = 1e-10);

/// Stationary density matrices spanning the fixed space: I/m followed by the
/// normalized positive and negative parts of the kernel basis, kept when
/// linearly independent of the earlier ones and within `tol` of stationary.
/// Throws ResourceLimitError for m > 64 and ContextMismatch for mismatched
/// contexts.
std::vector<DensityState> finite_dim_stationary_states(const FiniteQuotient& rep, const GroupMeasure& mu,
                                                       double tol = 1e-9);

/// Operator norm of the difference of the orthogonal projectors onto the
/// column spans of a and b.
double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

} // namespace statlab

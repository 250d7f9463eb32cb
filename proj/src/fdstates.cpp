#include "statlab/fdstates.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "statlab/algebra.hpp"
#include "statlab/errors.hpp"

namespace statlab {

namespace {

constexpr int kMaxDimension = 64;

double trace_norm(const CMatrix& h)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

/// Floors negative eigenvalues at 0 and rescales to unit trace.
CMatrix psd_normalize(const CMatrix& h, double& adjustment)
{
    const CMatrix herm = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.sum();
    CMatrix rho = es.eigenvectors() * (ev / tr).cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    adjustment = (rho - herm / herm.trace().real()).norm();
    return rho;
}

} // namespace

CMatrix convolve_state(const FiniteQuotient& rep, const GroupMeasure& mu, const CMatrix& rho)
{
    CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
    for (const Atom& a : mu.atoms()) {
        const CMatrix u = rep.image(a.word);
        out += a.mass * (u * rho * u.adjoint());
    }
    return out;
}

Eigen::VectorXd hermitian_coordinates(const CMatrix& h)
{
    const int m = static_cast<int>(h.rows());
    Eigen::VectorXd v(m * m);
    int i = 0;
    for (int j = 0; j < m; ++j)
        v[i++] = h(j, j).real();
    for (int j = 0; j < m; ++j)
        for (int k = j + 1; k < m; ++k) {
            v[i++] = std::sqrt(2.0) * h(j, k).real();
            v[i++] = std::sqrt(2.0) * h(j, k).imag();
        }
    return v;
}

CMatrix from_hermitian_coordinates(const Eigen::VectorXd& v, int m)
{
    CMatrix h = CMatrix::Zero(m, m);
    int i = 0;
    for (int j = 0; j < m; ++j)
        h(j, j) = v[i++];
    for (int j = 0; j < m; ++j)
        for (int k = j + 1; k < m; ++k) {
            const double re = v[i++] / std::sqrt(2.0);
            const double im = v[i++] / std::sqrt(2.0);
            h(j, k) = Complex(re, im);
            h(k, j) = Complex(re, -im);
        }
    return h;
}

Eigen::MatrixXd stationary_fixed_space(const FiniteQuotient& rep, const GroupMeasure& mu, double tol)
{
    require_same_context(rep.context(), mu.context(), "stationary_fixed_space");
    const int m = rep.dimension();
    if (m > kMaxDimension)
        throw ResourceLimitError("representation dimension " + std::to_string(m) + " exceeds 64", kMaxDimension);
    const int n = m * m;
    Eigen::MatrixXd op(n, n);
    for (int c = 0; c < n; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(n, c);
        const CMatrix basis = from_hermitian_coordinates(e, m);
        op.col(c) = hermitian_coordinates(convolve_state(rep, mu, basis)) - e;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(op, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    std::vector<int> kernel;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] < cut)
            kernel.push_back(i);
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(kernel.size()));
    for (std::size_t j = 0; j < kernel.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(kernel[j]);
    return out;
}

std::vector<DensityState> finite_dim_stationary_states(const FiniteQuotient& rep, const GroupMeasure& mu, double tol)
{
    const int m = rep.dimension();
    const Eigen::MatrixXd fixed = stationary_fixed_space(rep, mu);
    const Eigen::Index d = fixed.cols();

    std::vector<CMatrix> candidates{CMatrix::Identity(m, m) / static_cast<double>(m)};
    for (Eigen::Index j = 0; j < d; ++j) {
        const CMatrix k = from_hermitian_coordinates(fixed.col(j), m);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
        const Eigen::VectorXd& ev = es.eigenvalues();
        for (double sign : {1.0, -1.0}) {
            const Eigen::VectorXd part = (sign * ev).cwiseMax(0.0);
            if (part.sum() > 1e-8)
                candidates.push_back(es.eigenvectors() * part.cast<Complex>().asDiagonal() *
                                     es.eigenvectors().adjoint());
        }
    }

    std::vector<DensityState> out;
    std::vector<Eigen::VectorXd> span;
    for (const CMatrix& c : candidates) {
        if (static_cast<Eigen::Index>(out.size()) == d)
            break;
        DensityState s;
        s.rho = psd_normalize(c, s.adjustment);
        s.residual = trace_norm(convolve_state(rep, mu, s.rho) - s.rho);
        if (!(s.residual < tol))
            continue;
        Eigen::VectorXd v = hermitian_coordinates(s.rho);
        for (const auto& b : span)
            v -= v.dot(b) * b;
        if (v.norm() < 1e-8)
            continue;
        span.push_back(v.normalized());
        out.push_back(std::move(s));
    }
    return out;
}

double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    auto projector = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
        if (x.cols() == 0)
            return Eigen::MatrixXd::Zero(x.rows(), x.rows());
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_qr(x);
        const Eigen::Index r = rank_qr.rank();
        const Eigen::MatrixXd q = rank_qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), r);
        return q * q.transpose();
    };
    if (a.rows() != b.rows())
        throw PreconditionError("subspace_distance: ambient dimensions differ");
    const Eigen::MatrixXd diff = projector(a) - projector(b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace statlab

#pragma once

#include "compca/common.hpp"
#include "compca/transforms.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace compca {

// (1/n) sum_j (x_j - xbar)(x_j - xbar)^T over the rows x_j of `data`.
template <typename Derived>
Matrix<typename Derived::Scalar> sample_covariance(const Eigen::MatrixBase<Derived>& data)
{
    using Scalar = typename Derived::Scalar;
    const Index n = data.rows();
    if(n < 2)
        throw InputError("sample_covariance: need at least two observations");
    Matrix<Scalar> centered = data.rowwise() - data.colwise().mean();
    Matrix<Scalar> cov(data.cols(), data.cols());
    cov.setZero();
    cov.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), Scalar(1) / Scalar(n));
    cov.template triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return cov;
}

inline MatrixXd sample_covariance(const TransformedMatrix& data)
{
    return sample_covariance(data.values);
}

// Throws InputError unless |a_ij - a_ji| <= 1e-10 (1 + |a_ij|) everywhere.
template <typename Derived>
void check_symmetric(const Eigen::MatrixBase<Derived>& a, const char* what = "matrix")
{
    if(a.rows() != a.cols())
        throw InputError(std::string(what) + " is not square");
    for(Index j = 0; j < a.cols(); j++)
    {
        for(Index i = j + 1; i < a.rows(); i++)
        {
            const double aij = static_cast<double>(a(i, j));
            const double aji = static_cast<double>(a(j, i));
            if(!(std::abs(aij - aji) <= 1e-10 * (1.0 + std::abs(aij))))
            {
                std::ostringstream msg;
                msg << what << " is not symmetric at (" << i << ", " << j << ")";
                throw InputError(msg.str());
            }
        }
    }
}

// Flip each column so that its largest-magnitude entry is positive; ties go to
// the lowest row index.
template <typename Scalar>
void normalize_signs(Matrix<Scalar>& vectors)
{
    for(Index j = 0; j < vectors.cols(); j++)
    {
        Index imax = 0;
        Scalar best = Scalar(-1);
        for(Index i = 0; i < vectors.rows(); i++)
        {
            const Scalar m = std::abs(vectors(i, j));
            if(m > best)
            {
                best = m;
                imax = i;
            }
        }
        if(vectors(imax, j) < Scalar(0))
            vectors.col(j) = -vectors.col(j);
    }
}

template <typename Scalar>
struct SpectralPair
{
    Vector<Scalar> eigenvalues;   // descending
    Matrix<Scalar> eigenvectors;  // column j pairs with eigenvalues(j)
};

template <typename Derived>
SpectralPair<typename Derived::Scalar> spectral_decomposition(const Eigen::MatrixBase<Derived>& a)
{
    using Scalar = typename Derived::Scalar;
    check_symmetric(a, "spectral_decomposition input");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a.eval());
    if(solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver failed to converge");
    SpectralPair<Scalar> out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    normalize_signs(out.eigenvectors);
    return out;
}

template <typename Scalar>
struct LeadingSubspace
{
    Matrix<Scalar> basis;        // p x d, orthonormal
    Vector<Scalar> eigenvalues;  // all p eigenvalues, descending
    Scalar eigengap = Scalar(0); // lambda_d - lambda_{d+1}
    // Set when lambda_d and lambda_{d+1} coincide within 1e-12; the subspace
    // is then not unique.
    bool degenerate_gap = false;
};

template <typename Scalar>
LeadingSubspace<Scalar> leading_subspace(const SpectralPair<Scalar>& eig, Index d)
{
    const Index p = eig.eigenvalues.size();
    if(d < 1 || d >= p)
        throw InputError("leading_subspace: d must satisfy 1 <= d < p");
    LeadingSubspace<Scalar> out;
    out.basis = eig.eigenvectors.leftCols(d);
    out.eigenvalues = eig.eigenvalues;
    out.eigengap = eig.eigenvalues(d - 1) - eig.eigenvalues(d);
    const Scalar scale = std::max(Scalar(1), std::abs(eig.eigenvalues(0)));
    out.degenerate_gap = std::abs(out.eigengap) <= Scalar(1e-12) * scale;
    return out;
}

template <typename Derived>
LeadingSubspace<typename Derived::Scalar> leading_subspace(const Eigen::MatrixBase<Derived>& a, Index d)
{
    if(d < 1 || d >= a.rows())
        throw InputError("leading_subspace: d must satisfy 1 <= d < p");
    return leading_subspace(spectral_decomposition(a), d);
}

// Projector distance (1/2) ||E E^T - F F^T||_F^2, evaluated through d x d
// Gram matrices. For orthonormal E and F it is the squared sin-theta distance
// and lies in [0, d]. Non-orthonormal inputs (e.g. a sparse estimate) are
// accepted as-is.
template <typename DerivedE, typename DerivedF>
typename DerivedE::Scalar sin_theta_sq(const Eigen::MatrixBase<DerivedE>& e,
                                       const Eigen::MatrixBase<DerivedF>& f)
{
    using Scalar = typename DerivedE::Scalar;
    if(e.rows() != f.rows() || e.cols() != f.cols())
        throw InputError("sin_theta_sq: bases must have the same shape");
    const Scalar ee = (e.transpose() * e).squaredNorm();
    const Scalar ff = (f.transpose() * f).squaredNorm();
    const Scalar ef = (e.transpose() * f).squaredNorm();
    return std::max(Scalar(0), Scalar(0.5) * (ee + ff - Scalar(2) * ef));
}

// G * omega * G by double centering.
template <typename Derived>
Matrix<typename Derived::Scalar> gamma_from_omega(const Eigen::MatrixBase<Derived>& omega)
{
    using Scalar = typename Derived::Scalar;
    check_symmetric(omega, "omega");
    Matrix<Scalar> gamma = omega;
    const Vector<Scalar> col_means = gamma.colwise().mean().transpose();
    gamma.rowwise() -= col_means.transpose();
    const Vector<Scalar> row_means = gamma.rowwise().mean();
    gamma.colwise() -= row_means;
    // Symmetrize away the round-off from the two passes.
    Matrix<Scalar> sym = Scalar(0.5) * (gamma + gamma.transpose());
    return sym;
}

// Largest singular value of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& a)
{
    using Scalar = typename Derived::Scalar;
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a.eval(), Eigen::EigenvaluesOnly);
    if(solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver failed to converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// F with F F^T = A for symmetric PSD A; negative round-off eigenvalues are
// clipped to zero.
template <typename Derived>
Matrix<typename Derived::Scalar> symmetric_sqrt(const Eigen::MatrixBase<Derived>& a)
{
    using Scalar = typename Derived::Scalar;
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a.eval());
    if(solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver failed to converge");
    const Vector<Scalar> root = solver.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
    return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

// ||V^T V - I||_max
template <typename Derived>
typename Derived::Scalar orthonormality_error(const Eigen::MatrixBase<Derived>& v)
{
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> gram = v.transpose() * v;
    gram.diagonal().array() -= Scalar(1);
    return gram.cwiseAbs().maxCoeff();
}

}  // namespace compca

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <vector>

#include "qbattery/errors.hpp"

namespace qb {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;

template <typename Real>
struct SpectralDecomp {
  Eigen::Matrix<Real, Eigen::Dynamic, 1> eigenvalues;  // ascending
  CMatrix<Real> eigenvectors;                          // columns
};

inline constexpr double kHermitianTol = 1e-10;

template <typename Derived>
typename Derived::RealScalar hermiticity_error(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<typename Derived::RealScalar>::infinity();
  if (a.size() == 0) return 0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, double tol = kHermitianTol) {
  return hermiticity_error(a) <= tol;
}

template <typename Derived>
CMatrix<typename Derived::RealScalar> hermitize(const Eigen::MatrixBase<Derived>& a) {
  return (a + a.adjoint()) / typename Derived::RealScalar(2);
}

/// Kronecker product: out[i*rb+k, j*cb+l] = a[i,j] * b[k,l].
template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                         a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Derived>
SpectralDecomp<typename Derived::RealScalar> herm_eig(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimMismatch, "herm_eig needs a square matrix");
  if (!is_hermitian(a)) throw Error(ErrorKind::NotHermitian, "herm_eig input is not hermitian");
  CMatrix<Real> h = hermitize(a);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Tr[rho * op].
template <typename DO, typename DR>
typename DR::Scalar expect(const Eigen::MatrixBase<DO>& op, const Eigen::MatrixBase<DR>& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols() || rho.rows() != rho.cols())
    throw Error(ErrorKind::DimMismatch, "expect: operator and state dimensions differ");
  return rho.transpose().cwiseProduct(op).sum();
}

/// Reduced state of subsystem `keep` of a composite with factor dimensions `dims`.
template <typename Derived>
CMatrix<typename Derived::RealScalar> partial_trace(const Eigen::MatrixBase<Derived>& rho,
                                                    const std::vector<int>& dims, int keep) {
  Eigen::Index total = 1;
  for (int d : dims) {
    if (d < 1) throw Error(ErrorKind::DimMismatch, "partial_trace: factor dimension < 1");
    total *= d;
  }
  if (keep < 0 || keep >= static_cast<int>(dims.size()))
    throw Error(ErrorKind::DimMismatch, "partial_trace: keep index out of range");
  if (rho.rows() != total || rho.cols() != total)
    throw Error(ErrorKind::DimMismatch, "partial_trace: dims do not match state");
  Eigen::Index left = 1, right = 1;
  for (int i = 0; i < keep; ++i) left *= dims[i];
  for (std::size_t i = keep + 1; i < dims.size(); ++i) right *= dims[i];
  const Eigen::Index dk = dims[keep];
  CMatrix<typename Derived::RealScalar> out = CMatrix<typename Derived::RealScalar>::Zero(dk, dk);
  for (Eigen::Index l = 0; l < left; ++l)
    for (Eigen::Index a = 0; a < dk; ++a)
      for (Eigen::Index b = 0; b < dk; ++b) {
        const Eigen::Index ra = (l * dk + a) * right, rb = (l * dk + b) * right;
        for (Eigen::Index r = 0; r < right; ++r) out(a, b) += rho(ra + r, rb + r);
      }
  return out;
}

// Single-site operators. TLS basis: index 0 = |e>, index 1 = |g>.
inline ComplexMatrix sigma_plus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}
inline ComplexMatrix sigma_minus() { return sigma_plus().transpose(); }
inline ComplexMatrix sigma_z() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}
inline ComplexMatrix sigma_x() { return sigma_plus() + sigma_minus(); }
inline ComplexMatrix identity(int n) { return ComplexMatrix::Identity(n, n); }

/// Truncated annihilation operator on Fock states 0..cutoff-1.
inline ComplexMatrix destroy(int cutoff) {
  ComplexMatrix a = ComplexMatrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}
inline ComplexMatrix number(int cutoff) {
  ComplexMatrix n = ComplexMatrix::Zero(cutoff, cutoff);
  for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

/// op placed on factor `site` of a product space, identity elsewhere.
inline ComplexMatrix embed(const ComplexMatrix& op, const std::vector<int>& dims, int site) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int i = 0; i < static_cast<int>(dims.size()); ++i)
    out = kron(out, i == site ? op : identity(dims[i]));
  return out;
}

/// Normalized coherent state truncated to `cutoff` levels.
inline ComplexVector coherent(int cutoff, cplx alpha) {
  ComplexVector v(cutoff);
  v(0) = 1.0;
  for (int n = 1; n < cutoff; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v / v.norm();
}

inline ComplexMatrix projector(const ComplexVector& psi) { return psi * psi.adjoint(); }

}  // namespace qb

#pragma once

#include "gob/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace gob::linalg {

// Dense symmetric kernels shared by the graph transform, the bandit state
// and the feature pipeline. Everything here is O(n^2)-O(n^3) dense double
// precision; graphs and feature spaces in this library stay small enough
// that robustness beats asymptotics.

inline constexpr double kSymmetryTol = 1e-9;   // relative, on input checks
inline constexpr double kPdFloor = 1e-12;      // eigenvalue floor for pd inputs

template <typename Derived>
void require_square_symmetric(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  using Scalar = typename Derived::Scalar;
  const Scalar scale = m.cwiseAbs().maxCoeff();
  const Scalar tol = kSymmetryTol * (scale > Scalar(0) ? scale : Scalar(1));
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > tol)
    throw std::invalid_argument("matrix is not symmetric");
}

template <typename Scalar>
struct Eigh {
  VectorX<Scalar> eigenvalues;   // ascending
  MatrixX<Scalar> eigenvectors;  // orthonormal columns
};

// Symmetric eigendecomposition, eigenvalues ascending.
template <typename Derived>
Eigh<typename Derived::Scalar> eigh(const Eigen::MatrixBase<Derived>& m) {
  require_square_symmetric(m);
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(m.derived());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace detail {

template <typename Derived, typename Fn>
MatrixX<typename Derived::Scalar> spectral_map(const Eigen::MatrixBase<Derived>& m, Fn&& fn,
                                               const char* what) {
  using Scalar = typename Derived::Scalar;
  auto decomp = eigh(m);
  VectorX<Scalar> mapped(decomp.eigenvalues.size());
  for (Index i = 0; i < mapped.size(); ++i) {
    if (decomp.eigenvalues[i] <= Scalar(kPdFloor))
      throw std::invalid_argument(std::string(what) + ": matrix not positive definite");
    mapped[i] = fn(decomp.eigenvalues[i]);
  }
  MatrixX<Scalar> r = decomp.eigenvectors * mapped.asDiagonal() * decomp.eigenvectors.transpose();
  // exact symmetry by construction
  return ((r + r.transpose()) / Scalar(2)).eval();
}

}  // namespace detail

// Inverse square root of a symmetric positive definite matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> inv_sqrt(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return detail::spectral_map(m, [](Scalar l) { return Scalar(1) / std::sqrt(l); }, "inv_sqrt");
}

// Square root of a symmetric positive definite matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> sqrt_pd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return detail::spectral_map(m, [](Scalar l) { return std::sqrt(l); }, "sqrt_pd");
}

// Inverse of I + sum(v v^T), maintained incrementally by rank-one updates
// (Sherman-Morrison), together with the log-determinant of the forward
// matrix. The full dense inverse is stored; every 512 updates it is
// re-symmetrized ((R + R')/2) to arrest round-off drift. Cost of one update
// is O(dim^2).
template <typename Scalar>
class IncrementalInverse {
 public:
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;

  explicit IncrementalInverse(Index dim) : inv_(Mat::Identity(dim, dim)) {
    if (dim <= 0) throw std::invalid_argument("IncrementalInverse: dim must be positive");
  }

  // Rebuild from a snapshot (full symmetric inverse, logdet, update count).
  static IncrementalInverse restore(Mat inverse, Scalar logdet, std::uint64_t updates) {
    if (inverse.rows() != inverse.cols() || inverse.rows() < 1)
      throw std::invalid_argument("IncrementalInverse: bad snapshot matrix");
    IncrementalInverse s(inverse.rows());
    s.inv_ = std::move(inverse);
    s.logdet_ = logdet;
    s.updates_ = updates;
    return s;
  }

  Index dim() const { return inv_.rows(); }
  Scalar logdet() const { return logdet_; }
  std::uint64_t updates() const { return updates_; }

  const Mat& matrix() const { return inv_; }

  // M^{-1} v
  Vec apply(const Vec& v) const {
    check_dim(v.size());
    return inv_ * v;
  }

  // M^{-1} X, column-wise
  Mat apply_cols(const Mat& x) const {
    check_dim(x.rows());
    return inv_ * x;
  }

  // v^T M^{-1} v
  Scalar quad(const Vec& v) const { return v.dot(apply(v)); }

  // Applies M <- M + v v^T. Returns the log-determinant gain ln(1 + v^T M^{-1} v).
  Scalar rank_one_update(const Vec& v) {
    check_dim(v.size());
    Vec y = apply(v);
    return rank_one_update_precomputed(y, v.dot(y));
  }

  // Same update with y = M^{-1} v and q = v^T M^{-1} v already available.
  Scalar rank_one_update_precomputed(const Vec& y, Scalar quad_form) {
    check_dim(y.size());
    if (quad_form < Scalar(0)) {
      if (quad_form < Scalar(-1e-9))
        throw std::invalid_argument("rank_one_update: negative quadratic form");
      quad_form = Scalar(0);  // round-off on a near-null vector
    }
    const Scalar beta = Scalar(1) + quad_form;
    inv_.noalias() -= y * (y / beta).transpose();
    const Scalar gain = std::log(beta);
    logdet_ += gain;
    if (++updates_ % 512 == 0) inv_ = ((inv_ + inv_.transpose()) / Scalar(2)).eval();
    return gain;
  }

 private:
  void check_dim(Index n) const {
    if (n != inv_.rows()) throw std::invalid_argument("IncrementalInverse: dimension mismatch");
  }

  Mat inv_;
  Scalar logdet_ = Scalar(0);
  std::uint64_t updates_ = 0;
};

using IncrementalInversed = IncrementalInverse<double>;

template <typename Scalar>
struct Pca {
  MatrixX<Scalar> basis;      // original_dim x k, orthonormal columns, leading first
  MatrixX<Scalar> projected;  // rows x k, centered rows expressed in the basis
  VectorX<Scalar> mean;       // column means of the input rows
  Index requested;
  Index retained;             // < requested when the data rank is lower
};

// Principal components of the mean-centered rows. If the numerical rank is
// below k the basis is truncated to the rank and `retained` reports it.
template <typename Derived>
Pca<typename Derived::Scalar> pca_fit_project(const Eigen::MatrixBase<Derived>& rows, Index k) {
  using Scalar = typename Derived::Scalar;
  const Index n = rows.rows(), d = rows.cols();
  if (n < 2) throw std::invalid_argument("pca_fit_project: need at least 2 rows");
  if (k < 1 || k > std::min(n, d))
    throw std::invalid_argument("pca_fit_project: k out of range");

  VectorX<Scalar> mean = rows.colwise().mean();
  MatrixX<Scalar> centered = rows.derived().rowwise() - mean.transpose();
  MatrixX<Scalar> cov = (centered.transpose() * centered) / Scalar(n - 1);
  auto decomp = eigh(cov);

  const Scalar lmax = decomp.eigenvalues[d - 1];
  const Scalar rank_tol = std::max(Scalar(1e-12), Scalar(d) * Scalar(1e-14) * std::abs(lmax));
  Index retained = 0;
  while (retained < k && decomp.eigenvalues[d - 1 - retained] > rank_tol) ++retained;

  MatrixX<Scalar> basis(d, retained);
  for (Index j = 0; j < retained; ++j) {
    VectorX<Scalar> dir = decomp.eigenvectors.col(d - 1 - j);
    // canonical sign: largest-magnitude coordinate positive
    Index imax = 0;
    dir.cwiseAbs().maxCoeff(&imax);
    if (dir[imax] < Scalar(0)) dir = -dir;
    basis.col(j) = dir;
  }
  return {basis, centered * basis, mean, k, retained};
}

}  // namespace gob::linalg

#pragma once

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "gist/types.hpp"

namespace gist {

template <typename Scalar>
struct SpectralNormEstimate {
  Scalar value = 0;
  Index iterations = 0;
  bool converged = false;
};

/// Largest singular value of A by power iteration on the smaller-side Gram
/// matrix. The start vector is the normalized all-ones vector, so the result
/// is reproducible without an RNG. The returned value is clamped from below
/// by the largest column 2-norm (a Rayleigh bound that always holds).
template <typename Scalar>
SpectralNormEstimate<Scalar> spectral_norm(const Mat<Scalar>& A, Scalar tol = Scalar(1e-10),
                                           Index max_iter = 10000) {
  if (A.rows() == 0 || A.cols() == 0) throw DimensionError("spectral_norm: empty matrix");
  if (!(tol > Scalar(0))) throw DimensionError("spectral_norm: tol must be positive");

  const bool tall = A.rows() >= A.cols();
  const Index n = tall ? A.cols() : A.rows();
  Mat<Scalar> gram(n, n);
  if (tall)
    gram.noalias() = A.transpose() * A;
  else
    gram.noalias() = A * A.transpose();

  Scalar max_col_norm = 0;
  for (Index j = 0; j < A.cols(); ++j) max_col_norm = std::max(max_col_norm, A.col(j).norm());

  Vec<Scalar> v = Vec<Scalar>::Ones(n) / std::sqrt(Scalar(n));
  Vec<Scalar> w(n);
  SpectralNormEstimate<Scalar> est;
  Scalar prev = 0;
  for (Index it = 0; it < max_iter; ++it) {
    w.noalias() = gram * v;
    Scalar wn = w.norm();
    if (wn == Scalar(0)) {
      // ones vector lies in the null space; nudge along the first axis
      v.setZero();
      v(0) = Scalar(1);
      w.noalias() = gram * v;
      wn = w.norm();
      if (wn == Scalar(0)) break;  // gram is zero: norm 0
    }
    const Scalar rayleigh = v.dot(w);  // v unit, so this is v'Gv
    est.iterations = it + 1;
    v = w / wn;
    const Scalar cur = std::sqrt(std::max(rayleigh, Scalar(0)));
    if (it > 0 && std::abs(cur - prev) <= tol * std::max(cur, Scalar(1))) {
      est.value = cur;
      est.converged = true;
      break;
    }
    prev = cur;
    est.value = cur;
  }
  est.value = std::max(est.value, max_col_norm);
  return est;
}

/// Minimizer of 0.5*||y - X b||^2 + (eta/2)*||b||^2 via Cholesky of the
/// normal matrix. Fails loudly on (numerically) singular systems instead of
/// falling back to a pseudo-inverse.
template <typename Scalar>
Vec<Scalar> ridge_solve(const Mat<Scalar>& X, const Vec<Scalar>& y, Scalar eta) {
  if (X.rows() != y.size()) throw DimensionError("ridge_solve: rows(X) != len(y)");
  if (X.cols() == 0) return Vec<Scalar>(0);
  if (eta < Scalar(0)) throw DimensionError("ridge_solve: eta must be nonnegative");
  if (eta == Scalar(0) && X.cols() > X.rows())
    throw SingularSystemError("ridge_solve: underdetermined system with eta = 0");

  Mat<Scalar> G(X.cols(), X.cols());
  G.noalias() = X.transpose() * X;
  G.diagonal().array() += eta;
  Vec<Scalar> rhs = X.transpose() * y;

  Eigen::LLT<Mat<Scalar>> llt(G);
  if (llt.info() != Eigen::Success)
    throw SingularSystemError("ridge_solve: normal matrix is not positive definite");
  Vec<Scalar> b = llt.solve(rhs);

  const Scalar scale = rhs.norm() + G.norm() * b.norm() + Scalar(1);
  if (!b.allFinite() || (G * b - rhs).norm() > Scalar(1e-8) * scale)
    throw SingularSystemError("ridge_solve: system is numerically singular");
  return b;
}

/// Effective degrees of freedom Tr((X'X + eta I)^{-1} X'X) of the ridge fit.
template <typename Scalar>
Scalar ridge_df(const Mat<Scalar>& X, Scalar eta) {
  if (X.cols() == 0) return Scalar(0);
  if (eta < Scalar(0)) throw DimensionError("ridge_df: eta must be nonnegative");
  if (eta == Scalar(0)) {
    if (X.cols() > X.rows())
      throw SingularSystemError("ridge_df: underdetermined system with eta = 0");
    return Scalar(X.cols());  // full column rank assumed
  }
  Mat<Scalar> G(X.cols(), X.cols());
  G.noalias() = X.transpose() * X;
  Mat<Scalar> Geta = G;
  Geta.diagonal().array() += eta;
  Eigen::LLT<Mat<Scalar>> llt(Geta);
  if (llt.info() != Eigen::Success)
    throw SingularSystemError("ridge_df: normal matrix is not positive definite");
  return llt.solve(G).trace();
}

}  // namespace gist

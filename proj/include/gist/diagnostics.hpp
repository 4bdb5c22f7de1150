#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "gist/dictionary.hpp"
#include "gist/types.hpp"

namespace gist {

/// Inputs for the frequency-selection consistency diagnostics: the true
/// support (group indices), threshold parameters, noise level, and the true
/// coefficient vector in standardized dictionary coordinates.
template <typename Scalar>
struct DiagnosticsInput {
  std::vector<Index> true_support;
  Scalar lambda = 0;
  Scalar eta = 0;
  Scalar sigma = 1;
  Vec<Scalar> beta_star;
};

template <typename Scalar>
struct SelectionDiagnostics {
  Scalar kappa = 0;  // peak cross-correlation between off-support and support blocks
  Scalar mu = 0;     // smallest eigenvalue of the scaled support Gram
  Scalar M = 0, L = 0;      // soft-rule exponents
  Scalar Mp = 0, Lp = 0;    // hard-ridge exponents
  Scalar iota = 0;          // min group norm of the noiseless ridge image (eta*tau0^2 form)
  Scalar iota_statement = 0;  // same with plain eta
  Scalar bound_l1_raw = 0, bound_l0l2_raw = 0;
  Scalar bound_l1 = 0, bound_l0l2 = 0;  // raw values clipped to [0, 1]
};

namespace detail {

template <typename Scalar>
Scalar tail_bound(Scalar p_z, Scalar M, Scalar p_nz, Scalar L) {
  const Scalar e = std::exp(Scalar(1));
  return e / Scalar(4) *
         (p_z * M * M * std::exp(-M * M / Scalar(4)) + p_nz * L * L * std::exp(-L * L / Scalar(4)));
}

}  // namespace detail

/// Evaluates the coherence / signal-strength quantities and the two
/// inconsistent-detection tail bounds for the supplied design and truth.
template <typename Scalar>
SelectionDiagnostics<Scalar> selection_diagnostics(const Dictionary<Scalar>& dict,
                                                   const DiagnosticsInput<Scalar>& in) {
  if (in.true_support.empty()) throw DimensionError("selection_diagnostics: empty true support");
  if (in.beta_star.size() != dict.num_columns())
    throw DimensionError("selection_diagnostics: beta_star dimension mismatch");

  const Index N = dict.num_samples();
  const Index D = dict.num_groups();
  const Scalar tau_sq = dict.tau0 * dict.tau0;

  std::vector<Index> nz = in.true_support;
  std::sort(nz.begin(), nz.end());
  std::vector<bool> in_support(static_cast<std::size_t>(D), false);
  for (Index g : nz) in_support[static_cast<std::size_t>(g)] = true;

  const Mat<Scalar> Xnz = dict.columns_of(nz);
  Mat<Scalar> sigma_nz(Xnz.cols(), Xnz.cols());
  sigma_nz.noalias() = Xnz.transpose() * Xnz;

  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(sigma_nz / Scalar(N));
  if (eig.info() != Eigen::Success)
    throw SingularSystemError("selection_diagnostics: eigendecomposition failed");
  const Scalar mu = eig.eigenvalues().minCoeff();
  if (!(mu > Scalar(0)))
    throw SingularSystemError("selection_diagnostics: support Gram is singular");

  const Scalar p_nz = Scalar(nz.size());
  const Scalar sqrt_p = std::sqrt(p_nz);

  // kappa: max over off-support groups of ||Sigma^(s)_{f,nz}||_2 / sqrt(p_nz)
  Scalar kappa = 0;
  for (Index f = 0; f < D; ++f) {
    if (in_support[static_cast<std::size_t>(f)]) continue;
    const std::vector<Index> fc = dict.group_columns(f);
    if (fc.empty()) continue;
    Mat<Scalar> cross(static_cast<Index>(fc.size()), Xnz.cols());
    for (std::size_t r = 0; r < fc.size(); ++r)
      cross.row(static_cast<Index>(r)) = dict.X.col(fc[r]).transpose() * Xnz;
    cross /= Scalar(N);
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> small(cross * cross.transpose());
    kappa = std::max(kappa, std::sqrt(std::max(small.eigenvalues().maxCoeff(), Scalar(0))));
  }
  kappa /= sqrt_p;

  // restricted true coefficients and group norms
  Vec<Scalar> beta_nz(Xnz.cols());
  {
    Index pos = 0;
    for (Index g : nz)
      for (Index c : dict.group_columns(g)) beta_nz(pos++) = in.beta_star(c);
  }
  Scalar min_group_norm = std::numeric_limits<Scalar>::infinity();
  for (Index g : nz)
    min_group_norm = std::min(min_group_norm,
                              std::hypot(in.beta_star(g), in.beta_star(g + D)));

  auto group_min_norm = [&](const Vec<Scalar>& v) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    Index pos = 0;
    for (Index g : nz) {
      const Index width = static_cast<Index>(dict.group_columns(g).size());
      best = std::min(best, v.segment(pos, width).norm());
      pos += width;
    }
    return best;
  };

  SelectionDiagnostics<Scalar> out;
  out.kappa = kappa;
  out.mu = mu;

  const Scalar sqrt_n = std::sqrt(Scalar(N));
  out.M = in.lambda * tau_sq / (in.sigma * sqrt_n) * (Scalar(1) - kappa * p_nz / mu);
  out.L = (min_group_norm - in.lambda * tau_sq * sqrt_p / (Scalar(N) * mu)) * std::sqrt(Scalar(N) * mu) /
          in.sigma;

  const Scalar mu_n = mu * Scalar(N);
  out.Mp = (in.lambda * tau_sq -
            in.eta * tau_sq / (mu_n + in.eta * tau_sq) * kappa * sqrt_p * beta_nz.norm()) /
           (in.sigma * sqrt_n);

  // noiseless ridge image of beta*, both eta scalings
  auto ridge_image = [&](Scalar ridge) {
    Mat<Scalar> A = sigma_nz;
    A.diagonal().array() += ridge;
    Eigen::LLT<Mat<Scalar>> llt(A);
    if (llt.info() != Eigen::Success)
      throw SingularSystemError("selection_diagnostics: ridge system not positive definite");
    return Vec<Scalar>(llt.solve(sigma_nz * beta_nz));
  };
  out.iota = group_min_norm(ridge_image(in.eta * tau_sq));
  out.iota_statement = group_min_norm(ridge_image(in.eta));

  out.Lp = (out.iota - in.lambda / (Scalar(1) + in.eta)) *
           (std::sqrt(mu_n) + in.eta * tau_sq / std::sqrt(mu_n)) / in.sigma;

  const Scalar p_z = Scalar(D - static_cast<Index>(nz.size()));
  out.bound_l1_raw = detail::tail_bound(p_z, out.M, p_nz, out.L);
  out.bound_l0l2_raw = detail::tail_bound(p_z, out.Mp, p_nz, out.Lp);
  out.bound_l1 = std::clamp(out.bound_l1_raw, Scalar(0), Scalar(1));
  out.bound_l0l2 = std::clamp(out.bound_l0l2_raw, Scalar(0), Scalar(1));
  return out;
}

}  // namespace gist

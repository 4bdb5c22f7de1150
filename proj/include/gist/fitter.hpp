#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gist/dictionary.hpp"
#include "gist/thresholding.hpp"
#include "gist/types.hpp"

namespace gist {

/// Coefficients in standardized dictionary coordinates, paired as
/// (values[k], values[k+D]) per frequency group.
template <typename Scalar>
struct CoefficientVector {
  Vec<Scalar> values;
  Index num_groups = 0;
  std::vector<Index> dropped;

  Scalar group_norm(Index k) const {
    return std::hypot(values(k), values(k + num_groups));
  }

  /// Frequency groups with nonzero pair norm.
  std::vector<Index> support() const {
    std::vector<Index> nz;
    for (Index k = 0; k < num_groups; ++k)
      if (group_norm(k) != Scalar(0)) nz.push_back(k);
    return nz;
  }
};

template <typename Scalar>
struct FitConfig {
  ThresholdRule<Scalar> rule;
  Scalar omega = Scalar(2);        // relaxation; >1 trades convergence theory for speed
  Index max_iter = 200;
  Scalar tol = Scalar(1e-4);
  bool grouped = true;
  std::optional<Vec<Scalar>> initial_beta;
  bool record_trajectory = false;  // store (beta, xi) per iterate for diagnostics

  void validate() const {
    if (!(omega > Scalar(0))) throw DimensionError("FitConfig: omega must be positive");
    if (max_iter < 1) throw DimensionError("FitConfig: max_iter must be >= 1");
    if (!(tol > Scalar(0))) throw DimensionError("FitConfig: tol must be positive");
  }
};

template <typename Scalar>
struct FitResult {
  CoefficientVector<Scalar> beta;
  Index iterations = 0;
  bool converged = false;
  Scalar final_change = 0;
  Scalar fixed_point_residual = 0;
  std::vector<Index> support;
  std::vector<std::pair<Vec<Scalar>, Vec<Scalar>>> trajectory;  // (beta, xi) when recorded
};

namespace detail {

template <typename Scalar>
void zero_dropped(Vec<Scalar>& v, const std::vector<Index>& dropped) {
  for (Index j : dropped) v(j) = Scalar(0);
}

template <typename Scalar>
Vec<Scalar> apply_rule(const ThresholdRule<Scalar>& rule, const Vec<Scalar>& xi, Index D,
                       bool grouped) {
  return grouped ? group_threshold(rule, xi, D) : elementwise_threshold(rule, xi);
}

}  // namespace detail

/// Defect of the fixed-point equation beta = Theta(beta + X'(y - X*beta); lambda)
/// on the tau0-scaled problem, in the infinity norm.
template <typename Scalar>
Scalar fixed_point_residual(const Dictionary<Scalar>& dict, const Vec<Scalar>& y,
                            const Vec<Scalar>& beta, const ThresholdRule<Scalar>& rule,
                            bool grouped = true) {
  if (beta.size() != dict.num_columns() || y.size() != dict.num_samples())
    throw DimensionError("fixed_point_residual: dimension mismatch");
  const Scalar inv_tau_sq = Scalar(1) / (dict.tau0 * dict.tau0);
  Vec<Scalar> r = y - dict.X * beta;
  Vec<Scalar> xi = beta + inv_tau_sq * (dict.X.transpose() * r);
  Vec<Scalar> mapped = detail::apply_rule(rule, xi, dict.num_groups(), grouped);
  detail::zero_dropped(mapped, dict.dropped);
  return (beta - mapped).template lpNorm<Eigen::Infinity>();
}

/// Relaxed group iterative thresholding. The design and response are scaled
/// by tau0 internally; the returned coefficients live in the standardized
/// dictionary coordinates (identical in the scaled and unscaled problems).
/// The first step is unrelaxed; later steps blend the surrogate with weight
/// omega. Divergence (non-finite iterates, possible for omega > 1) raises
/// DivergenceError instead of clamping.
template <typename Scalar>
FitResult<Scalar> gist_fit(const Dictionary<Scalar>& dict, const Vec<Scalar>& y,
                           const FitConfig<Scalar>& cfg) {
  cfg.validate();
  if (y.size() != dict.num_samples()) throw DimensionError("gist_fit: y dimension mismatch");
  const Index cols = dict.num_columns();
  const Index D = dict.num_groups();
  const Scalar inv_tau_sq = Scalar(1) / (dict.tau0 * dict.tau0);

  Vec<Scalar> beta;
  if (cfg.initial_beta) {
    if (cfg.initial_beta->size() != cols) throw DimensionError("gist_fit: initial_beta mismatch");
    beta = *cfg.initial_beta;
    detail::zero_dropped(beta, dict.dropped);
  } else {
    beta = Vec<Scalar>::Zero(cols);
  }

  FitResult<Scalar> result;
  Vec<Scalar> xi = Vec<Scalar>::Zero(cols);
  Vec<Scalar> residual(dict.num_samples());
  Vec<Scalar> step(cols);
  for (Index j = 0; j < cfg.max_iter; ++j) {
    residual.noalias() = y - dict.X * beta;
    step.noalias() = dict.X.transpose() * residual;
    step = beta + inv_tau_sq * step;
    if (j == 0)
      xi = step;
    else
      xi = (Scalar(1) - cfg.omega) * xi + cfg.omega * step;

    Vec<Scalar> next = detail::apply_rule(cfg.rule, xi, D, cfg.grouped);
    detail::zero_dropped(next, dict.dropped);
    if (!next.allFinite() || !xi.allFinite())
      throw DivergenceError("gist_fit: non-finite iterate (omega = " + std::to_string(double(cfg.omega)) + ")");

    result.final_change = (next - beta).template lpNorm<Eigen::Infinity>();
    beta = std::move(next);
    result.iterations = j + 1;
    if (cfg.record_trajectory) result.trajectory.emplace_back(beta, xi);
    if (result.final_change < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.beta = CoefficientVector<Scalar>{beta, D, dict.dropped};
  result.support = result.beta.support();
  result.fixed_point_residual = fixed_point_residual(dict, y, beta, cfg.rule, cfg.grouped);
  return result;
}

/// Penalized objective 0.5*||X*beta - y||^2 / tau0^2 + sum_k P(.) with the
/// penalty summed over group norms (or single coordinates when grouped is
/// false). This is the function the iteration descends on.
template <typename Scalar>
Scalar objective_value(const Dictionary<Scalar>& dict, const Vec<Scalar>& y,
                       const Vec<Scalar>& beta, const PenaltySpec<Scalar>& penalty,
                       bool grouped = true) {
  const Scalar inv_tau_sq = Scalar(1) / (dict.tau0 * dict.tau0);
  Scalar loss = Scalar(0.5) * (dict.X * beta - y).squaredNorm() * inv_tau_sq;
  const Index D = dict.num_groups();
  if (grouped) {
    for (Index k = 0; k < D; ++k)
      loss += penalty_value(penalty, std::hypot(beta(k), beta(k + D)));
  } else {
    for (Index i = 0; i < beta.size(); ++i) loss += penalty_value(penalty, std::abs(beta(i)));
  }
  return loss;
}

/// Energy G(beta, xi, beta, xi) of the relaxed iteration, evaluated on the
/// tau0-scaled problem. Dominates the objective, G >= F(beta), with equality
/// when xi is the unrelaxed gradient-step image of beta. Intended for small
/// instances: it forms (I - Sigma) explicitly and solves against it.
template <typename Scalar>
Scalar energy_value(const Dictionary<Scalar>& dict, const Vec<Scalar>& y, const Vec<Scalar>& beta,
                    const Vec<Scalar>& xi, const PenaltySpec<Scalar>& penalty, Scalar omega,
                    bool grouped = true) {
  if (!(omega > Scalar(0)) || omega > Scalar(1))
    throw DimensionError("energy_value: omega must lie in (0, 1]");
  const Index cols = dict.num_columns();
  if (beta.size() != cols || xi.size() != cols) throw DimensionError("energy_value: dimension mismatch");

  const Mat<Scalar> Xs = dict.X / dict.tau0;
  const Vec<Scalar> ys = y / dict.tau0;
  Mat<Scalar> M = -Xs.transpose() * Xs;  // I - Sigma
  M.diagonal().array() += Scalar(1);

  Eigen::LLT<Mat<Scalar>> llt(M);
  if (llt.info() != Eigen::Success)
    throw DimensionError("energy_value: I - Sigma is not positive definite (tau0 too small)");

  const Vec<Scalar> xty = Xs.transpose() * ys;
  Scalar g = Scalar(0.5) * (Xs * beta - ys).squaredNorm();
  const Index D = dict.num_groups();
  if (grouped) {
    for (Index k = 0; k < D; ++k) g += penalty_value(penalty, std::hypot(beta(k), beta(k + D)));
  } else {
    for (Index i = 0; i < beta.size(); ++i) g += penalty_value(penalty, std::abs(beta(i)));
  }
  // with first/third arguments equal and second/fourth equal, only the
  // (1-omega)/2 * ||beta + (I-Sigma)^{-1}(X'y - xi)||_{I-Sigma}^2 coupling survives
  const Vec<Scalar> v = beta + llt.solve(xty - xi);
  g += (Scalar(1) - omega) / Scalar(2) * v.dot(M * v);
  return g;
}

/// Per-step guaranteed decrease delta_1 + delta_2 of the energy between two
/// consecutive iterate pairs (used to verify the descent certificate).
template <typename Scalar>
Scalar energy_decrease_bound(const Dictionary<Scalar>& dict, const Vec<Scalar>& beta_prev,
                             const Vec<Scalar>& xi_prev, const Vec<Scalar>& beta_next,
                             const Vec<Scalar>& xi_next, Scalar omega) {
  const Mat<Scalar> Xs = dict.X / dict.tau0;
  Mat<Scalar> M = -Xs.transpose() * Xs;
  M.diagonal().array() += Scalar(1);
  Eigen::LLT<Mat<Scalar>> llt(M);
  if (llt.info() != Eigen::Success)
    throw DimensionError("energy_decrease_bound: I - Sigma is not positive definite");

  const Vec<Scalar> dxi = xi_next - xi_prev;
  const Scalar delta1 = (Scalar(1) - omega) / (Scalar(2) * omega) * dxi.dot(llt.solve(dxi));
  const Vec<Scalar> u = omega * (M * (beta_prev - beta_next)) + (Scalar(1) - omega) * (xi_prev - xi_next);
  const Scalar delta2 = u.dot(llt.solve(u)) / (Scalar(2) * omega);
  return delta1 + delta2;
}

}  // namespace gist

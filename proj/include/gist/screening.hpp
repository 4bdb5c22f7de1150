#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "gist/dictionary.hpp"
#include "gist/fitter.hpp"
#include "gist/types.hpp"

namespace gist {

template <typename Scalar>
struct ScreenConfig {
  Scalar theta_ratio = Scalar(0.25);  // kept dimension = ceil(theta_ratio * N) groups
  Scalar eta = Scalar(1e-2);
  Scalar omega = Scalar(2);
  Index max_iter = 500;
  Scalar tol = Scalar(1e-4);
  bool cooling = true;                // sigmoidal decay of m towards theta*N
  Scalar cooling_alpha = Scalar(0.01);
  bool squeeze = true;                // physically restrict X to the active groups
  bool record_trajectory = false;     // full-coordinate (beta, xi) per iterate

  Index target_groups(Index num_samples) const {
    return static_cast<Index>(std::ceil(static_cast<double>(theta_ratio) * double(num_samples)));
  }
};

template <typename Scalar>
struct ScreenResult {
  std::vector<Index> kept_frequencies;  // group indices into the input dictionary
  CoefficientVector<Scalar> beta;       // full-coordinate estimate at exit
  Index iterations = 0;
  bool converged = false;
  std::vector<Index> support_sizes;     // |nz(beta)| per iterate
  std::vector<Index> m_schedule;        // m used per iterate
  std::vector<std::pair<Vec<Scalar>, Vec<Scalar>>> trajectory;
};

/// Group quantile thresholding: keeps the m largest-norm groups (ties broken
/// toward the lower frequency index) and scales survivors by 1/(1+eta).
/// Exactly min(m, #nonzero groups) groups survive.
template <typename Scalar>
Vec<Scalar> quantile_threshold(const Vec<Scalar>& xi, Index num_groups, Index m, Scalar eta) {
  if (xi.size() != 2 * num_groups)
    throw DimensionError("quantile_threshold: xi length must be 2*num_groups");
  if (m < 1 || m > num_groups) throw DimensionError("quantile_threshold: m out of range");

  std::vector<std::pair<Scalar, Index>> norms(static_cast<std::size_t>(num_groups));
  for (Index k = 0; k < num_groups; ++k)
    norms[static_cast<std::size_t>(k)] = {std::hypot(xi(k), xi(k + num_groups)), k};
  std::sort(norms.begin(), norms.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  Vec<Scalar> out = Vec<Scalar>::Zero(xi.size());
  const Scalar shrink = Scalar(1) / (Scalar(1) + eta);
  for (Index i = 0; i < m; ++i) {
    const auto& [norm, k] = norms[static_cast<std::size_t>(i)];
    if (norm == Scalar(0)) break;
    out(k) = xi(k) * shrink;
    out(k + num_groups) = xi(k + num_groups) * shrink;
  }
  return out;
}

/// Iterative probabilistic spectrum screening. Runs the relaxed thresholding
/// iteration with a per-step quantile threshold whose kept-group count m
/// follows the sigmoidal cooling schedule m_j = ceil(2D/(1+exp(alpha*j))),
/// clamped below at ceil(theta*N). With squeeze enabled, groups killed in an
/// iterate are removed from the working design permanently.
template <typename Scalar>
ScreenResult<Scalar> gist_screen(const Dictionary<Scalar>& dict, const Vec<Scalar>& y,
                                 const ScreenConfig<Scalar>& cfg) {
  if (y.size() != dict.num_samples()) throw DimensionError("gist_screen: y dimension mismatch");
  const Index N = dict.num_samples();
  const Index D = dict.num_groups();
  const Index m_target = std::min(cfg.target_groups(N), D);
  if (m_target < 1) throw DimensionError("gist_screen: theta * N must be at least 1");
  if (!(cfg.omega > Scalar(0)) || cfg.max_iter < 1 || !(cfg.tol > Scalar(0)))
    throw DimensionError("gist_screen: invalid config");

  const Scalar inv_tau_sq = Scalar(1) / (dict.tau0 * dict.tau0);

  // active-group bookkeeping; without squeezing this stays the full set
  std::vector<Index> active(static_cast<std::size_t>(D));
  std::iota(active.begin(), active.end(), Index(0));
  Mat<Scalar> Xa = dict.X;
  Vec<Scalar> beta = Vec<Scalar>::Zero(2 * D);
  Vec<Scalar> xi = Vec<Scalar>::Zero(2 * D);

  auto expand = [&](const Vec<Scalar>& v) {
    Vec<Scalar> full = Vec<Scalar>::Zero(2 * D);
    const Index da = static_cast<Index>(active.size());
    for (Index j = 0; j < da; ++j) {
      full(active[static_cast<std::size_t>(j)]) = v(j);
      full(active[static_cast<std::size_t>(j)] + D) = v(j + da);
    }
    return full;
  };

  auto schedule = [&](Index j) {
    Index m = m_target;
    if (cfg.cooling) {
      const double raw = 2.0 * double(D) / (1.0 + std::exp(double(cfg.cooling_alpha) * double(j)));
      m = std::max<Index>(static_cast<Index>(std::ceil(raw)), m_target);
    }
    return std::min(m, D);
  };

  ScreenResult<Scalar> result;
  Vec<Scalar> beta_full_prev = Vec<Scalar>::Zero(2 * D);
  Vec<Scalar> residual(N), step;
  Index j = 0;
  for (; j < cfg.max_iter; ++j) {
    const Index da = static_cast<Index>(active.size());
    residual.noalias() = y - Xa * beta;
    step.noalias() = Xa.transpose() * residual;
    step = beta + inv_tau_sq * step;
    if (j == 0)
      xi = step;
    else
      xi = (Scalar(1) - cfg.omega) * xi + cfg.omega * step;

    const Index m_j = schedule(j);
    const Index m_eff = std::min(m_j, da);
    Vec<Scalar> next = quantile_threshold(xi, da, m_eff, cfg.eta);
    for (Index g = 0; g < da; ++g) {
      if (dict.is_dropped(active[static_cast<std::size_t>(g)])) next(g) = Scalar(0);
      if (dict.is_dropped(active[static_cast<std::size_t>(g)] + D)) next(g + da) = Scalar(0);
    }
    if (!next.allFinite() || !xi.allFinite())
      throw DivergenceError("gist_screen: non-finite iterate");

    Vec<Scalar> next_full = expand(next);
    const Scalar change = (next_full - beta_full_prev).template lpNorm<Eigen::Infinity>();
    beta = next;
    beta_full_prev = next_full;

    Index nz_groups = 0;
    for (Index g = 0; g < da; ++g)
      if (next(g) != Scalar(0) || next(g + da) != Scalar(0)) ++nz_groups;
    result.support_sizes.push_back(nz_groups);
    result.m_schedule.push_back(m_j);
    if (cfg.record_trajectory) result.trajectory.emplace_back(next_full, expand(xi));
    result.iterations = j + 1;

    if (cfg.squeeze && nz_groups < da) {
      std::vector<Index> keep_local;
      keep_local.reserve(static_cast<std::size_t>(nz_groups));
      for (Index g = 0; g < da; ++g)
        if (next(g) != Scalar(0) || next(g + da) != Scalar(0)) keep_local.push_back(g);
      const Index dn = static_cast<Index>(keep_local.size());
      Mat<Scalar> Xn(N, 2 * dn);
      Vec<Scalar> bn(2 * dn), xn(2 * dn);
      std::vector<Index> new_active(static_cast<std::size_t>(dn));
      for (Index g = 0; g < dn; ++g) {
        const Index src = keep_local[static_cast<std::size_t>(g)];
        Xn.col(g) = Xa.col(src);
        Xn.col(g + dn) = Xa.col(src + da);
        bn(g) = beta(src);
        bn(g + dn) = beta(src + da);
        xn(g) = xi(src);
        xn(g + dn) = xi(src + da);
        new_active[static_cast<std::size_t>(g)] = active[static_cast<std::size_t>(src)];
      }
      Xa = std::move(Xn);
      beta = std::move(bn);
      xi = std::move(xn);
      active = std::move(new_active);
    }

    if (change < cfg.tol && m_j <= m_target) {
      result.converged = true;
      break;
    }
  }

  // iteration cap hit before the schedule cooled down: enforce the kept-
  // dimension contract with one last quantile pass at the target size
  Index nz_groups = 0;
  const Index da = static_cast<Index>(active.size());
  for (Index g = 0; g < da; ++g)
    if (beta(g) != Scalar(0) || beta(g + da) != Scalar(0)) ++nz_groups;
  if (nz_groups > m_target) {
    beta = quantile_threshold(xi, da, m_target, cfg.eta);
    nz_groups = 0;
    for (Index g = 0; g < da; ++g)
      if (beta(g) != Scalar(0) || beta(g + da) != Scalar(0)) ++nz_groups;
    result.support_sizes.push_back(nz_groups);
    result.m_schedule.push_back(m_target);
  }

  Vec<Scalar> beta_full = expand(beta);
  result.beta = CoefficientVector<Scalar>{beta_full, D, dict.dropped};
  result.kept_frequencies = result.beta.support();
  return result;
}

}  // namespace gist

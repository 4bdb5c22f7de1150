#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "gist/dictionary.hpp"
#include "gist/fitter.hpp"
#include "gist/linalg.hpp"
#include "gist/rng.hpp"
#include "gist/types.hpp"

namespace gist {

template <typename Scalar>
struct LambdaGrid {
  std::vector<Scalar> values;  // strictly decreasing, positive

  void validate() const {
    if (values.empty()) throw DimensionError("LambdaGrid: empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > Scalar(0))) throw DimensionError("LambdaGrid: values must be positive");
      if (i > 0 && !(values[i] < values[i - 1]))
        throw DimensionError("LambdaGrid: values must be strictly decreasing");
    }
  }
};

/// Geometric grid from the smallest lambda that kills every group on the
/// first thresholding pass (computed from the group norms of X'y/tau0^2)
/// down to min_ratio times that.
template <typename Scalar>
LambdaGrid<Scalar> default_lambda_grid(const Dictionary<Scalar>& dict, const Vec<Scalar>& y,
                                       Index count = 100, Scalar min_ratio = Scalar(1e-3)) {
  if (count < 1) throw DimensionError("default_lambda_grid: count must be >= 1");
  const Vec<Scalar> g = dict.X.transpose() * y / (dict.tau0 * dict.tau0);
  Scalar max_norm = 0;
  const Index D = dict.num_groups();
  for (Index k = 0; k < D; ++k) max_norm = std::max(max_norm, std::hypot(g(k), g(k + D)));
  if (!(max_norm > Scalar(0))) max_norm = Scalar(1);
  const Scalar lambda_max = max_norm * (Scalar(1) + Scalar(1e-6));

  LambdaGrid<Scalar> grid;
  grid.values.resize(static_cast<std::size_t>(count));
  if (count == 1) {
    grid.values[0] = lambda_max;
    return grid;
  }
  const Scalar ratio = std::pow(min_ratio, Scalar(1) / Scalar(count - 1));
  Scalar v = lambda_max;
  for (Index l = 0; l < count; ++l) {
    grid.values[static_cast<std::size_t>(l)] = v;
    v *= ratio;
  }
  return grid;
}

template <typename Scalar>
struct SolutionPath {
  LambdaGrid<Scalar> grid;
  ThresholdRule<Scalar> rule;  // lambda field is overridden per grid entry
  std::vector<FitResult<Scalar>> estimates;
  std::vector<std::vector<Index>> supports;
  std::vector<Scalar> scv;
  std::vector<Scalar> df;
  std::vector<Scalar> scv_bic;
  std::vector<bool> flagged;   // a fold was skipped as singular for this entry
  Index selected_index = -1;
};

/// One fit per lambda, each warm-started from the neighboring solution. The
/// grid is processed from the smallest lambda upward: on coherent designs
/// the dense end of the path keeps the true atoms alive, and pruning them
/// away one threshold level at a time preserves far more of the correct
/// supports than growing from the sparse end does.
template <typename Scalar>
SolutionPath<Scalar> compute_path(const Dictionary<Scalar>& dict, const Vec<Scalar>& y,
                                  const ThresholdRule<Scalar>& rule_family,
                                  const LambdaGrid<Scalar>& grid, FitConfig<Scalar> cfg) {
  grid.validate();
  SolutionPath<Scalar> path;
  path.grid = grid;
  path.rule = rule_family;
  path.estimates.resize(grid.values.size());
  path.supports.resize(grid.values.size());

  std::optional<Vec<Scalar>> warm;
  for (std::size_t l = grid.values.size(); l-- > 0;) {
    cfg.rule = rule_family.with_lambda(grid.values[l]);
    cfg.initial_beta = warm;
    try {
      FitResult<Scalar> fit = gist_fit(dict, y, cfg);
      warm = fit.beta.values;
      path.supports[l] = fit.support;
      path.estimates[l] = std::move(fit);
    } catch (const std::exception& e) {
      throw DivergenceError("compute_path: fit failed at lambda index " + std::to_string(l) +
                            " (lambda = " + std::to_string(double(grid.values[l])) + "): " + e.what());
    }
  }
  return path;
}

namespace detail {

/// K contiguous blocks of a seeded permutation; every sample lands in
/// exactly one validation fold.
inline std::vector<std::vector<Index>> make_folds(Index n, Index k, std::uint64_t seed, bool shuffled) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  if (shuffled) {
    Rng rng(seed);
    shuffle(order, rng);
  }
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  for (Index f = 0; f < k; ++f) {
    const Index lo = f * n / k;
    const Index hi = (f + 1) * n / k;
    folds[static_cast<std::size_t>(f)].assign(order.begin() + lo, order.begin() + hi);
  }
  return folds;
}

template <typename Scalar>
Mat<Scalar> take_rows(const Mat<Scalar>& X, const std::vector<Index>& rows) {
  Mat<Scalar> out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = X.row(rows[i]);
  return out;
}

template <typename Scalar>
Vec<Scalar> take(const Vec<Scalar>& v, const std::vector<Index>& idx) {
  Vec<Scalar> out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

}  // namespace detail

template <typename Scalar>
struct ScvConfig {
  Index folds = 5;
  Scalar eta = Scalar(1e-2);  // restricted-ridge level for rules with l2 shrinkage
  std::uint64_t seed = 0;
  bool shuffled = true;
};

/// Selective cross validation with a BIC correction: the candidate supports
/// along the path (not lambda itself) are cross-validated. Each unique
/// support is scored once. Rules without l2 shrinkage refit by OLS; the
/// hard-ridge rule refits by ridge with eta. Ties in the criterion go to the
/// larger lambda.
template <typename Scalar>
void scv_bic_score(const Dictionary<Scalar>& dict, const Vec<Scalar>& y, SolutionPath<Scalar>& path,
                   const ScvConfig<Scalar>& cfg) {
  if (cfg.folds < 2) throw DimensionError("scv_bic_score: need at least 2 folds");
  const Index N = dict.num_samples();
  if (N < 2 * cfg.folds) throw DimensionError("scv_bic_score: need N >= 2K samples");

  const bool ridge_rule = path.rule.kind == RuleKind::HardRidge;
  const Scalar eta_eff = ridge_rule ? cfg.eta : Scalar(0);
  const auto folds = detail::make_folds(N, cfg.folds, cfg.seed, cfg.shuffled);

  struct Score {
    Scalar scv, df;
    bool flagged;
  };
  std::map<std::vector<Index>, Score> cache;

  auto score_support = [&](const std::vector<Index>& support) -> Score {
    if (auto it = cache.find(support); it != cache.end()) return it->second;
    Score s{Scalar(0), Scalar(0), false};
    if (support.empty()) {
      for (const auto& fold : folds) {
        std::vector<Index> train;
        train.reserve(static_cast<std::size_t>(N) - fold.size());
        std::vector<bool> in_val(static_cast<std::size_t>(N), false);
        for (Index i : fold) in_val[static_cast<std::size_t>(i)] = true;
        for (Index i = 0; i < N; ++i)
          if (!in_val[static_cast<std::size_t>(i)]) train.push_back(i);
        const Scalar mean = detail::take(y, train).mean();
        s.scv += (detail::take(y, fold).array() - mean).matrix().squaredNorm();
      }
      s.df = Scalar(0);
    } else {
      const Mat<Scalar> Xr = dict.columns_of(support);
      for (const auto& fold : folds) {
        std::vector<Index> train;
        train.reserve(static_cast<std::size_t>(N) - fold.size());
        std::vector<bool> in_val(static_cast<std::size_t>(N), false);
        for (Index i : fold) in_val[static_cast<std::size_t>(i)] = true;
        for (Index i = 0; i < N; ++i)
          if (!in_val[static_cast<std::size_t>(i)]) train.push_back(i);
        try {
          const Vec<Scalar> b =
              ridge_solve(Mat<Scalar>(detail::take_rows(Xr, train)), detail::take(y, train), eta_eff);
          s.scv += (detail::take(y, fold) - detail::take_rows(Xr, fold) * b).squaredNorm();
        } catch (const SingularSystemError&) {
          s.flagged = true;
        }
      }
      s.df = ridge_rule ? ridge_df(Xr, eta_eff) : Scalar(Xr.cols());
    }
    cache.emplace(support, s);
    return s;
  };

  const std::size_t L = path.supports.size();
  path.scv.assign(L, Scalar(0));
  path.df.assign(L, Scalar(0));
  path.scv_bic.assign(L, Scalar(0));
  path.flagged.assign(L, false);
  const Scalar log_n = std::log(Scalar(N));
  for (std::size_t l = 0; l < L; ++l) {
    const Score s = score_support(path.supports[l]);
    path.scv[l] = s.scv;
    path.df[l] = s.df;
    path.scv_bic[l] = s.scv + s.df * log_n;
    path.flagged[l] = s.flagged;
  }

  path.selected_index = -1;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t l = 0; l < L; ++l) {
    if (path.flagged[l]) continue;
    if (path.scv_bic[l] < best) {
      best = path.scv_bic[l];
      path.selected_index = static_cast<Index>(l);
    }
  }
  if (path.selected_index < 0) throw SingularSystemError("scv_bic_score: every path entry was flagged");
}

/// Exact refit (OLS or eta ridge, per rule) on the selected support over all
/// samples.
template <typename Scalar>
FitResult<Scalar> refit_selected(const Dictionary<Scalar>& dict, const Vec<Scalar>& y,
                                 const SolutionPath<Scalar>& path) {
  if (path.selected_index < 0) throw DimensionError("refit_selected: path has no selected index");
  const auto& support = path.supports[static_cast<std::size_t>(path.selected_index)];
  const bool ridge_rule = path.rule.kind == RuleKind::HardRidge;
  const Scalar eta_eff = ridge_rule ? path.rule.eta : Scalar(0);

  FitResult<Scalar> out;
  Vec<Scalar> beta = Vec<Scalar>::Zero(dict.num_columns());
  if (!support.empty()) {
    const Mat<Scalar> Xr = dict.columns_of(support);
    const Vec<Scalar> b = ridge_solve(Xr, y, eta_eff);
    beta = dict.expand_restricted(support, b);
  }
  out.beta = CoefficientVector<Scalar>{beta, dict.num_groups(), dict.dropped};
  out.support = out.beta.support();
  out.converged = true;
  const Scalar lambda_sel = path.grid.values[static_cast<std::size_t>(path.selected_index)];
  out.fixed_point_residual =
      fixed_point_residual(dict, y, beta, path.rule.with_lambda(lambda_sel), true);
  return out;
}

}  // namespace gist

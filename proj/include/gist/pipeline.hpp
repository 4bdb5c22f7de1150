#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gist/dictionary.hpp"
#include "gist/screening.hpp"
#include "gist/selection.hpp"
#include "gist/spectrum.hpp"

namespace gist {

/// Full estimation recipe: optional screening, a lambda path, SCV-BIC
/// selection, exact refit, spectrum recovery.
struct PipelineConfig {
  RuleKind rule = RuleKind::HardRidge;
  bool grouped = true;  // false: unstructured (per-coefficient) thresholding
  double eta = 1e-2;
  double omega = 2.0;
  double tol = 1e-4;
  Index max_iter = 200;

  bool screen = true;
  double theta = 0.25;          // screening keeps ceil(theta * N) groups
  double cooling_alpha = 0.01;
  bool cooling = true;
  bool squeeze = true;
  Index screen_max_iter = 500;

  Index grid_size = 100;
  double lambda_min_ratio = 1e-3;
  Index folds = 5;
  std::uint64_t seed = 0;
};

struct PipelineResult {
  std::vector<Index> screened_groups;     // group indices kept by screening (all if disabled)
  std::vector<Index> selected_groups;     // final support, indices into the input dictionary
  std::vector<double> selected_frequencies;
  SolutionPath<double> path;
  FitResult<double> refit;                // coefficients in the working (restricted) dictionary
  SpectrumEstimate<double> spectrum;
  Dictionary<double> working_dict;
};

inline ThresholdRule<double> make_rule(RuleKind kind, double lambda, double eta) {
  switch (kind) {
    case RuleKind::Soft:
      return ThresholdRule<double>::soft(lambda);
    case RuleKind::Hard:
      return ThresholdRule<double>::hard(lambda);
    case RuleKind::HardRidge:
    default:
      return ThresholdRule<double>::hard_ridge(lambda, eta);
  }
}

inline PipelineResult run_pipeline(const Dictionary<double>& dict, const PipelineConfig& cfg) {
  PipelineResult out;
  const Vec<double>& y = dict.y_centered;

  if (cfg.screen) {
    ScreenConfig<double> sc;
    sc.theta_ratio = cfg.theta;
    sc.eta = cfg.eta;
    sc.omega = cfg.omega;
    sc.max_iter = cfg.screen_max_iter;
    sc.tol = cfg.tol;
    sc.cooling = cfg.cooling;
    sc.cooling_alpha = cfg.cooling_alpha;
    sc.squeeze = cfg.squeeze;
    const ScreenResult<double> scr = gist_screen(dict, y, sc);
    out.screened_groups = scr.kept_frequencies;
    if (out.screened_groups.empty())
      throw DivergenceError("run_pipeline: screening removed every frequency");
    out.working_dict = dict.restrict(out.screened_groups);
  } else {
    out.screened_groups.resize(static_cast<std::size_t>(dict.num_groups()));
    std::iota(out.screened_groups.begin(), out.screened_groups.end(), Index(0));
    out.working_dict = dict;
  }

  const Dictionary<double>& wd = out.working_dict;
  const ThresholdRule<double> rule = make_rule(cfg.rule, 0.0, cfg.eta);
  const LambdaGrid<double> grid =
      default_lambda_grid(wd, wd.y_centered, cfg.grid_size, cfg.lambda_min_ratio);

  FitConfig<double> fc;
  fc.omega = cfg.omega;
  fc.max_iter = cfg.max_iter;
  fc.tol = cfg.tol;
  fc.grouped = cfg.grouped;
  out.path = compute_path(wd, wd.y_centered, rule, grid, fc);

  ScvConfig<double> scv;
  scv.folds = cfg.folds;
  scv.eta = cfg.eta;
  scv.seed = cfg.seed;
  scv_bic_score(wd, wd.y_centered, out.path, scv);

  out.refit = refit_selected(wd, wd.y_centered, out.path);

  double df = out.path.df[static_cast<std::size_t>(out.path.selected_index)];
  out.spectrum = recover_spectrum(wd, out.refit, df);

  for (Index g : out.refit.support) {
    out.selected_groups.push_back(out.screened_groups[static_cast<std::size_t>(g)]);
    out.selected_frequencies.push_back(wd.frequencies[static_cast<std::size_t>(g)]);
  }
  return out;
}

}  // namespace gist

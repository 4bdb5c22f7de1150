// Command-line front end: spectral fitting on CSV time series, screening,
// path export, Monte-Carlo reproduction presets, and design diagnostics.

#include <cstdlib>
#include <iostream>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gist/diagnostics.hpp"
#include "gist/io.hpp"
#include "gist/pipeline.hpp"
#include "gist/simulation.hpp"

namespace {

struct CommonOpts {
  std::string input;
  std::string out = "gist_out";
  std::string header = "auto";
  double f_max = 0.0;  // 0: derive from the minimum sample spacing
  double resolution = 0.0;
  gist::Index bins = 0;
  std::string rule = "hard-ridge";
  bool non_group = false;
  double eta = 1e-2;
  double omega = 2.0;
  double tol = 1e-4;
  gist::Index max_iter = 200;
  bool no_screen = false;
  double theta = 0.25;
  gist::Index theta_n = 0;  // overrides theta when set
  double alpha = 0.01;
  bool no_cooling = false;
  bool no_squeeze = false;
  gist::Index grid_size = 100;
  double lambda_min_ratio = 1e-3;
  gist::Index folds = 5;
  std::uint64_t seed = 0;
  gist::Index jobs = 0;
};

void add_grid_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--f-max", o.f_max, "Upper band limit in Hz (default: 1/(2*min sample spacing))");
  cmd->add_option("--resolution", o.resolution, "Frequency resolution in Hz");
  cmd->add_option("--bins", o.bins, "Number of frequency bins D (alternative to --resolution)");
}

void add_rule_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--rule", o.rule, "Threshold rule: hard-ridge | soft | hard")
      ->check(CLI::IsMember({"hard-ridge", "soft", "hard"}));
  cmd->add_flag("--non-group", o.non_group, "Threshold coefficients individually, not as sine/cosine pairs");
  cmd->add_option("--eta", o.eta, "Ridge shrinkage of the hard-ridge rule");
  cmd->add_option("--omega", o.omega, "Relaxation parameter");
  cmd->add_option("--tol", o.tol, "Convergence tolerance on the coefficient change");
  cmd->add_option("--max-iter", o.max_iter, "Iteration cap per fit");
}

void add_screen_opts(CLI::App* cmd, CommonOpts& o, bool with_theta_n = true) {
  cmd->add_flag("--no-screen", o.no_screen, "Skip the screening stage");
  cmd->add_option("--theta", o.theta, "Screening candidate ratio (kept groups = ceil(theta*N))");
  if (with_theta_n)
    cmd->add_option("--thetaN", o.theta_n, "Kept groups after screening (overrides --theta)");
  cmd->add_option("--alpha", o.alpha, "Sigmoidal cooling rate");
  cmd->add_flag("--no-cooling", o.no_cooling, "Disable the cooling schedule");
  cmd->add_flag("--no-squeeze", o.no_squeeze, "Disable squeezing of killed groups");
}

void add_select_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--grid-size", o.grid_size, "Lambda grid length");
  cmd->add_option("--lambda-min-ratio", o.lambda_min_ratio, "Smallest lambda as a fraction of lambda_max");
  cmd->add_option("--folds", o.folds, "Cross-validation folds");
}

void add_common_tail(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "Random seed (GIST_SEED overrides when the flag is absent)");
  cmd->add_option("--jobs", o.jobs, "Worker threads (default: hardware concurrency)");
  cmd->add_option("-o,--out", o.out, "Output path prefix");
}

gist::HeaderMode header_mode(const std::string& s) {
  if (s == "yes") return gist::HeaderMode::Yes;
  if (s == "no") return gist::HeaderMode::No;
  return gist::HeaderMode::Auto;
}

gist::RuleKind rule_kind(const std::string& s) {
  if (s == "soft") return gist::RuleKind::Soft;
  if (s == "hard") return gist::RuleKind::Hard;
  return gist::RuleKind::HardRidge;
}

gist::Index effective_jobs(gist::Index requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<gist::Index>(hc) : 1;
}

void apply_seed_env(CLI::App* cmd, CommonOpts& o) {
  if (cmd->count("--seed") == 0) {
    if (const char* env = std::getenv("GIST_SEED")) o.seed = std::strtoull(env, nullptr, 10);
  }
}

gist::FrequencyGrid<double> make_grid(const CommonOpts& o, const gist::TimeSeries<double>& ts) {
  double fmax = o.f_max;
  if (fmax <= 0.0) {
    double min_dt = std::numeric_limits<double>::infinity();
    for (gist::Index n = 1; n < ts.times.size(); ++n)
      min_dt = std::min(min_dt, ts.times(n) - ts.times(n - 1));
    fmax = 1.0 / (2.0 * min_dt);
  }
  if (o.bins > 0) return gist::FrequencyGrid<double>(fmax, o.bins);
  const double res = o.resolution > 0.0 ? o.resolution : fmax / 250.0;
  return gist::FrequencyGrid<double>::from_resolution(fmax, res);
}

gist::PipelineConfig make_pipeline_config(const CommonOpts& o, gist::Index num_samples) {
  gist::PipelineConfig pc;
  pc.rule = rule_kind(o.rule);
  pc.grouped = !o.non_group;
  pc.eta = o.eta;
  pc.omega = o.omega;
  pc.tol = o.tol;
  pc.max_iter = o.max_iter;
  pc.screen = !o.no_screen;
  pc.theta = o.theta_n > 0 ? double(o.theta_n) / double(num_samples) : o.theta;
  pc.cooling_alpha = o.alpha;
  pc.cooling = !o.no_cooling;
  pc.squeeze = !o.no_squeeze;
  pc.grid_size = o.grid_size;
  pc.lambda_min_ratio = o.lambda_min_ratio;
  pc.folds = o.folds;
  pc.seed = o.seed;
  return pc;
}

/// Stage-labelled execution; numerical failures exit with code 2.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    std::cerr << "error in " << name << " stage: " << e.what() << '\n';
    std::exit(2);
  }
}

int cmd_fit(const CommonOpts& o) {
  gist::TimeSeries<double> ts;
  try {
    ts = gist::read_timeseries_csv(o.input, header_mode(o.header));
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  }
  const auto dict = stage("dictionary", [&] { return gist::build_dictionary(ts, make_grid(o, ts)); });
  const auto res = stage("fit", [&] { return gist::run_pipeline(dict, make_pipeline_config(o, ts.times.size())); });

  nlohmann::json j = gist::spectrum_to_json(res.spectrum);
  j["lambda_selected"] = res.path.grid.values[static_cast<std::size_t>(res.path.selected_index)];
  j["tau0"] = res.working_dict.tau0;
  gist::write_json(o.out + ".json", j);
  gist::write_spectrum_csv(o.out + "_amplitudes.csv", res.spectrum);
  std::cerr << "selected " << res.spectrum.entries.size() << " components; wrote " << o.out
            << ".json\n";
  return 0;
}

int cmd_screen(const CommonOpts& o) {
  gist::TimeSeries<double> ts;
  try {
    ts = gist::read_timeseries_csv(o.input, header_mode(o.header));
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  }
  const auto dict = stage("dictionary", [&] { return gist::build_dictionary(ts, make_grid(o, ts)); });
  const auto scr = stage("screening", [&] {
    gist::ScreenConfig<double> sc;
    sc.theta_ratio = o.theta_n > 0 ? double(o.theta_n) / double(ts.times.size()) : o.theta;
    sc.eta = o.eta;
    sc.omega = o.omega;
    sc.max_iter = 500;
    sc.tol = o.tol;
    sc.cooling = !o.no_cooling;
    sc.cooling_alpha = o.alpha;
    sc.squeeze = !o.no_squeeze;
    return gist::gist_screen(dict, dict.y_centered, sc);
  });

  nlohmann::json freqs = nlohmann::json::array();
  for (gist::Index g : scr.kept_frequencies)
    freqs.push_back(dict.frequencies[static_cast<std::size_t>(g)]);
  gist::write_json(o.out + ".json", {{"schema", "gist-screen/1"},
                                     {"kept_frequencies", freqs},
                                     {"iterations", scr.iterations},
                                     {"converged", scr.converged}});
  std::cerr << "kept " << scr.kept_frequencies.size() << " of " << dict.num_groups()
            << " frequencies\n";
  return 0;
}

int cmd_path(const CommonOpts& o) {
  gist::TimeSeries<double> ts;
  try {
    ts = gist::read_timeseries_csv(o.input, header_mode(o.header));
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  }
  const auto dict = stage("dictionary", [&] { return gist::build_dictionary(ts, make_grid(o, ts)); });
  const auto res = stage("path", [&] { return gist::run_pipeline(dict, make_pipeline_config(o, ts.times.size())); });
  gist::write_path_csv(o.out + "_path.csv", res.path);
  std::cerr << "wrote " << o.out << "_path.csv (selected index " << res.path.selected_index
            << ", tau0 " << res.working_dict.tau0 << ")\n";
  return 0;
}

int cmd_simulate(const CommonOpts& o, const std::string& preset, const std::string& experiment,
                 double sigma2, gist::Index runs, const std::vector<gist::Index>& theta_list) {
  gist::SimSpec spec;
  std::string exp = experiment;
  if (preset == "twinsine") {
    spec = gist::presets::twinsine(sigma2, runs, o.seed);
  } else if (preset == "screening-hard") {
    spec = gist::presets::screening_hard(sigma2, runs, o.seed);
  } else if (preset == "misspecified") {
    spec = gist::presets::misspecified(sigma2, runs, o.seed);
  } else if (preset == "screening") {  // retention study on the twinsine signal
    spec = gist::presets::twinsine(sigma2, runs, o.seed);
    exp = "retention";
  } else {
    std::cerr << "unknown preset: " << preset << '\n';
    return 1;
  }

  const gist::Index jobs = effective_jobs(o.jobs);
  gist::PipelineConfig pc = make_pipeline_config(o, spec.num_samples);
  if (exp == "identify" && !theta_list.empty())
    pc.theta = double(theta_list.front()) / double(spec.num_samples);

  if (exp == "identify") {
    const auto rep = stage("simulate", [&] { return gist::run_identification_experiment(spec, pc, jobs); });
    gist::write_json(o.out + ".json", gist::identification_report_to_json(rep));
    gist::write_identification_csv(o.out + "_rates.csv", rep);
    std::cerr << "true-positive rate " << rep.true_positive_rate << ", mean spurious "
              << rep.mean_spurious_count << ", mean runtime " << rep.mean_runtime_seconds
              << " s/run\n";
  } else if (exp == "retention") {
    std::vector<gist::Index> thetas = theta_list;
    if (thetas.empty()) thetas = {100, 50, 25};
    const auto rep = stage("simulate", [&] {
      return gist::run_screening_experiment(spec, thetas, pc, /*fit_stage=*/true, jobs);
    });
    gist::write_json(o.out + ".json", gist::retention_report_to_json(rep));
    gist::write_retention_csv(o.out + ".csv", rep);
    for (const auto& e : rep.entries)
      std::cerr << "thetaN " << e.theta_n << ": retention " << e.retention << ", miss rate "
                << e.miss_rate << ", total time " << e.total_seconds << " s\n";
  } else {
    std::cerr << "unknown experiment: " << exp << '\n';
    return 1;
  }
  return 0;
}

int cmd_diagnose(const CommonOpts& o, const std::string& preset, double sigma2, double lambda) {
  gist::SimSpec spec;
  if (preset == "twinsine")
    spec = gist::presets::twinsine(sigma2, 1, o.seed);
  else if (preset == "misspecified")
    spec = gist::presets::misspecified(sigma2, 1, o.seed);
  else if (preset == "screening-hard")
    spec = gist::presets::screening_hard(sigma2, 1, o.seed);
  else {
    std::cerr << "unknown preset: " << preset << '\n';
    return 1;
  }

  const auto out = stage("diagnostics", [&] {
    gist::SimSpec noiseless = spec;
    noiseless.sigma2 = 0.0;
    const gist::TimeSeries<double> ts = gist::generate_signal(noiseless, 0);
    const gist::Dictionary<double> dict = gist::build_dictionary(ts, spec.grid());

    gist::DiagnosticsInput<double> in;
    in.true_support = spec.true_grid_groups();
    in.lambda = lambda;
    in.eta = o.eta;
    in.sigma = std::sqrt(sigma2 > 0.0 ? sigma2 : 1.0);
    // exact standardized-coordinate truth from the preset amplitudes/phases
    in.beta_star = gist::Vec<double>::Zero(dict.num_columns());
    const gist::Index D = dict.num_groups();
    for (std::size_t k = 0; k < spec.true_frequencies.size(); ++k) {
      const gist::Index g = static_cast<gist::Index>(
          std::llround(spec.true_frequencies[k] / spec.grid().resolution())) - 1;
      const double a = spec.amplitudes[k] * std::cos(spec.phases[k]);
      const double b = -spec.amplitudes[k] * std::sin(spec.phases[k]);
      if (dict.column_scales(g) > 0.0) in.beta_star(g) = a * dict.column_scales(g);
      if (dict.column_scales(g + D) > 0.0) in.beta_star(g + D) = b * dict.column_scales(g + D);
    }
    auto diag = gist::selection_diagnostics(dict, in);
    return std::pair{diag, dict.tau0};
  });

  const auto& [diag, tau0] = out;
  gist::write_json(o.out + ".json", {{"schema", "gist-diagnostics/1"},
                                     {"kappa", diag.kappa},
                                     {"mu", diag.mu},
                                     {"M", diag.M},
                                     {"L", diag.L},
                                     {"M_prime", diag.Mp},
                                     {"L_prime", diag.Lp},
                                     {"iota", diag.iota},
                                     {"iota_statement", diag.iota_statement},
                                     {"bound_l1", diag.bound_l1},
                                     {"bound_l0l2", diag.bound_l0l2},
                                     {"bound_l1_raw", diag.bound_l1_raw},
                                     {"bound_l0l2_raw", diag.bound_l0l2_raw},
                                     {"tau0", tau0}});
  std::cerr << "kappa " << diag.kappa << ", mu " << diag.mu << ", M' - M " << diag.Mp - diag.M
            << ", L' - L " << diag.Lp - diag.L << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-resolution sparse spectral estimation by group iterative thresholding"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string preset = "twinsine";
  std::string experiment = "identify";
  double sigma2 = 1.0;
  double lambda = 1.0;
  gist::Index runs = 50;
  std::vector<gist::Index> theta_list;

  auto* fit = app.add_subcommand("fit", "Estimate a sparse spectrum from a CSV time series");
  fit->add_option("input", o.input, "CSV file with columns t,y")->required();
  fit->add_option("--header", o.header, "Header handling: auto | yes | no")
      ->check(CLI::IsMember({"auto", "yes", "no"}));
  add_grid_opts(fit, o);
  add_rule_opts(fit, o);
  add_screen_opts(fit, o);
  add_select_opts(fit, o);
  add_common_tail(fit, o);

  auto* screen = app.add_subcommand("screen", "Reduce the candidate frequency set");
  screen->add_option("input", o.input, "CSV file with columns t,y")->required();
  screen->add_option("--header", o.header, "Header handling: auto | yes | no");
  add_grid_opts(screen, o);
  add_rule_opts(screen, o);
  add_screen_opts(screen, o);
  add_common_tail(screen, o);

  auto* path = app.add_subcommand("path", "Export the lambda path with SCV-BIC scores");
  path->add_option("input", o.input, "CSV file with columns t,y")->required();
  path->add_option("--header", o.header, "Header handling: auto | yes | no");
  add_grid_opts(path, o);
  add_rule_opts(path, o);
  add_screen_opts(path, o);
  add_select_opts(path, o);
  add_common_tail(path, o);

  auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo experiment preset");
  sim->add_option("--preset", preset, "twinsine | screening-hard | misspecified | screening");
  sim->add_option("--experiment", experiment, "identify | retention")
      ->check(CLI::IsMember({"identify", "retention"}));
  sim->add_option("--sigma2", sigma2, "Noise variance");
  sim->add_option("--runs", runs, "Number of Monte-Carlo runs");
  sim->add_option("--thetaN", theta_list,
                  "Kept dimensions: retention sweeps the list; identify uses a single value");
  add_rule_opts(sim, o);
  add_screen_opts(sim, o, /*with_theta_n=*/false);
  add_select_opts(sim, o);
  add_common_tail(sim, o);

  auto* diag = app.add_subcommand("diagnose", "Selection-consistency diagnostics for a preset design");
  diag->add_option("--preset", preset, "twinsine | screening-hard | misspecified");
  diag->add_option("--sigma2", sigma2, "Noise variance");
  diag->add_option("--lambda", lambda, "Threshold level (tau0-scaled units)");
  diag->add_option("--eta", o.eta, "Ridge shrinkage");
  add_common_tail(diag, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (fit->parsed()) {
    apply_seed_env(fit, o);
    return cmd_fit(o);
  }
  if (screen->parsed()) {
    apply_seed_env(screen, o);
    return cmd_screen(o);
  }
  if (path->parsed()) {
    apply_seed_env(path, o);
    return cmd_path(o);
  }
  if (sim->parsed()) {
    apply_seed_env(sim, o);
    return cmd_simulate(o, preset, experiment, sigma2, runs, theta_list);
  }
  if (diag->parsed()) {
    apply_seed_env(diag, o);
    return cmd_diagnose(o, preset, sigma2, lambda);
  }
  return 1;
}

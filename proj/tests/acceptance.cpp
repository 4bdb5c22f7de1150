// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Heavier Monte-Carlo checks live here rather than in the
// unit tests; everything is seeded and deterministic.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gist/diagnostics.hpp"
#include "gist/io.hpp"
#include "gist/pipeline.hpp"
#include "gist/simulation.hpp"
#include "test_support.hpp"

using namespace gist;

namespace {

int failures = 0;

void criterion(int number, const std::string& description, const std::function<bool(std::string&)>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d [%s] %s (%.1f s)%s%s\n", number, ok ? "PASS" : "FAIL",
              description.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

Index jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<Index>(hc) : 1;
}

// ---- criterion 1: proximal correspondence --------------------------------

bool check_prox(std::string& detail) {
  struct Pair {
    ThresholdRule<double> rule;
    PenaltySpec<double> pen;
  };
  const std::vector<Pair> pairs = {
      {ThresholdRule<double>::soft(1.0), PenaltySpec<double>::l1(1.0)},
      {ThresholdRule<double>::hard(1.0), PenaltySpec<double>::hard_pen(1.0)},
      {ThresholdRule<double>::hard(1.0), PenaltySpec<double>::l0(1.0)},
      {ThresholdRule<double>::hard_ridge(1.0, 0.5), PenaltySpec<double>::hard_ridge_pen(1.0, 0.5)},
      {ThresholdRule<double>::hard_ridge(1.0, 0.5), PenaltySpec<double>::l0l2(1.0, 0.5)},
      {ThresholdRule<double>::soft(2.5), PenaltySpec<double>::l1(2.5)},
      {ThresholdRule<double>::hard_ridge(2.0, 1.0), PenaltySpec<double>::l0l2(2.0, 1.0)},
  };
  Index checked = 0, passed = 0;
  for (const auto& [rule, pen] : pairs) {
    for (double y = -5.0; y <= 5.0 + 1e-9; y += 0.05) {
      ++checked;
      if (proximal_oracle_check(rule, pen, y, 0.01).pass) ++passed;
    }
  }
  detail = std::to_string(passed) + "/" + std::to_string(checked) + " sweep points";
  return passed == checked;
}

// ---- criterion 2: energy monotonicity ------------------------------------

bool check_energy(std::string& detail) {
  std::mt19937 gen(12345);
  std::uniform_int_distribution<Index> n_dist(12, 30), d_dist(4, 15);
  std::uniform_real_distribution<double> lam_dist(0.05, 0.8);
  Index monotone_violations = 0, converged = 0, residual_failures = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const Index n = n_dist(gen);
    const Index d = std::min(d_dist(gen), n / 2);
    const auto dict = testsup::random_dictionary(n, d, 10000u + unsigned(inst));
    const Vec<double>& y = dict.y_centered;
    const double omega = inst % 2 == 0 ? 0.5 : 1.0;
    const double lambda = lam_dist(gen);
    ThresholdRule<double> rule;
    switch (inst % 3) {
      case 0: rule = ThresholdRule<double>::soft(lambda); break;
      case 1: rule = ThresholdRule<double>::hard(lambda); break;
      default: rule = ThresholdRule<double>::hard_ridge(lambda, 0.05); break;
    }
    FitConfig<double> cfg;
    cfg.rule = rule;
    cfg.omega = omega;
    cfg.tol = 1e-4;
    cfg.max_iter = 200;
    cfg.record_trajectory = true;
    const auto fit = gist_fit(dict, y, cfg);
    const auto pen = matched_penalty(rule);

    double prev = std::numeric_limits<double>::infinity();
    for (const auto& [beta, xi] : fit.trajectory) {
      const double cur = energy_value(dict, y, beta, xi, pen, omega);
      if (cur > prev + 1e-9 * std::max(1.0, std::abs(prev))) ++monotone_violations;
      prev = cur;
    }
    if (fit.converged) {
      ++converged;
      if (fit.fixed_point_residual >= 1e-3) ++residual_failures;
    }
  }
  detail = std::to_string(converged) + "/50 converged, " + std::to_string(monotone_violations) +
           " energy increases, " + std::to_string(residual_failures) + " residual failures";
  return monotone_violations == 0 && residual_failures == 0 && converged > 0;
}

// ---- criterion 3: quantile-threshold optimality ---------------------------

bool check_quantile(std::string& detail) {
  Index checked = 0, passed = 0;
  for (int i = 0; i < 100; ++i) {
    const Index D = 4 + (i % 5);  // 4..8
    const Vec<double> xi = testsup::random_vector(2 * D, 20000u + unsigned(i));
    for (double eta : {0.0, 0.01, 1.0}) {
      for (Index m = 1; m <= std::min<Index>(4, D); ++m) {
        ++checked;
        const Vec<double> hat = quantile_threshold(xi, D, m, eta);
        const double obj_hat = 0.5 * (xi - hat).squaredNorm() + 0.5 * eta * hat.squaredNorm();
        double best = std::numeric_limits<double>::infinity();
        std::vector<bool> mask(static_cast<std::size_t>(D), false);
        std::fill(mask.end() - m, mask.end(), true);
        do {
          Vec<double> b = Vec<double>::Zero(2 * D);
          for (Index k = 0; k < D; ++k) {
            if (!mask[static_cast<std::size_t>(k)]) continue;
            b(k) = xi(k) / (1.0 + eta);
            b(k + D) = xi(k + D) / (1.0 + eta);
          }
          best = std::min(best, 0.5 * (xi - b).squaredNorm() + 0.5 * eta * b.squaredNorm());
        } while (std::next_permutation(mask.begin(), mask.end()));
        if (obj_hat <= best + 1e-12) ++passed;
      }
    }
  }
  detail = std::to_string(passed) + "/" + std::to_string(checked) + " instances optimal";
  return passed == checked;
}

// ---- criterion 4: screening fixed point ------------------------------------

bool check_screen_fixed_point(std::string& detail) {
  Index ok = 0, bound_violations = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index n = 18 + 2 * (inst % 6);
    const Index d = 8 + (inst % 7);
    const auto dict = testsup::random_dictionary(n, d, 30000u + unsigned(inst));
    const Vec<double>& y = dict.y_centered;
    const Index m = 3 + (inst % 4);
    ScreenConfig<double> cfg;
    cfg.theta_ratio = double(m) / double(n);
    cfg.cooling = false;
    cfg.squeeze = false;
    cfg.omega = 1.0;
    cfg.eta = 0.01;
    cfg.tol = 1e-12;
    cfg.max_iter = 50000;
    const auto res = gist_screen(dict, y, cfg);
    for (std::size_t j = 0; j < res.support_sizes.size(); ++j)
      if (res.support_sizes[j] > res.m_schedule[j]) ++bound_violations;
    if (!res.converged || res.kept_frequencies.empty()) continue;
    const Mat<double> Xr = dict.columns_of(res.kept_frequencies);
    const Vec<double> ridge = ridge_solve(Xr, y, cfg.eta * dict.tau0 * dict.tau0);
    const Vec<double> expanded = dict.expand_restricted(res.kept_frequencies, ridge);
    if ((res.beta.values - expanded).lpNorm<Eigen::Infinity>() < 1e-6) ++ok;
  }
  detail = std::to_string(ok) + "/20 match the restricted ridge, " +
           std::to_string(bound_violations) + " cardinality violations";
  return ok == 20 && bound_violations == 0;
}

// ---- criterion 5: screening retention --------------------------------------

bool check_retention(std::string& detail) {
  const SimSpec spec = presets::twinsine(1.0, 50, 2026);
  PipelineConfig pc;
  const auto rep = run_screening_experiment(spec, {25}, pc, /*fit_stage=*/false, jobs());
  detail = "retention " + std::to_string(rep.entries[0].retention);
  return rep.entries[0].retention == 1.0;
}

// ---- criterion 6: identification rates -------------------------------------

bool check_identification(std::string& detail) {
  const Index J = jobs();
  PipelineConfig hr;  // defaults: hard-ridge, screening at theta = 0.25

  const auto rep1 = run_identification_experiment(presets::twinsine(1.0, 50, 101), hr, J);
  const auto rep8 = run_identification_experiment(presets::twinsine(8.0, 50, 101), hr, J);

  // the l1 comparator is the unstructured soft rule (the basis-pursuit
  // analogue the paper's experiments compare against); the group-soft
  // variant is measured alongside for reference
  PipelineConfig soft = hr;
  soft.rule = RuleKind::Soft;
  soft.grouped = false;
  const auto repsoft = run_identification_experiment(presets::twinsine(1.0, 50, 101), soft, J);
  PipelineConfig gsoft = hr;
  gsoft.rule = RuleKind::Soft;
  const auto repgsoft = run_identification_experiment(presets::twinsine(1.0, 50, 101), gsoft, J);

  PipelineConfig hard = hr;
  hard.rule = RuleKind::Hard;
  const auto rephard = run_identification_experiment(presets::twinsine(8.0, 50, 101), hard, J);

  double min1 = 1.0, min8 = 1.0;
  for (double r : rep1.true_frequency_rate) min1 = std::min(min1, r);
  for (double r : rep8.true_frequency_rate) min8 = std::min(min8, r);

  std::ostringstream os;
  os << "sigma2=1: min rate " << min1 << ", spurious " << rep1.mean_spurious_count
     << "; sigma2=8: min rate " << min8 << "; l1 spurious " << repsoft.mean_spurious_count
     << " (group form " << repgsoft.mean_spurious_count << ", miss " << repgsoft.miss_rate
     << "); hard miss " << rephard.miss_rate << " vs hr miss " << rep8.miss_rate;
  detail = os.str();

  return min1 >= 0.80 && rep1.mean_spurious_count < 1.0 && min8 >= 0.50 &&
         repsoft.mean_spurious_count > rep1.mean_spurious_count &&
         rephard.miss_rate > rep8.miss_rate && rep1.failed_runs == 0 && rep8.failed_runs == 0;
}

// ---- criterion 7: misspecified resolution -----------------------------------

bool check_misspecified(std::string& detail) {
  const SimSpec spec = presets::misspecified(1.0, 50, 77);
  PipelineConfig pc;
  const auto rep = run_identification_experiment(spec, pc, jobs());
  const std::vector<Index> target = spec.true_grid_groups();  // nearest-grid set
  std::ostringstream os;
  os << "modal support {";
  for (Index g : rep.modal_support) os << " " << rep.grid_frequencies[std::size_t(g)];
  os << " } in " << rep.modal_support_count << "/50 runs";
  detail = os.str();
  return rep.modal_support == target;
}

// ---- criterion 8: selection diagnostics -------------------------------------

bool check_diagnostics(std::string& detail) {
  SimSpec spec = presets::twinsine(1.0, 1, 0);
  spec.sigma2 = 0.0;
  const auto ts = generate_signal(spec, 0);
  const auto dict = build_dictionary(ts, spec.grid());

  DiagnosticsInput<double> in;
  in.true_support = spec.true_grid_groups();
  in.lambda = 1.0;
  in.eta = 0.01;
  in.sigma = 1.0;
  in.beta_star = Vec<double>::Zero(dict.num_columns());
  const Index D = dict.num_groups();
  for (std::size_t k = 0; k < spec.true_frequencies.size(); ++k) {
    const Index g = in.true_support[k];
    const double a = spec.amplitudes[k] * std::cos(spec.phases[k]);
    const double b = -spec.amplitudes[k] * std::sin(spec.phases[k]);
    in.beta_star(g) = a * dict.column_scales(g);
    if (dict.column_scales(g + D) > 0) in.beta_star(g + D) = b * dict.column_scales(g + D);
  }
  const auto diag = selection_diagnostics(dict, in);
  std::ostringstream os;
  os << "M=" << diag.M << " M'=" << diag.Mp << " L=" << diag.L << " L'=" << diag.Lp
     << " bounds (" << diag.bound_l1_raw << ", " << diag.bound_l0l2_raw << ")";
  detail = os.str();
  const bool finite = std::isfinite(diag.bound_l1_raw) && std::isfinite(diag.bound_l0l2_raw);
  return diag.Mp > diag.M && diag.Lp > diag.L && finite && diag.bound_l1_raw >= 0.0 &&
         diag.bound_l0l2_raw >= 0.0;
}

// ---- criterion 9: CLI determinism -------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool check_cli_determinism(std::string& detail) {
  const std::string cli = GIST_CLI_PATH;
  const auto dir = std::filesystem::temp_directory_path() / "gist_acceptance";
  std::filesystem::create_directories(dir);
  const std::string base = dir.string();

  // deterministic input series
  const SimSpec spec = presets::twinsine(1.0, 1, 13);
  write_timeseries_csv(base + "/in.csv", generate_signal(spec, 0));

  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " 2>" + base + "/stderr.log";
    return std::system(cmd.c_str());
  };

  // contract smoke test: a noiseless on-grid sinusoid comes back as one
  // component with the closed-form amplitude
  {
    SimSpec single;
    single.true_frequencies = {0.25};
    single.amplitudes = {1.5};
    single.phases = {0.4};
    single.num_samples = 60;
    single.sigma2 = 0.0;
    write_timeseries_csv(base + "/single.csv", generate_signal(single, 0));
    if (run("fit " + base + "/single.csv --resolution 0.002 --rule hard --seed 1 -o " + base + "/single") != 0)
      return false;
    const auto spec_json = nlohmann::json::parse(slurp(base + "/single.json"));
    const auto& comps = spec_json.at("components");
    if (comps.size() != 1 || std::abs(comps[0].at("A").get<double>() - 1.5) > 1e-6 ||
        std::abs(comps[0].at("f").get<double>() - 0.25) > 1e-12) {
      detail = "single-sinusoid fit wrong: " + comps.dump();
      return false;
    }
  }

  if (run("fit " + base + "/in.csv --resolution 0.002 --seed 7 -o " + base + "/fit1") != 0)
    return false;
  if (run("fit " + base + "/in.csv --resolution 0.002 --seed 7 -o " + base + "/fit2") != 0)
    return false;
  const bool fit_same = slurp(base + "/fit1.json") == slurp(base + "/fit2.json") &&
                        slurp(base + "/fit1_amplitudes.csv") == slurp(base + "/fit2_amplitudes.csv") &&
                        !slurp(base + "/fit1.json").empty();

  if (run("simulate --preset twinsine --sigma2 1 --runs 3 --seed 7 --jobs 2 -o " + base + "/sim1") != 0)
    return false;
  if (run("simulate --preset twinsine --sigma2 1 --runs 3 --seed 7 --jobs 1 -o " + base + "/sim2") != 0)
    return false;
  const bool sim_same = slurp(base + "/sim1.json") == slurp(base + "/sim2.json") &&
                        slurp(base + "/sim1_rates.csv") == slurp(base + "/sim2_rates.csv") &&
                        !slurp(base + "/sim1.json").empty();

  // seed from the environment must reproduce the --seed run
  if (std::system(("GIST_SEED=7 " + cli + " fit " + base + "/in.csv --resolution 0.002 -o " + base +
                   "/fit3 2>/dev/null")
                      .c_str()) != 0)
    return false;
  const bool env_same = slurp(base + "/fit3.json") == slurp(base + "/fit1.json");

  // empty input: parse failure must exit with code 1
  std::ofstream(base + "/empty.csv").close();
  const int rc = std::system((cli + " fit " + base + "/empty.csv -o " + base + "/none 2>/dev/null").c_str());
  const bool empty_exit_1 = WIFEXITED(rc) && WEXITSTATUS(rc) == 1;

  // runaway relaxation: numerical failure must exit with code 2
  const int rc2 = std::system(
      (cli + " fit " + base + "/in.csv --resolution 0.002 --omega 100 -o " + base + "/div 2>/dev/null").c_str());
  const bool diverge_exit_2 = WIFEXITED(rc2) && WEXITSTATUS(rc2) == 2;

  detail = std::string("fit ") + (fit_same ? "stable" : "UNSTABLE") + ", simulate " +
           (sim_same ? "stable" : "UNSTABLE") + ", env seed " + (env_same ? "ok" : "wrong") +
           ", empty-input exit " + (empty_exit_1 ? "1" : "wrong") + ", divergence exit " +
           (diverge_exit_2 ? "2" : "wrong");
  return fit_same && sim_same && env_same && empty_exit_1 && diverge_exit_2;
}

}  // namespace

int main() {
  std::printf("acceptance suite (%lld worker threads)\n", static_cast<long long>(jobs()));
  criterion(1, "prox maps match brute-force penalty minimization", check_prox);
  criterion(2, "energy decreases along relaxed iterates; fixed points reached", check_energy);
  criterion(3, "quantile thresholding attains the l0-constrained optimum", check_quantile);
  criterion(4, "fixed-m screening converges to the restricted ridge", check_screen_fixed_point);
  criterion(5, "screening at thetaN=25 retains all twinsine frequencies, 50/50 runs", check_retention);
  criterion(6, "identification rates and rule comparisons on the twinsine preset", check_identification);
  criterion(7, "misspecified frequencies resolve to the nearest grid set", check_misspecified);
  criterion(8, "selection diagnostics: hard-ridge exponents dominate, bounds finite", check_diagnostics);
  criterion(9, "CLI outputs are byte-identical under a fixed seed", check_cli_determinism);

  if (failures == 0)
    std::printf("all 9 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}

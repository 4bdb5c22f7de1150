#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "gist/pipeline.hpp"
#include "gist/rng.hpp"
#include "gist/types.hpp"

namespace gist {

/// Monte-Carlo experiment description: a sparse sinusoid signal observed at
/// (by default) unit-spaced times under white Gaussian noise.
struct SimSpec {
  std::vector<double> true_frequencies;  // Hz
  std::vector<double> amplitudes;
  std::vector<double> phases;
  Index num_samples = 100;
  std::optional<Vec<double>> explicit_times;  // default: t_n = n, 1..N
  double sigma2 = 1.0;
  double f_max = 0.5;
  double resolution = 0.002;
  Index runs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (true_frequencies.size() != amplitudes.size() || amplitudes.size() != phases.size())
      throw DimensionError("SimSpec: component lists must have equal length");
    if (sigma2 < 0.0 || runs < 1) throw DimensionError("SimSpec: invalid sigma2/runs");
  }

  Vec<double> times() const {
    if (explicit_times) return *explicit_times;
    Vec<double> t(num_samples);
    for (Index n = 0; n < num_samples; ++n) t(n) = double(n + 1);
    return t;
  }

  FrequencyGrid<double> grid() const {
    return FrequencyGrid<double>::from_resolution(f_max, resolution);
  }

  /// Grid group indices nearest to the true frequencies.
  std::vector<Index> true_grid_groups() const {
    const auto g = grid();
    std::vector<Index> idx;
    for (double f : true_frequencies) {
      Index k = static_cast<Index>(std::llround(f / g.resolution())) - 1;  // group 0 is f_max/D
      k = std::clamp<Index>(k, 0, g.D - 1);
      idx.push_back(k);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
  }
};

/// Deterministic given (spec.seed, run_index): noise comes from an
/// mt19937_64 stream seeded via splitmix64, with Box-Muller normals.
inline TimeSeries<double> generate_signal(const SimSpec& spec, Index run_index) {
  spec.validate();
  TimeSeries<double> ts;
  ts.times = spec.times();
  ts.values = Vec<double>::Zero(ts.times.size());
  for (std::size_t k = 0; k < spec.true_frequencies.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * spec.true_frequencies[k];
    for (Index n = 0; n < ts.times.size(); ++n)
      ts.values(n) += spec.amplitudes[k] * std::cos(w * ts.times(n) + spec.phases[k]);
  }
  if (spec.sigma2 > 0.0) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(run_index)));
    const double sd = std::sqrt(spec.sigma2);
    for (Index n = 0; n < ts.values.size(); ++n) ts.values(n) += rng.normal(0.0, sd);
  }
  return ts;
}

/// Runs fn(run_index) for every run on `jobs` worker threads; outputs are
/// collected by index so aggregation never depends on scheduling.
template <typename Out>
std::vector<Out> run_indexed(Index runs, Index jobs, const std::function<Out(Index)>& fn) {
  std::vector<Out> results(static_cast<std::size_t>(runs));
  if (jobs <= 1) {
    for (Index r = 0; r < runs; ++r) results[static_cast<std::size_t>(r)] = fn(r);
    return results;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  for (Index w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (Index r = next.fetch_add(1); r < runs; r = next.fetch_add(1))
          results[static_cast<std::size_t>(r)] = fn(r);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

struct IdentificationReport {
  std::vector<double> grid_frequencies;
  std::vector<double> detection_rate;       // per grid frequency, fraction of runs selected
  std::vector<double> true_frequency_rate;  // per true (grid-snapped) frequency
  std::vector<double> true_frequencies;     // the grid-snapped truth
  double true_positive_rate = 0;            // mean of true_frequency_rate
  double miss_rate = 0;                     // 1 - true_positive_rate
  double mean_spurious_count = 0;
  double mean_runtime_seconds = 0;          // never serialized; reported on stderr
  Index runs = 0;
  Index failed_runs = 0;
  std::vector<Index> modal_support;         // most frequent selected group set
  Index modal_support_count = 0;
};

/// One full pipeline per run (screen, path, SCV-BIC, refit); aggregates
/// per-frequency identification rates. Per-run failures are counted, not fatal.
inline IdentificationReport run_identification_experiment(const SimSpec& spec,
                                                          const PipelineConfig& pipe,
                                                          Index jobs = 1) {
  spec.validate();
  const FrequencyGrid<double> grid = spec.grid();
  const std::vector<Index> truth = spec.true_grid_groups();

  struct RunOut {
    std::vector<Index> selected;
    bool failed = false;
    double seconds = 0;
  };
  std::function<RunOut(Index)> one = [&](Index r) -> RunOut {
    RunOut o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const TimeSeries<double> ts = generate_signal(spec, r);
      const Dictionary<double> dict = build_dictionary(ts, grid);
      PipelineConfig pc = pipe;
      pc.seed = derive_seed(spec.seed, 0x5eedf01d ^ static_cast<std::uint64_t>(r));
      o.selected = run_pipeline(dict, pc).selected_groups;
    } catch (const std::exception&) {
      o.failed = true;
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return o;
  };
  const auto outs = run_indexed<RunOut>(spec.runs, jobs, one);

  IdentificationReport rep;
  rep.runs = spec.runs;
  rep.grid_frequencies = grid.frequencies();
  rep.detection_rate.assign(rep.grid_frequencies.size(), 0.0);
  for (Index g : truth) rep.true_frequencies.push_back(grid.frequency(g));

  Index ok_runs = 0;
  double spurious = 0;
  std::map<std::vector<Index>, Index> histogram;
  for (const auto& o : outs) {
    rep.mean_runtime_seconds += o.seconds;
    if (o.failed) {
      ++rep.failed_runs;
      continue;
    }
    ++ok_runs;
    ++histogram[o.selected];
    for (Index g : o.selected) {
      rep.detection_rate[static_cast<std::size_t>(g)] += 1.0;
      if (!std::binary_search(truth.begin(), truth.end(), g)) spurious += 1.0;
    }
  }
  for (const auto& [sup, count] : histogram) {
    if (count > rep.modal_support_count) {
      rep.modal_support_count = count;
      rep.modal_support = sup;
    }
  }
  rep.mean_runtime_seconds /= std::max<Index>(spec.runs, 1);
  const double denom = std::max<Index>(ok_runs, 1);
  for (auto& d : rep.detection_rate) d /= denom;
  rep.mean_spurious_count = spurious / denom;
  for (Index g : truth)
    rep.true_frequency_rate.push_back(rep.detection_rate[static_cast<std::size_t>(g)]);
  rep.true_positive_rate =
      std::accumulate(rep.true_frequency_rate.begin(), rep.true_frequency_rate.end(), 0.0) /
      std::max<std::size_t>(rep.true_frequency_rate.size(), 1);
  rep.miss_rate = 1.0 - rep.true_positive_rate;
  return rep;
}

struct RetentionEntry {
  Index theta_n = 0;            // kept dimension after screening
  double retention = 0;         // fraction of runs keeping every true frequency
  double screen_miss_rate = 0;  // mean fraction of true frequencies lost in screening
  double miss_rate = 0;         // mean fraction missed by the final estimate
  double total_seconds = 0;     // screening + fitting + selection, all runs
};

struct RetentionReport {
  std::vector<RetentionEntry> entries;
  Index runs = 0;
  bool fit_stage = true;
};

/// Screening study: for each candidate dimension theta*N, measures how often
/// all true frequencies survive screening and (optionally) the miss rate of
/// the full pipeline afterwards.
inline RetentionReport run_screening_experiment(const SimSpec& spec,
                                                const std::vector<Index>& theta_n_values,
                                                const PipelineConfig& pipe, bool fit_stage = true,
                                                Index jobs = 1) {
  spec.validate();
  const FrequencyGrid<double> grid = spec.grid();
  const std::vector<Index> truth = spec.true_grid_groups();

  RetentionReport rep;
  rep.runs = spec.runs;
  rep.fit_stage = fit_stage;

  for (Index tn : theta_n_values) {
    struct RunOut {
      bool retained_all = false;
      double screen_missed = 0;
      double fit_missed = 0;
      bool failed = false;
      double seconds = 0;
    };
    std::function<RunOut(Index)> one = [&](Index r) -> RunOut {
      RunOut o;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const TimeSeries<double> ts = generate_signal(spec, r);
        const Dictionary<double> dict = build_dictionary(ts, grid);
        PipelineConfig pc = pipe;
        pc.screen = true;
        pc.theta = double(tn) / double(dict.num_samples());
        pc.seed = derive_seed(spec.seed, 0x5c4ee41d ^ static_cast<std::uint64_t>(r));

        if (fit_stage) {
          const PipelineResult res = run_pipeline(dict, pc);
          Index kept = 0, found = 0;
          for (Index g : truth) {
            if (std::binary_search(res.screened_groups.begin(), res.screened_groups.end(), g)) ++kept;
            if (std::binary_search(res.selected_groups.begin(), res.selected_groups.end(), g)) ++found;
          }
          o.retained_all = kept == static_cast<Index>(truth.size());
          o.screen_missed = double(truth.size() - kept) / double(truth.size());
          o.fit_missed = double(truth.size() - found) / double(truth.size());
        } else {
          ScreenConfig<double> sc;
          sc.theta_ratio = pc.theta;
          sc.eta = pc.eta;
          sc.omega = pc.omega;
          sc.max_iter = pc.screen_max_iter;
          sc.tol = pc.tol;
          sc.cooling = pc.cooling;
          sc.cooling_alpha = pc.cooling_alpha;
          sc.squeeze = pc.squeeze;
          const ScreenResult<double> scr = gist_screen(dict, dict.y_centered, sc);
          Index kept = 0;
          for (Index g : truth)
            if (std::binary_search(scr.kept_frequencies.begin(), scr.kept_frequencies.end(), g)) ++kept;
          o.retained_all = kept == static_cast<Index>(truth.size());
          o.screen_missed = double(truth.size() - kept) / double(truth.size());
        }
      } catch (const std::exception&) {
        o.failed = true;
      }
      o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return o;
    };
    const auto outs = run_indexed<RunOut>(spec.runs, jobs, one);

    RetentionEntry e;
    e.theta_n = tn;
    Index ok = 0;
    for (const auto& o : outs) {
      e.total_seconds += o.seconds;
      if (o.failed) continue;
      ++ok;
      e.retention += o.retained_all ? 1.0 : 0.0;
      e.screen_miss_rate += o.screen_missed;
      e.miss_rate += o.fit_missed;
    }
    const double denom = std::max<Index>(ok, 1);
    e.retention /= denom;
    e.screen_miss_rate /= denom;
    e.miss_rate /= denom;
    rep.entries.push_back(e);
  }
  return rep;
}

/// Canned experiment setups.
namespace presets {

/// Five close sinusoids around 0.25 Hz and 0.4 Hz on a delta = 0.002 grid.
inline SimSpec twinsine(double sigma2 = 1.0, Index runs = 50, std::uint64_t seed = 0) {
  SimSpec s;
  s.true_frequencies = {0.248, 0.25, 0.252, 0.398, 0.4};
  s.amplitudes = {2.0, 4.0, 3.0, 3.5, 3.0};
  s.phases = {std::numbers::pi / 4, std::numbers::pi / 6, std::numbers::pi / 3,
              std::numbers::pi / 5, std::numbers::pi / 2};
  s.num_samples = 100;
  s.sigma2 = sigma2;
  s.f_max = 0.5;
  s.resolution = 0.002;
  s.runs = runs;
  s.seed = seed;
  return s;
}

/// Ten equispaced components between 0.24 and 0.282 Hz (snapped to the grid)
/// under heavy noise; amplitudes and phases cycle the twinsine values.
inline SimSpec screening_hard(double sigma2 = 10.0, Index runs = 50, std::uint64_t seed = 0) {
  SimSpec s = twinsine(sigma2, runs, seed);
  s.true_frequencies.clear();
  s.amplitudes.clear();
  s.phases.clear();
  const SimSpec base = twinsine();
  for (int i = 0; i < 10; ++i) {
    const double f = 0.24 + double(i) * (0.282 - 0.24) / 9.0;
    s.true_frequencies.push_back(std::round(f / s.resolution) * s.resolution);
    s.amplitudes.push_back(base.amplitudes[static_cast<std::size_t>(i % 5)]);
    s.phases.push_back(base.phases[static_cast<std::size_t>(i % 5)]);
  }
  return s;
}

/// Twinsine amplitudes/phases at off-grid frequencies; the grid stays at
/// delta = 0.002, so the best identifiable support is the nearest-grid set.
inline SimSpec misspecified(double sigma2 = 1.0, Index runs = 50, std::uint64_t seed = 0) {
  SimSpec s = twinsine(sigma2, runs, seed);
  s.true_frequencies = {0.2476, 0.2503, 0.2528, 0.3976, 0.4008};
  return s;
}

}  // namespace presets

}  // namespace gist

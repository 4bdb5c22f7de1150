#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gist/dictionary.hpp"
#include "gist/selection.hpp"
#include "gist/simulation.hpp"
#include "gist/spectrum.hpp"
#include "gist/types.hpp"

namespace gist {

enum class HeaderMode { Auto, Yes, No };

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

/// Shortest round-trip decimal representation; keeps emitted files
/// byte-stable for identical inputs.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Reads a two-column CSV `t,y`. With HeaderMode::Auto the first line is
/// skipped when it does not parse as numbers.
inline TimeSeries<double> read_timeseries_csv(const std::string& path,
                                              HeaderMode header = HeaderMode::Auto) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path);
  std::vector<double> t, y;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected two comma-separated columns");
    double tv = 0, yv = 0;
    const bool ok = detail::parse_double(std::string_view(line).substr(0, comma), tv) &&
                    detail::parse_double(std::string_view(line).substr(comma + 1), yv);
    if (!ok) {
      if (line_no == 1 && (header == HeaderMode::Auto || header == HeaderMode::Yes)) continue;
      throw ParseError(path + ":" + std::to_string(line_no) + ": cannot parse row");
    }
    if (line_no == 1 && header == HeaderMode::Yes) continue;
    t.push_back(tv);
    y.push_back(yv);
  }
  if (t.empty()) throw ParseError(path + ": no data rows");
  TimeSeries<double> ts;
  ts.times = Eigen::Map<Vec<double>>(t.data(), static_cast<Index>(t.size()));
  ts.values = Eigen::Map<Vec<double>>(y.data(), static_cast<Index>(y.size()));
  ts.validate();
  return ts;
}

inline void write_timeseries_csv(const std::string& path, const TimeSeries<double>& ts) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << "t,y\n";
  for (Index n = 0; n < ts.times.size(); ++n)
    out << detail::format_double(ts.times(n)) << ',' << detail::format_double(ts.values(n)) << '\n';
}

inline nlohmann::json spectrum_to_json(const SpectrumEstimate<double>& spec) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : spec.entries)
    components.push_back({{"f", c.frequency}, {"A", c.amplitude}, {"phi", c.phase}});
  return {{"schema", "gist-spectrum/1"},
          {"intercept", spec.intercept},
          {"sigma2_hat", spec.noise_variance_estimate},
          {"components", components}};
}

inline SpectrumEstimate<double> spectrum_from_json(const nlohmann::json& j) {
  SpectrumEstimate<double> spec;
  spec.intercept = j.at("intercept").get<double>();
  spec.noise_variance_estimate = j.at("sigma2_hat").get<double>();
  for (const auto& c : j.at("components")) {
    SpectrumComponent<double> e;
    e.frequency = c.at("f").get<double>();
    e.amplitude = c.at("A").get<double>();
    e.phase = c.at("phi").get<double>();
    spec.entries.push_back(e);
  }
  return spec;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

/// Sidecar CSV of (frequency, amplitude) pairs.
inline void write_spectrum_csv(const std::string& path, const SpectrumEstimate<double>& spec) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << "f,amplitude\n";
  for (const auto& c : spec.entries)
    out << detail::format_double(c.frequency) << ',' << detail::format_double(c.amplitude) << '\n';
}

/// Per-lambda path export: lambda, support_size, scv, df, scv_bic, selected.
inline void write_path_csv(const std::string& path, const SolutionPath<double>& sp) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << "lambda,support_size,scv,df,scv_bic,selected\n";
  for (std::size_t l = 0; l < sp.grid.values.size(); ++l) {
    out << detail::format_double(sp.grid.values[l]) << ','
        << sp.supports[l].size() << ','
        << detail::format_double(l < sp.scv.size() ? sp.scv[l] : 0.0) << ','
        << detail::format_double(l < sp.df.size() ? sp.df[l] : 0.0) << ','
        << detail::format_double(l < sp.scv_bic.size() ? sp.scv_bic[l] : 0.0) << ','
        << (static_cast<Index>(l) == sp.selected_index ? 1 : 0) << '\n';
  }
}

inline nlohmann::json identification_report_to_json(const IdentificationReport& rep) {
  nlohmann::json truths = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.true_frequencies.size(); ++i)
    truths.push_back({{"f", rep.true_frequencies[i]}, {"rate", rep.true_frequency_rate[i]}});
  nlohmann::json modal = nlohmann::json::array();
  for (Index g : rep.modal_support) modal.push_back(rep.grid_frequencies[static_cast<std::size_t>(g)]);
  return {{"schema", "gist-identification-report/1"},
          {"runs", rep.runs},
          {"failed_runs", rep.failed_runs},
          {"true_frequencies", truths},
          {"true_positive_rate", rep.true_positive_rate},
          {"miss_rate", rep.miss_rate},
          {"mean_spurious_count", rep.mean_spurious_count},
          {"modal_support", modal},
          {"modal_support_count", rep.modal_support_count}};
}

/// Plot-ready rates: one row per dictionary frequency.
inline void write_identification_csv(const std::string& path, const IdentificationReport& rep) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << "frequency,detection_rate\n";
  for (std::size_t k = 0; k < rep.grid_frequencies.size(); ++k)
    out << detail::format_double(rep.grid_frequencies[k]) << ','
        << detail::format_double(rep.detection_rate[k]) << '\n';
}

inline nlohmann::json retention_report_to_json(const RetentionReport& rep) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"theta_n", e.theta_n},
                       {"retention", e.retention},
                       {"screen_miss_rate", e.screen_miss_rate},
                       {"miss_rate", e.miss_rate}});
  return {{"schema", "gist-retention-report/1"},
          {"runs", rep.runs},
          {"fit_stage", rep.fit_stage},
          {"entries", entries}};
}

inline void write_retention_csv(const std::string& path, const RetentionReport& rep) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << "theta_n,retention,screen_miss_rate,miss_rate\n";
  for (const auto& e : rep.entries)
    out << e.theta_n << ',' << detail::format_double(e.retention) << ','
        << detail::format_double(e.screen_miss_rate) << ',' << detail::format_double(e.miss_rate)
        << '\n';
}

}  // namespace gist

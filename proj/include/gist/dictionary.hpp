#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gist/linalg.hpp"
#include "gist/types.hpp"

namespace gist {

template <typename Scalar>
struct TimeSeries {
  Vec<Scalar> times;
  Vec<Scalar> values;

  void validate() const {
    if (times.size() != values.size()) throw DimensionError("TimeSeries: length mismatch");
    if (times.size() < 2) throw InsufficientDataError("TimeSeries: need at least 2 samples");
    if (!times.allFinite() || !values.allFinite())
      throw DimensionError("TimeSeries: non-finite entries");
    for (Index n = 1; n < times.size(); ++n)
      if (!(times(n) > times(n - 1)))
        throw DimensionError("TimeSeries: times must be strictly increasing");
  }
};

/// Evenly spaced frequencies f_k = f_max * k / D, k = 1..D.
template <typename Scalar>
struct FrequencyGrid {
  Scalar f_max = 0;
  Index D = 0;

  FrequencyGrid() = default;
  FrequencyGrid(Scalar fmax, Index d) : f_max(fmax), D(d) {
    if (!(f_max > Scalar(0)) || D < 1) throw DimensionError("FrequencyGrid: invalid parameters");
  }
  static FrequencyGrid from_resolution(Scalar fmax, Scalar resolution) {
    if (!(resolution > Scalar(0))) throw DimensionError("FrequencyGrid: resolution must be positive");
    const Index d = static_cast<Index>(std::llround(static_cast<double>(fmax / resolution)));
    return FrequencyGrid(fmax, d);
  }

  Scalar resolution() const { return f_max / Scalar(D); }
  Scalar frequency(Index k) const { return f_max * Scalar(k + 1) / Scalar(D); }  // k = 0..D-1
  std::vector<Scalar> frequencies() const {
    std::vector<Scalar> f(static_cast<std::size_t>(D));
    for (Index k = 0; k < D; ++k) f[static_cast<std::size_t>(k)] = frequency(k);
    return f;
  }
};

/// Standardized sine/cosine design. Column k holds the cosine atom of
/// frequencies[k] and column k+D the sine atom, each centered and rescaled to
/// 2-norm sqrt(N). Columns whose centered norm is below 1e-10*sqrt(N) are
/// degenerate (e.g. a sine atom that vanishes on integer times); they are
/// kept as all-zero columns and listed in `dropped` so coefficients stay
/// pinned to zero downstream.
template <typename Scalar>
struct Dictionary {
  FrequencyGrid<Scalar> grid;           // construction grid
  std::vector<Scalar> frequencies;      // per group, size D
  std::vector<Index> grid_index;        // original grid position per group
  Vec<Scalar> times;
  Mat<Scalar> X;                        // N x 2D
  Vec<Scalar> y_centered;
  Scalar y_mean = 0;
  Vec<Scalar> column_means;             // size 2D (raw atom means)
  Vec<Scalar> column_scales;            // size 2D (0 for dropped columns)
  std::vector<Index> dropped;           // column indices with degenerate atoms
  Scalar tau0 = 0;

  Index num_samples() const { return X.rows(); }
  Index num_groups() const { return static_cast<Index>(frequencies.size()); }
  Index num_columns() const { return X.cols(); }

  bool is_dropped(Index col) const {
    return std::binary_search(dropped.begin(), dropped.end(), col);
  }

  /// Column indices {f, f+D} of a group, excluding dropped ones.
  std::vector<Index> group_columns(Index group) const {
    std::vector<Index> cols;
    if (!is_dropped(group)) cols.push_back(group);
    if (!is_dropped(group + num_groups())) cols.push_back(group + num_groups());
    return cols;
  }

  /// Dense copy of the retained columns of the given groups, for restricted
  /// least-squares / ridge solves.
  Mat<Scalar> columns_of(const std::vector<Index>& groups) const {
    std::vector<Index> cols;
    for (Index g : groups)
      for (Index c : group_columns(g)) cols.push_back(c);
    Mat<Scalar> sub(X.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Index>(j)) = X.col(cols[j]);
    return sub;
  }

  /// Scatter a restricted coefficient vector (ordered as columns_of) back
  /// into full 2D coordinates.
  Vec<Scalar> expand_restricted(const std::vector<Index>& groups, const Vec<Scalar>& b) const {
    Vec<Scalar> full = Vec<Scalar>::Zero(num_columns());
    Index pos = 0;
    for (Index g : groups)
      for (Index c : group_columns(g)) full(c) = b(pos++);
    return full;
  }

  /// Sub-dictionary on a subset of groups (screening output). Standardization
  /// metadata is inherited; tau0 is recomputed for the restricted design.
  Dictionary restrict(const std::vector<Index>& groups) const {
    Dictionary sub;
    sub.grid = grid;
    sub.times = times;
    sub.y_centered = y_centered;
    sub.y_mean = y_mean;
    const Index d_new = static_cast<Index>(groups.size());
    if (d_new == 0) throw DimensionError("Dictionary::restrict: empty group set");
    sub.frequencies.reserve(groups.size());
    sub.grid_index.reserve(groups.size());
    sub.X.resize(X.rows(), 2 * d_new);
    sub.column_means.resize(2 * d_new);
    sub.column_scales.resize(2 * d_new);
    const Index d_old = num_groups();
    for (Index j = 0; j < d_new; ++j) {
      const Index g = groups[static_cast<std::size_t>(j)];
      sub.frequencies.push_back(frequencies[static_cast<std::size_t>(g)]);
      sub.grid_index.push_back(grid_index[static_cast<std::size_t>(g)]);
      sub.X.col(j) = X.col(g);
      sub.X.col(j + d_new) = X.col(g + d_old);
      sub.column_means(j) = column_means(g);
      sub.column_means(j + d_new) = column_means(g + d_old);
      sub.column_scales(j) = column_scales(g);
      sub.column_scales(j + d_new) = column_scales(g + d_old);
      if (is_dropped(g)) sub.dropped.push_back(j);
      if (is_dropped(g + d_old)) sub.dropped.push_back(j + d_new);
    }
    std::sort(sub.dropped.begin(), sub.dropped.end());
    sub.tau0 = spectral_norm<Scalar>(sub.X).value * (Scalar(1) + Scalar(1e-3));
    return sub;
  }
};

namespace detail {

template <typename Scalar>
Mat<Scalar> raw_atoms(const Vec<Scalar>& times, const std::vector<Scalar>& freqs) {
  const Index N = times.size();
  const Index D = static_cast<Index>(freqs.size());
  Mat<Scalar> X(N, 2 * D);
  for (Index k = 0; k < D; ++k) {
    const Scalar w = Scalar(2) * std::numbers::pi_v<Scalar> * freqs[static_cast<std::size_t>(k)];
    for (Index n = 0; n < N; ++n) {
      X(n, k) = std::cos(w * times(n));
      X(n, k + D) = std::sin(w * times(n));
    }
  }
  return X;
}

}  // namespace detail

template <typename Scalar>
Dictionary<Scalar> build_dictionary(const TimeSeries<Scalar>& ts, const FrequencyGrid<Scalar>& grid) {
  ts.validate();
  const Index N = ts.times.size();
  if (N < 3) throw InsufficientDataError("build_dictionary: need at least 3 samples");

  Dictionary<Scalar> dict;
  dict.grid = grid;
  dict.times = ts.times;
  dict.frequencies = grid.frequencies();
  dict.grid_index.resize(dict.frequencies.size());
  for (std::size_t k = 0; k < dict.grid_index.size(); ++k)
    dict.grid_index[k] = static_cast<Index>(k);

  dict.y_mean = ts.values.mean();
  dict.y_centered = ts.values.array() - dict.y_mean;

  dict.X = detail::raw_atoms(ts.times, dict.frequencies);
  const Index cols = dict.X.cols();
  dict.column_means.resize(cols);
  dict.column_scales.resize(cols);
  const Scalar sqrt_n = std::sqrt(Scalar(N));
  const Scalar degenerate = Scalar(1e-10) * sqrt_n;
  for (Index j = 0; j < cols; ++j) {
    const Scalar mean = dict.X.col(j).mean();
    dict.column_means(j) = mean;
    dict.X.col(j).array() -= mean;
    const Scalar norm = dict.X.col(j).norm();
    if (norm < degenerate) {
      dict.X.col(j).setZero();
      dict.column_scales(j) = Scalar(0);
      dict.dropped.push_back(j);
    } else {
      const Scalar scale = norm / sqrt_n;  // raw centered column = scale * standardized column
      dict.X.col(j) /= scale;
      dict.column_scales(j) = scale;
    }
  }
  if (static_cast<Index>(dict.dropped.size()) == cols)
    throw DimensionError("build_dictionary: all dictionary columns are degenerate");

  dict.tau0 = spectral_norm<Scalar>(dict.X).value * (Scalar(1) + Scalar(1e-3));
  return dict;
}

/// Out-of-sample prediction: atoms rebuilt at `times`, passed through the
/// training standardization, then y_mean + X_new * beta. At the training
/// times this reproduces y_mean + dict.X * beta.
template <typename Scalar>
Vec<Scalar> predict(const Dictionary<Scalar>& dict, const Vec<Scalar>& beta, const Vec<Scalar>& times) {
  if (beta.size() != dict.num_columns()) throw DimensionError("predict: beta dimension mismatch");
  Mat<Scalar> atoms = detail::raw_atoms(times, dict.frequencies);
  for (Index j = 0; j < dict.num_columns(); ++j) {
    if (dict.column_scales(j) == Scalar(0)) {
      atoms.col(j).setZero();
      continue;
    }
    atoms.col(j).array() -= dict.column_means(j);
    atoms.col(j) /= dict.column_scales(j);
  }
  Vec<Scalar> out = Vec<Scalar>::Constant(times.size(), dict.y_mean);
  out.noalias() += atoms * beta;
  return out;
}

}  // namespace gist

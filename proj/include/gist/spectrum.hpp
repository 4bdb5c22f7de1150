#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gist/dictionary.hpp"
#include "gist/fitter.hpp"
#include "gist/types.hpp"

namespace gist {

template <typename Scalar>
struct SpectrumComponent {
  Scalar frequency = 0;   // Hz
  Scalar amplitude = 0;   // > 0
  Scalar phase = 0;       // radians in (-pi, pi]
};

template <typename Scalar>
struct SpectrumEstimate {
  std::vector<SpectrumComponent<Scalar>> entries;  // strictly increasing frequencies
  Scalar intercept = 0;
  Scalar noise_variance_estimate = 0;
};

/// Amplitude/phase of a raw cosine/sine coefficient pair, using the
/// parameterization a = A cos(phi), b = -A sin(phi).
template <typename Scalar>
SpectrumComponent<Scalar> amplitude_phase(Scalar freq, Scalar a, Scalar b) {
  SpectrumComponent<Scalar> c;
  c.frequency = freq;
  c.amplitude = std::hypot(a, b);
  c.phase = std::atan2(-b, a);
  if (c.phase <= -std::numbers::pi_v<Scalar>) c.phase = std::numbers::pi_v<Scalar>;
  return c;
}

/// Maps standardized coefficients back to raw-atom amplitudes and phases.
/// The intercept aggregates the centered-response mean and the column
/// centering offsets. The noise variance RSS/(N - df) is a convenience
/// diagnostic, not part of the estimation procedure.
template <typename Scalar>
SpectrumEstimate<Scalar> recover_spectrum(const Dictionary<Scalar>& dict,
                                          const FitResult<Scalar>& fit, Scalar df = Scalar(-1)) {
  const Vec<Scalar>& beta = fit.beta.values;
  if (beta.size() != dict.num_columns()) throw DimensionError("recover_spectrum: dimension mismatch");
  const Index D = dict.num_groups();

  SpectrumEstimate<Scalar> spec;
  Scalar intercept = dict.y_mean;
  Index nonzero_coefs = 0;
  for (Index k = 0; k < D; ++k) {
    Scalar raw[2] = {Scalar(0), Scalar(0)};
    for (int s = 0; s < 2; ++s) {
      const Index col = k + s * D;
      if (beta(col) == Scalar(0) || dict.column_scales(col) == Scalar(0)) continue;
      raw[s] = beta(col) / dict.column_scales(col);
      intercept -= raw[s] * dict.column_means(col);
      ++nonzero_coefs;
    }
    const Scalar amp = std::hypot(raw[0], raw[1]);
    if (amp > Scalar(1e-12))
      spec.entries.push_back(amplitude_phase(dict.frequencies[static_cast<std::size_t>(k)], raw[0], raw[1]));
  }
  std::sort(spec.entries.begin(), spec.entries.end(),
            [](const auto& a, const auto& b) { return a.frequency < b.frequency; });
  spec.intercept = intercept;

  const Scalar rss = (dict.y_centered - dict.X * beta).squaredNorm();
  const Scalar dof = df >= Scalar(0) ? df : Scalar(nonzero_coefs);
  const Scalar denom = Scalar(dict.num_samples()) - dof;
  spec.noise_variance_estimate = denom > Scalar(0) ? rss / denom : Scalar(0);
  return spec;
}

/// Synthesizes intercept + sum_k A_k cos(2 pi f_k t + phi_k) at the given times.
template <typename Scalar>
Vec<Scalar> reconstruct(const SpectrumEstimate<Scalar>& spec, const Vec<Scalar>& times) {
  Vec<Scalar> out = Vec<Scalar>::Constant(times.size(), spec.intercept);
  for (const auto& c : spec.entries) {
    const Scalar w = Scalar(2) * std::numbers::pi_v<Scalar> * c.frequency;
    for (Index n = 0; n < times.size(); ++n) out(n) += c.amplitude * std::cos(w * times(n) + c.phase);
  }
  return out;
}

}  // namespace gist

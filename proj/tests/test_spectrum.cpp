#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gist/linalg.hpp"
#include "gist/spectrum.hpp"
#include "test_support.hpp"

using namespace gist;

TEST_CASE("amplitude and phase of a raw coefficient pair") {
  const auto c = amplitude_phase(0.1, 3.0, 4.0);
  CHECK(c.amplitude == doctest::Approx(5.0));
  CHECK(c.phase == doctest::Approx(std::atan2(-4.0, 3.0)));

  const auto pure = amplitude_phase(0.1, 2.5, 0.0);
  CHECK(pure.amplitude == doctest::Approx(2.5));
  CHECK(pure.phase == doctest::Approx(0.0));
}

TEST_CASE("sign flip keeps the amplitude and shifts the phase by pi") {
  const auto a = amplitude_phase(0.2, 1.2, -0.7);
  const auto b = amplitude_phase(0.2, -1.2, 0.7);
  CHECK(a.amplitude == doctest::Approx(b.amplitude));
  const double diff = std::remainder(a.phase - b.phase, 2.0 * std::numbers::pi);
  CHECK(std::abs(std::abs(diff) - std::numbers::pi) < 1e-12);
  CHECK(a.phase > -std::numbers::pi);
  CHECK(a.phase <= std::numbers::pi);
}

TEST_CASE("noiseless sinusoid: recovered amplitude and phase are exact") {
  const double amp = 4.0, phase = std::numbers::pi / 6, f = 0.25;
  TimeSeries<double> ts;
  ts.times = testsup::random_times(30, 401);
  ts.values.resize(30);
  for (Index n = 0; n < 30; ++n)
    ts.values(n) = amp * std::cos(2.0 * std::numbers::pi * f * ts.times(n) + phase);
  const auto dict = build_dictionary(ts, FrequencyGrid<double>(0.25, 1));

  FitResult<double> fit;
  fit.beta = CoefficientVector<double>{ridge_solve(Mat<double>(dict.X), dict.y_centered, 0.0), 1,
                                       dict.dropped};
  const auto spec = recover_spectrum(dict, fit);
  REQUIRE(spec.entries.size() == 1);
  CHECK(spec.entries[0].frequency == doctest::Approx(0.25));
  CHECK(spec.entries[0].amplitude == doctest::Approx(amp).epsilon(1e-6));
  CHECK(spec.entries[0].phase == doctest::Approx(phase).epsilon(1e-6));
  CHECK(std::abs(spec.intercept) < 1e-8);
  CHECK(spec.noise_variance_estimate < 1e-12);
}

TEST_CASE("recover + reconstruct equals predict for random sparse coefficients") {
  const auto dict = testsup::random_dictionary(25, 8, 402);
  for (unsigned seed : {403u, 404u, 405u}) {
    Vec<double> beta = Vec<double>::Zero(dict.num_columns());
    const Vec<double> vals = testsup::random_vector(6, seed);
    beta(1) = vals(0);
    beta(1 + 8) = vals(1);
    beta(4) = vals(2);
    beta(4 + 8) = vals(3);
    beta(7) = vals(4);
    beta(7 + 8) = vals(5);

    FitResult<double> fit;
    fit.beta = CoefficientVector<double>{beta, 8, dict.dropped};
    const auto spec = recover_spectrum(dict, fit);
    const Vec<double> via_spec = reconstruct(spec, dict.times);
    const Vec<double> via_predict = predict(dict, beta, dict.times);
    CHECK((via_spec - via_predict).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("empty spectrum reconstructs to the constant intercept") {
  SpectrumEstimate<double> spec;
  spec.intercept = 2.5;
  Vec<double> t(3);
  t << 0.0, 1.0, 2.0;
  const Vec<double> out = reconstruct(spec, t);
  CHECK((out.array() - 2.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("reconstruction superposes linearly") {
  SpectrumEstimate<double> s1, s2, merged;
  s1.intercept = 1.0;
  s1.entries.push_back({0.1, 2.0, 0.3});
  s2.intercept = 1.0;
  s2.entries.push_back({0.2, 1.5, -0.8});
  merged.intercept = 1.0;
  merged.entries = s1.entries;
  merged.entries.push_back(s2.entries[0]);

  const Vec<double> t = testsup::random_times(10, 406);
  const Vec<double> lhs = reconstruct(merged, t);
  const Vec<double> rhs = reconstruct(s1, t) + reconstruct(s2, t) -
                          Vec<double>::Constant(10, 1.0);
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("frequencies are emitted in increasing order with positive amplitudes") {
  const auto dict = testsup::random_dictionary(20, 6, 407);
  Vec<double> beta = testsup::random_vector(dict.num_columns(), 408);
  FitResult<double> fit;
  fit.beta = CoefficientVector<double>{beta, 6, dict.dropped};
  const auto spec = recover_spectrum(dict, fit);
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    CHECK(spec.entries[i].amplitude > 0.0);
    if (i > 0) CHECK(spec.entries[i].frequency > spec.entries[i - 1].frequency);
  }
}

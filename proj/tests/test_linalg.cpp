#include <doctest.h>

#include "gist/linalg.hpp"
#include "test_support.hpp"

using namespace gist;

TEST_CASE("spectral norm of simple matrices") {
  Mat<double> I = Mat<double>::Identity(2, 2);
  CHECK(spectral_norm(I).value == doctest::Approx(1.0).epsilon(1e-12));

  Mat<double> D = Mat<double>::Zero(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = 1.0;
  CHECK(spectral_norm(D).value == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("spectral norm matches the Jacobi eigensolver oracle") {
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    const Mat<double> A = testsup::random_matrix(6, 10, seed);
    const auto est = spectral_norm(A, 1e-12, 20000);
    CHECK(est.converged);
    const double oracle = testsup::spectral_norm_oracle(A);
    CHECK(est.value == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("spectral norm Rayleigh and Frobenius bounds") {
  for (unsigned seed : {11u, 12u, 13u}) {
    const Mat<double> A = testsup::random_matrix(8, 5, seed);
    const double est = spectral_norm(A).value;
    CHECK(est <= A.norm() + 1e-12);
    for (unsigned vs : {21u, 22u, 23u, 24u}) {
      Vec<double> v = testsup::random_vector(5, vs);
      v /= v.norm();
      CHECK(est >= (A * v).norm() - 1e-9);
    }
    for (Index j = 0; j < A.cols(); ++j) CHECK(est >= A.col(j).norm() - 1e-12);
  }
}

TEST_CASE("spectral norm rejects empty input") {
  CHECK_THROWS_AS(spectral_norm(Mat<double>(0, 0)), DimensionError);
}

TEST_CASE("ridge solve on the identity design") {
  Mat<double> I = Mat<double>::Identity(2, 2);
  Vec<double> y(2);
  y << 1.0, 2.0;
  Vec<double> b0 = ridge_solve(I, y, 0.0);
  CHECK(b0(0) == doctest::Approx(1.0));
  CHECK(b0(1) == doctest::Approx(2.0));
  Vec<double> b1 = ridge_solve(I, y, 1.0);
  CHECK(b1(0) == doctest::Approx(0.5));
  CHECK(b1(1) == doctest::Approx(1.0));
}

TEST_CASE("ridge solve satisfies the normal equations") {
  for (unsigned seed : {31u, 32u, 33u}) {
    const Mat<double> X = testsup::random_matrix(20, 3, seed);
    const Vec<double> y = testsup::random_vector(20, seed + 100);
    for (double eta : {0.0, 0.5}) {
      const Vec<double> b = ridge_solve(X, y, eta);
      const Vec<double> res = (X.transpose() * X + eta * Mat<double>::Identity(3, 3)) * b - X.transpose() * y;
      CHECK(res.norm() < 1e-10);
      // stationarity of the objective
      const Vec<double> grad = X.transpose() * (X * b - y) + eta * b;
      CHECK(grad.norm() < 1e-8 * (1.0 + y.norm()));
    }
  }
}

TEST_CASE("ridge solve fails loudly on singular systems") {
  Mat<double> X(4, 2);
  X.col(0) = testsup::random_vector(4, 41);
  X.col(1) = X.col(0);  // exact collinearity
  const Vec<double> y = testsup::random_vector(4, 42);
  CHECK_THROWS_AS(ridge_solve(X, y, 0.0), SingularSystemError);
  CHECK_NOTHROW(ridge_solve(X, y, 1e-3));
  // underdetermined with eta = 0
  const Mat<double> W = testsup::random_matrix(3, 5, 43);
  CHECK_THROWS_AS(ridge_solve(W, testsup::random_vector(3, 44), 0.0), SingularSystemError);
}

TEST_CASE("ridge degrees of freedom on orthonormal-scaled columns") {
  // X with X'X = I
  Mat<double> X = Mat<double>::Zero(6, 4);
  for (Index j = 0; j < 4; ++j) X(j, j) = 1.0;
  CHECK(ridge_df(X, 0.0) == doctest::Approx(4.0));
  CHECK(ridge_df(X, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("ridge degrees of freedom matches the eigendecomposition oracle") {
  const Mat<double> X = testsup::random_matrix(20, 3, 51);
  const double eta = 0.01;
  const auto ev = testsup::jacobi_eigenvalues(X.transpose() * X);
  double expect = 0;
  for (double d : ev) expect += d / (d + eta);
  CHECK(ridge_df(X, eta) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("ridge degrees of freedom is monotone in eta and bounded") {
  const Mat<double> X = testsup::random_matrix(15, 4, 61);
  double prev = ridge_df(X, 0.0);
  CHECK(prev <= 4.0 + 1e-12);
  for (double eta : {0.01, 0.1, 1.0, 10.0}) {
    const double cur = ridge_df(X, eta);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

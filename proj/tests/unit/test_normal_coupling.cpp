#include "ccsim/coupling.hpp"
#include "ccsim/normal.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace ccsim;
using ccsim::testing::ks_critical_1pct;
using ccsim::testing::ks_statistic;

TEST_CASE("normal cdf, quantile and interval") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(0.545) == doctest::Approx(1.0 - 0.2928768).epsilon(1e-6));
  CHECK(normal_interval(-0.05, 0.05, 0.0, 1.0) == doctest::Approx(0.0398776).epsilon(1e-6));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (double p : {1e-12, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-9}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  // Far tail keeps relative precision.
  CHECK(normal_interval(10.0, 11.0, 0.0, 1.0) > 0.0);
  CHECK(normal_interval(10.0, 11.0, 0.0, 1.0) == doctest::Approx(7.619661958203076e-24).epsilon(1e-8));
}

TEST_CASE("delta from gamma norm") {
  CHECK(delta_from_gamma_norm(0.0) == 0.0);
  CHECK(delta_from_gamma_norm(1.0) == doctest::Approx(1.0 - 0.6170751).epsilon(1e-6));
  CHECK(delta_from_gamma_norm(-1.0) == delta_from_gamma_norm(1.0));
  CHECK(delta_from_gamma(Eigen::Vector2d(0.6, 0.8)) == doctest::Approx(delta_from_gamma_norm(1.0)));
  double prev = 0.0;
  for (double g = 0.1; g < 10.0; g += 0.1) {
    const double d = delta_from_gamma_norm(g);
    CHECK(d > prev);
    CHECK(d < 1.0);
    prev = d;
  }
}

TEST_CASE("radius from delta reference values") {
  CHECK(radius_from_delta(0.0) == 0.0);
  CHECK(radius_from_delta(0.012) == doctest::Approx(0.030081).epsilon(2e-5));
  CHECK(radius_from_delta(0.018) == doctest::Approx(0.045123).epsilon(2e-5));
  CHECK(radius_from_delta(0.016) == doctest::Approx(0.040109).epsilon(2e-5));
  CHECK(radius_from_delta(0.051) == doctest::Approx(0.127925).epsilon(2e-5));
}

TEST_CASE("radius and delta are inverse") {
  for (double g : {1e-8, 1e-4, 0.01, 0.3, 1.0, 2.5, 6.0}) {
    CHECK(radius_from_delta(delta_from_gamma_norm(g)) == doctest::Approx(g).epsilon(1e-10));
  }
  for (double d : {1e-9, 1e-3, 0.1, 0.5, 0.9, 0.999}) {
    CHECK(delta_from_gamma_norm(radius_from_delta(d)) == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("radius from delta rejects out-of-range input") {
  CHECK_THROWS_AS(radius_from_delta(1.0), std::domain_error);
  CHECK_THROWS_AS(radius_from_delta(-0.1), std::domain_error);
  CHECK_THROWS_AS(radius_from_delta(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(CouplingSpec::from_delta(0.1, 0), std::invalid_argument);
  const auto spec = CouplingSpec::from_delta(0.012, 1);
  CHECK(spec.radius == doctest::Approx(0.030081).epsilon(2e-5));
}

TEST_CASE("coupling with zero gamma is the identity coupling") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto c = sample_maximal_coupling(Eigen::VectorXd::Zero(3), rng);
    CHECK(c.hit);
    CHECK(c.w == c.w_hat);
  }
}

TEST_CASE("coupling hit frequency and marginals") {
  const int n = 40000;
  for (double g : {0.3, 1.0, 2.0}) {
    CAPTURE(g);
    Rng rng(42);
    const Eigen::Vector2d gamma = g * Eigen::Vector2d(0.6, -0.8);
    long hits = 0;
    std::vector<double> w0, w1, wh0, wh1;
    for (int i = 0; i < n; ++i) {
      const auto c = sample_maximal_coupling(gamma, rng);
      if (c.hit) {
        ++hits;
        CHECK((c.w - c.w_hat - gamma).norm() < 1e-12);
      } else {
        CHECK(gamma.dot(c.w) < 0.5 * g * g);
      }
      w0.push_back(c.w[0]);
      w1.push_back(c.w[1]);
      wh0.push_back(c.w_hat[0]);
      wh1.push_back(c.w_hat[1]);
    }
    const double p = 1.0 - delta_from_gamma_norm(g);
    const double sd = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - p) < 4.0 * sd);
    auto Phi = [](double x) { return normal_cdf(x); };
    for (const auto* xs : {&w0, &w1, &wh0, &wh1}) CHECK(ks_statistic(*xs, Phi) < ks_critical_1pct(n));
  }
}

TEST_CASE("coupling residual for tiny gamma stays in its half-space") {
  Rng rng(7);
  const Eigen::VectorXd gamma = Eigen::VectorXd::Constant(1, 1e-5);
  int misses = 0;
  for (int i = 0; i < 200000; ++i) {
    const auto c = sample_maximal_coupling(gamma, rng);
    if (!c.hit) {
      ++misses;
      CHECK(c.w[0] < 0.5e-5);
      CHECK(std::abs(c.w[0]) < 1e-3);
    }
  }
  CHECK(misses < 20);
}

TEST_CASE("standard normal vector moments") {
  Rng rng(3);
  const int n = 50000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd v = standard_normal_vector(3, rng);
    mean += v;
    second += v * v.transpose();
  }
  mean /= n;
  second /= n;
  CHECK(mean.cwiseAbs().maxCoeff() < 0.03);
  CHECK((second - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 0.04);
}

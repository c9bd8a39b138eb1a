#pragma once

#include "ccsim/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace ccsim::testing {

inline LtiModel scalar_model(double a, double b, double bw, double lo, double hi) {
  LtiModel m;
  m.A = Eigen::MatrixXd::Constant(1, 1, a);
  m.B = Eigen::MatrixXd::Constant(1, 1, b);
  m.Bw = Eigen::MatrixXd::Constant(1, 1, bw);
  m.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  m.state_box = Box{Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
  m.input_box = Box{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  return m;
}

inline LtiModel parking_1d() { return scalar_model(0.9, 0.5, 1.0, -10.0, 10.0); }

inline LtiModel parking_2d() {
  LtiModel m;
  m.A = 0.9 * Eigen::MatrixXd::Identity(2, 2);
  m.B = 0.7 * Eigen::MatrixXd::Identity(2, 2);
  m.Bw = Eigen::MatrixXd::Identity(2, 2);
  m.C = Eigen::MatrixXd::Identity(2, 2);
  m.state_box = Box{Eigen::Vector2d(-2.0, -8.0), Eigen::Vector2d(10.0, 5.0)};
  m.input_box = Box{Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d(1.0, 1.0)};
  return m;
}

inline std::vector<Eigen::VectorXd> scalar_inputs(int count, double lo = -1.0, double hi = 1.0) {
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < count; ++k)
    out.push_back(Eigen::VectorXd::Constant(1, count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (count - 1)));
  return out;
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace ccsim::testing

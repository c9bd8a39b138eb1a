#pragma once

#include <Eigen/Dense>
#include <random>

namespace ccsim {

using Rng = std::mt19937_64;

/// Coupling compensator parameters: the miss probability `delta` and the
/// radius of the ball of admissible compensator values it buys.
struct CouplingSpec {
  double delta = 0.0;
  double radius = 0.0;
  int noise_dim = 1;

  static CouplingSpec from_delta(double delta, int noise_dim);
};

/// Miss probability 1 - 2 Phi(-|gamma|/2) of the maximal coupling between
/// N(0, I) and N(gamma, I).
double delta_from_gamma_norm(double gamma_norm);
double delta_from_gamma(const Eigen::VectorXd& gamma);

/// Largest compensator norm whose maximal coupling misses with probability
/// at most `delta`. Throws std::domain_error for delta outside [0, 1).
double radius_from_delta(double delta);

struct CoupledNoise {
  Eigen::VectorXd w_hat;  // abstract-side disturbance, N(0, I)
  Eigen::VectorXd w;      // concrete-side disturbance, N(0, I)
  bool hit = false;       // w - w_hat == gamma
};

/// Draws (w_hat, w) from the maximal coupling that puts probability
/// 2 Phi(-|gamma|/2) on the event w - w_hat = gamma.
CoupledNoise sample_maximal_coupling(const Eigen::VectorXd& gamma, Rng& rng);

Eigen::VectorXd standard_normal_vector(int dim, Rng& rng);

}  // namespace ccsim

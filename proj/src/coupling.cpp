#include "ccsim/coupling.hpp"

#include "ccsim/normal.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace ccsim {

namespace {

constexpr int kMaxRejections = 1'000'000;

// Below this residual mass the rejection sampler would need more than ~1e3
// proposals on average; the residual is then drawn by CDF inversion instead.
constexpr double kInversionThreshold = 1e-3;

// Phi(s) - Phi(s - g), the unnormalised CDF of the one-dimensional residual
// density (phi(v) - phi(v - g))_+ on v < g/2.
double residual_cdf(double s, double g) {
  if (g < 1e-3) {
    const double m = s - 0.5 * g;
    return g * normal_pdf(m) * (1.0 + g * g * (m * m - 1.0) / 24.0);
  }
  return normal_interval(s - g, s, 0.0, 1.0);
}

double sample_residual_by_inversion(double g, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double target = unif(rng) * residual_cdf(0.5 * g, g);
  double lo = -40.0;
  double hi = 0.5 * g;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual_cdf(mid, g) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CouplingSpec CouplingSpec::from_delta(double delta, int noise_dim) {
  if (noise_dim < 1) throw std::invalid_argument("CouplingSpec: noise_dim must be positive");
  return CouplingSpec{delta, radius_from_delta(delta), noise_dim};
}

double delta_from_gamma_norm(double gamma_norm) {
  // 1 - 2 Phi(-g/2) == erf(g / (2 sqrt 2)); the erf form keeps precision for small g.
  return std::erf(std::abs(gamma_norm) / (2.0 * std::sqrt(2.0)));
}

double delta_from_gamma(const Eigen::VectorXd& gamma) { return delta_from_gamma_norm(gamma.norm()); }

double radius_from_delta(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw std::domain_error("radius_from_delta: delta must lie in [0, 1)");
  return 2.0 * std::sqrt(2.0) * erf_inverse(delta);
}

Eigen::VectorXd standard_normal_vector(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

CoupledNoise sample_maximal_coupling(const Eigen::VectorXd& gamma, Rng& rng) {
  const int d = static_cast<int>(gamma.size());
  const double g = gamma.norm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // w_gamma ~ N(gamma, I); the abstract disturbance is w_gamma - gamma.
  const Eigen::VectorXd w_gamma = gamma + standard_normal_vector(d, rng);
  if (g == 0.0) return {w_gamma, w_gamma, true};

  // log(rho / rho_hat) at w_gamma. H = {gamma'w - |gamma|^2/2 = 0} separates
  // rho <= rho_hat (log ratio <= 0) from rho > rho_hat.
  const double log_ratio = 0.5 * g * g - gamma.dot(w_gamma);
  const double accept = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  if (unif(rng) < accept) return {w_gamma - gamma, w_gamma, true};

  // Residual (rho - min(rho, rho_hat)) / (1 - Delta). It is supported on
  // gamma'w < |gamma|^2/2 and differs from rho only along u = gamma/|gamma|,
  // so the orthogonal part of w is an ordinary standard normal draw.
  const Eigen::VectorXd u = gamma / g;
  Eigen::VectorXd w = standard_normal_vector(d, rng);
  w -= u * u.dot(w);
  double s = 0.0;
  const double residual_mass = delta_from_gamma_norm(g);
  if (residual_mass < kInversionThreshold) {
    s = sample_residual_by_inversion(g, rng);
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    int it = 0;
    for (;; ++it) {
      if (it >= kMaxRejections) throw std::runtime_error("sample_maximal_coupling: residual rejection loop did not terminate");
      s = normal(rng);
      // Accept with (rho - rho_min) / rho = 1 - min(1, rho_hat / rho).
      const double log_hat_over_rho = g * s - 0.5 * g * g;
      if (log_hat_over_rho >= 0.0) continue;
      if (unif(rng) < 1.0 - std::exp(log_hat_over_rho)) break;
    }
  }
  assert(s < 0.5 * g);
  w += s * u;
  return {w_gamma - gamma, w, false};
}

}  // namespace ccsim

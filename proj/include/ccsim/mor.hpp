#pragma once

#include "ccsim/models.hpp"
#include "ccsim/simrel.hpp"

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace ccsim {

/// Reduced-order model x_r+ = Ar x_r + Br u_r + Brw w_r, y_r = Cr x_r, lifted
/// by x = P x_r and refined through u = R u_r + Q x_r + K (x - P x_r).
struct ReducedModel {
  Eigen::MatrixXd Ar;
  Eigen::MatrixXd Br;
  Eigen::MatrixXd Brw;
  Eigen::MatrixXd Cr;
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Box input_box;  // reduced input set U_r

  int reduced_dim() const { return static_cast<int>(Ar.rows()); }
  /// The reduced model as an LtiModel over the given state box.
  LtiModel as_model(const Box& state_box) const;
};

inline constexpr double kSylvesterTolerance = 1e-8;

/// Solves B Q = P Ar - A P in the least-squares sense and sets Cr = C P.
/// Throws ConfigError if the residual exceeds kSylvesterTolerance or P is
/// rank deficient.
ReducedModel build_reduced(const LtiModel& model, const Eigen::MatrixXd& P, const Eigen::MatrixXd& Ar,
                           const Eigen::MatrixXd& Br, const Eigen::MatrixXd& Brw, const Eigen::MatrixXd& R,
                           std::optional<Box> reduced_input_box = std::nullopt);

/// Error dynamics x+ = (A + B K) x + Bbar u_r + Bw gamma_r + Bwbar w_r with the
/// disturbance z = Bbar u_r + Bwbar w_r confined to a box-generated polytope.
struct MorErrorSystem {
  Eigen::MatrixXd B_bar;
  Eigen::MatrixXd Bw_bar;
  Eigen::VectorXd w_halfwidth;  // empty when Bw_bar == 0 (no truncation)
  double delta_trunc = 0.0;
  std::vector<Eigen::VectorXd> z_vertices;
};

/// 1 - (2 Phi(a) - 1)^d: mass of N(0, I_d) outside the cube [-a, a]^d.
double truncation_delta(double halfwidth, int dim);
/// Inverse of truncation_delta in the half-width.
double truncation_halfwidth(double delta_trunc, int dim);

MorErrorSystem mor_error_system(const LtiModel& model, const ReducedModel& reduced, double delta_trunc);

struct MorOptions {
  double trunc_split = 0.5;      // share of the delta budget spent on truncation
  double feedback_bound = -1.0;  // bound on |K x_delta|; negative -> smallest input half-width
  EpsilonSearchOptions search;
};

/// Minimal epsilon_r for a total delta budget, returning a relation of kind
/// model_order_reduction over {(x_r, x) : |x - P x_r|_D <= epsilon_r}.
SimRelation optimize_epsilon_mor(const LtiModel& model, const ReducedModel& reduced, double delta_budget,
                                 const MorOptions& options = {});

VerificationReport verify_mor_relation(const LtiModel& model, const ReducedModel& reduced, const SimRelation& rel,
                                       double tolerance = 1e-8);

/// Transitivity: (eps_abs + eps_r, min(1, delta_abs + delta_r)). The first
/// relation must be a finite abstraction, the second a reduction.
std::pair<double, double> compose_transitive(const SimRelation& abstraction, const SimRelation& reduction);

}  // namespace ccsim

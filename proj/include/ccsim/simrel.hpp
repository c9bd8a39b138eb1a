#pragma once

#include "ccsim/models.hpp"
#include "ccsim/sdp.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace ccsim {

enum class RelationKind { finite_abstraction, model_order_reduction };

const char* to_string(RelationKind kind);
RelationKind relation_kind_from_string(const std::string& s);

/// (epsilon, delta) simulation relation certified by the ellipsoid
/// {x_delta : x_delta' D x_delta <= epsilon^2} and compensator gamma = F x_delta.
struct SimRelation {
  double epsilon = 0.0;
  double delta = 0.0;
  Eigen::MatrixXd D;
  Eigen::MatrixXd F;
  double lambda = 0.5;
  RelationKind kind = RelationKind::finite_abstraction;
  /// Compensator radius r; |F x_delta| <= r on the ellipsoid.
  double radius = 0.0;

  // Model-order-reduction extras (empty / zero for finite abstractions).
  Eigen::MatrixXd K;            // interface feedback u = R u_r + Q x_r + K x_delta
  double feedback_bound = 0.0;  // |K x_delta| <= feedback_bound on the ellipsoid
  double coupling_delta = 0.0;  // miss probability of the coupling alone
  double delta_trunc = 0.0;     // probability of w_r leaving the truncation box
  Eigen::VectorXd w_halfwidth;  // truncation box half-widths
};

/// Bounds added to keep the barrier problem bounded; they cap epsilon below
/// at 1/sqrt(kMaxMu) and exclude near-singular ellipsoids.
inline constexpr double kMinDInvEigenvalue = 1e-9;
inline constexpr double kMaxDInvEigenvalue = 1e6;
inline constexpr double kMaxMu = 1e14;

/// Decision variables of the invariance program: D_inv (n x n symmetric),
/// L = F D_inv (d x n), E = K D_inv (m x n, MOR only) and mu = 1/epsilon^2.
struct AssembledLmis {
  sdp::LmiProblem problem;
  sdp::AffineMatrix D_inv;
  std::optional<sdp::AffineMatrix> L;
  std::optional<sdp::AffineMatrix> E;
  int mu_var = -1;  // -1 when mu is fixed
  double fixed_mu = 0.0;
};

/// Shared assembly: error dynamics x+ = (A + Bw F + B K) x + v with v ranging
/// over `offsets`, |F x| <= radius and, when feedback_bound > 0, |K x| <= feedback_bound.
struct InvarianceProgram {
  const LtiModel* model = nullptr;
  std::vector<Eigen::VectorXd> offsets;
  double radius = 0.0;
  double lambda = 0.5;
  double feedback_bound = 0.0;
  std::optional<double> fixed_mu;
};

AssembledLmis assemble_invariance_lmis(const InvarianceProgram& program);

/// Epsilon-deviation, input-bound and per-vertex invariance LMIs for a grid
/// abstraction with deviation vertices `beta_vertices` (x+ = (A + Bw F) x - beta).
AssembledLmis assemble_lmis(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices, double radius,
                            double lambda, std::optional<double> fixed_mu = std::nullopt);

/// Uniform grid {1/(steps+1), ..., steps/(steps+1)}; steps = 99 gives 0.01..0.99.
std::vector<double> lambda_grid(int steps = 99);

struct EpsilonSearchOptions {
  std::vector<double> lambdas = lambda_grid();
  bool refine = true;           // golden-section refinement around the best grid point
  int refine_iterations = 40;
  bool bisection = false;       // bisection on mu with feasibility solves instead of direct maximisation
  sdp::Options solver;
};

/// Result of the program at a single lambda.
struct LambdaSolve {
  bool feasible = false;
  double lambda = 0.0;
  double mu = 0.0;
  Eigen::MatrixXd D_inv;
  Eigen::MatrixXd L;
  Eigen::MatrixXd E;
  double residual = 0.0;  // smallest LMI eigenvalue at the returned point
  int newton_steps = 0;
};

LambdaSolve solve_at_lambda(const InvarianceProgram& program, const EpsilonSearchOptions& options);

/// Best LambdaSolve over the lambda grid (plus refinement). Throws
/// InfeasibleError when no lambda admits a certificate.
LambdaSolve search_lambda(InvarianceProgram program, const EpsilonSearchOptions& options);

/// Minimal epsilon for the given delta over the lambda line search.
SimRelation optimize_epsilon(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices, double delta,
                             const EpsilonSearchOptions& options = {});
SimRelation optimize_epsilon(const LtiModel& model, const GridAbstraction& abstraction, double delta,
                             const EpsilonSearchOptions& options = {});

struct VerificationCheck {
  std::string name;
  double margin = 0.0;
  bool passed = false;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;
  bool passed() const;
  double worst_margin() const;
  std::string summary() const;
};

/// Spectral checks of the certificate: D > 0, C'C <= D, F'F <= (r/eps)^2 D,
/// the S-procedure invariance matrix per vertex, B inside the ellipsoid and
/// delta >= 1 - 2 Phi(-r/2).
VerificationReport verify_relation(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices,
                                   const SimRelation& rel, double tolerance = 1e-8);

/// S-procedure matrix [lambda D - M'DM, -M'Dv; -v'DM, (1-lambda) eps^2 - v'Dv]
/// certifying x'Dx <= eps^2  =>  (Mx+v)'D(Mx+v) <= eps^2.
Eigen::MatrixXd invariance_certificate(const Eigen::MatrixXd& D, const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                                       double epsilon, double lambda);

double min_eigenvalue(const Eigen::MatrixXd& S);

/// Closed-form minimal invariant radius for scalar error dynamics
/// x+ = a x + b_w gamma - beta with |gamma| <= r and |beta| <= beta_max.
double scalar_oracle(double a, double b_w, double beta_max, double r);

}  // namespace ccsim

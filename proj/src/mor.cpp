#include "ccsim/mor.hpp"

#include "ccsim/coupling.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ccsim {

namespace {

std::string shape(const Eigen::MatrixXd& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void expect_shape(const char* name, const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols) {
  if (M.rows() != rows || M.cols() != cols)
    throw ConfigError(std::string("reduced model: ") + name + " is " + shape(M) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
}

void push_unique(std::vector<Eigen::VectorXd>& out, const Eigen::VectorXd& v) {
  for (const auto& u : out)
    if ((u - v).lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + v.lpNorm<Eigen::Infinity>())) return;
  out.push_back(v);
}

}  // namespace

LtiModel ReducedModel::as_model(const Box& state_box) const {
  LtiModel m;
  m.A = Ar;
  m.B = Br;
  m.Bw = Brw;
  m.C = Cr;
  m.state_box = state_box;
  m.input_box = input_box;
  return m;
}

ReducedModel build_reduced(const LtiModel& model, const Eigen::MatrixXd& P, const Eigen::MatrixXd& Ar,
                           const Eigen::MatrixXd& Br, const Eigen::MatrixXd& Brw, const Eigen::MatrixXd& R,
                           std::optional<Box> reduced_input_box) {
  model.validate();
  const Eigen::Index n = model.state_dim();
  const Eigen::Index m = model.input_dim();
  const Eigen::Index d = model.noise_dim();
  const Eigen::Index nr = Ar.rows();
  if (nr < 1 || nr > n) throw ConfigError("reduced model: reduced order must lie in [1, " + std::to_string(n) + "]");
  expect_shape("Ar", Ar, nr, nr);
  expect_shape("P", P, n, nr);
  expect_shape("Brw", Brw, nr, d);
  const Eigen::Index mr = Br.cols();
  expect_shape("Br", Br, nr, mr);
  expect_shape("R", R, m, mr);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pqr(P);
  if (pqr.rank() < nr) throw ConfigError("reduced model: P must have full column rank");

  ReducedModel red;
  red.Ar = Ar;
  red.Br = Br;
  red.Brw = Brw;
  red.P = P;
  red.R = R;
  red.Cr = model.C * P;

  const Eigen::MatrixXd rhs = P * Ar - model.A * P;
  if (m > 0) {
    red.Q = model.B.colPivHouseholderQr().solve(rhs);
  } else {
    red.Q = Eigen::MatrixXd::Zero(0, nr);
  }
  const double residual = (model.B * red.Q - rhs).lpNorm<Eigen::Infinity>();
  if (!(residual <= kSylvesterTolerance))
    throw ConfigError("reduced model: P Ar = A P + B Q has no solution (residual " + std::to_string(residual) + ")");

  if (reduced_input_box) {
    red.input_box = *reduced_input_box;
  } else if (mr == m) {
    red.input_box = model.input_box;
  } else {
    throw ConfigError("reduced model: an input box for u_r is required when dim(u_r) != dim(u)");
  }
  if (red.input_box.dim() != mr) throw ConfigError("reduced model: input box dimension must match Br columns");
  if (!((red.input_box.hi - red.input_box.lo).array() >= 0.0).all())
    throw ConfigError("reduced model: input box has lo > hi");
  return red;
}

double truncation_delta(double halfwidth, int dim) {
  if (halfwidth < 0.0 || dim < 0) throw std::invalid_argument("truncation_delta: negative argument");
  const double inside = normal_interval(-halfwidth, halfwidth, 0.0, 1.0);
  return 1.0 - std::pow(inside, dim);
}

double truncation_halfwidth(double delta_trunc, int dim) {
  if (!(delta_trunc > 0.0 && delta_trunc <= 1.0)) throw std::domain_error("truncation_halfwidth: delta must lie in (0, 1]");
  if (dim < 1) throw std::domain_error("truncation_halfwidth: dimension must be positive");
  // Per-axis mass q = (1 - delta)^(1/d) inside [-a, a], i.e. a = Phi^-1((1 + q) / 2).
  const double q = std::exp(std::log1p(-delta_trunc) / dim);
  return std::sqrt(2.0) * erf_inverse(q);
}

MorErrorSystem mor_error_system(const LtiModel& model, const ReducedModel& reduced, double delta_trunc) {
  MorErrorSystem sys;
  sys.B_bar = model.B * reduced.R - reduced.P * reduced.Br;
  sys.Bw_bar = model.Bw - reduced.P * reduced.Brw;
  const int d = model.noise_dim();
  const bool noisy = sys.Bw_bar.size() > 0 && sys.Bw_bar.lpNorm<Eigen::Infinity>() > 1e-12;

  std::vector<Eigen::VectorXd> w_vertices;
  if (noisy) {
    if (!(delta_trunc > 0.0))
      throw ConfigError("model-order reduction: Bw - P Brw is nonzero, so a positive truncation budget is required");
    const double a = truncation_halfwidth(delta_trunc, d);
    sys.delta_trunc = delta_trunc;
    sys.w_halfwidth = Eigen::VectorXd::Constant(d, a);
    const Box wbox{-sys.w_halfwidth, sys.w_halfwidth};
    for (const auto& w : wbox.vertices()) w_vertices.push_back(sys.Bw_bar * w);
  } else {
    w_vertices.push_back(Eigen::VectorXd::Zero(model.state_dim()));
  }

  std::vector<Eigen::VectorXd> u_vertices;
  if (reduced.input_box.dim() > 0) {
    for (const auto& u : reduced.input_box.vertices()) u_vertices.push_back(sys.B_bar * u);
  } else {
    u_vertices.push_back(Eigen::VectorXd::Zero(model.state_dim()));
  }
  for (const auto& zu : u_vertices)
    for (const auto& zw : w_vertices) push_unique(sys.z_vertices, zu + zw);
  return sys;
}

SimRelation optimize_epsilon_mor(const LtiModel& model, const ReducedModel& reduced, double delta_budget,
                                 const MorOptions& options) {
  model.validate();
  if (!(delta_budget >= 0.0 && delta_budget < 1.0)) throw std::domain_error("optimize_epsilon_mor: delta must lie in [0, 1)");
  if (!(options.trunc_split > 0.0 && options.trunc_split < 1.0))
    throw std::domain_error("optimize_epsilon_mor: trunc_split must lie in (0, 1)");
  const double trunc_budget = options.trunc_split * delta_budget;
  const double coupling_delta = delta_budget - trunc_budget;
  const MorErrorSystem sys = mor_error_system(model, reduced, trunc_budget);

  double k = options.feedback_bound;
  if (k < 0.0) k = model.input_dim() > 0 ? model.input_box.halfwidth().minCoeff() : 0.0;

  const double r = radius_from_delta(coupling_delta);
  InvarianceProgram program;
  program.model = &model;
  program.offsets = sys.z_vertices;
  program.radius = r;
  program.feedback_bound = k;
  const LambdaSolve best = search_lambda(program, options.search);

  SimRelation rel;
  rel.kind = RelationKind::model_order_reduction;
  rel.lambda = best.lambda;
  rel.epsilon = 1.0 / std::sqrt(best.mu);
  Eigen::MatrixXd D = best.D_inv.inverse();
  rel.D = 0.5 * (D + D.transpose());
  rel.F = best.L * rel.D;
  rel.K = best.E * rel.D;
  rel.radius = r;
  rel.feedback_bound = k;
  rel.coupling_delta = coupling_delta;
  rel.delta_trunc = sys.delta_trunc;
  rel.w_halfwidth = sys.w_halfwidth;
  rel.delta = std::min(1.0, coupling_delta + sys.delta_trunc);

  const VerificationReport report = verify_mor_relation(model, reduced, rel);
  if (!report.passed())
    throw std::runtime_error("optimize_epsilon_mor: certificate failed verification: " + report.summary());
  return rel;
}

VerificationReport verify_mor_relation(const LtiModel& model, const ReducedModel& reduced, const SimRelation& rel,
                                       double tolerance) {
  VerificationReport rep;
  auto add = [&](std::string name, double margin, bool strict = false) {
    rep.checks.push_back({std::move(name), margin, strict ? margin > 0.0 : margin >= -tolerance});
  };
  const double eps = rel.epsilon;
  const Eigen::MatrixXd& D = rel.D;
  add("kind", rel.kind == RelationKind::model_order_reduction ? 0.0 : -1.0);
  add("D symmetric", -(D - D.transpose()).cwiseAbs().maxCoeff());
  add("D positive definite", min_eigenvalue(D), true);
  add("epsilon-deviation", min_eigenvalue(D - model.C.transpose() * model.C));
  const double e2 = eps * eps;
  add("input bound", min_eigenvalue((rel.radius * rel.radius / e2) * D - rel.F.transpose() * rel.F));
  Eigen::MatrixXd K = rel.K.size() ? rel.K : Eigen::MatrixXd::Zero(model.input_dim(), model.state_dim());
  if (K.size())
    add("feedback bound", min_eigenvalue((rel.feedback_bound * rel.feedback_bound / e2) * D - K.transpose() * K));
  add("delta covers radius", rel.coupling_delta - delta_from_gamma_norm(rel.radius));
  add("delta budget", rel.delta - std::min(1.0, rel.coupling_delta + rel.delta_trunc));

  const MorErrorSystem sys = mor_error_system(model, reduced, rel.delta_trunc);
  const Eigen::MatrixXd M = model.A + model.Bw * rel.F + model.B * K;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& z : sys.z_vertices)
    worst = std::min(worst, min_eigenvalue(invariance_certificate(D, M, z, eps, rel.lambda)));
  add("invariance", worst);
  return rep;
}

std::pair<double, double> compose_transitive(const SimRelation& abstraction, const SimRelation& reduction) {
  if (abstraction.kind != RelationKind::finite_abstraction)
    throw std::invalid_argument("compose_transitive: first relation must be a finite abstraction");
  if (reduction.kind != RelationKind::model_order_reduction)
    throw std::invalid_argument("compose_transitive: second relation must be a model-order reduction");
  return {abstraction.epsilon + reduction.epsilon, std::min(1.0, abstraction.delta + reduction.delta)};
}

}  // namespace ccsim

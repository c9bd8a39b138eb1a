#include "ccsim/simrel.hpp"

#include "ccsim/coupling.hpp"
#include "ccsim/errors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace ccsim {

using sdp::AffineMatrix;

const char* to_string(RelationKind kind) {
  return kind == RelationKind::finite_abstraction ? "finite-abstraction" : "model-order-reduction";
}

RelationKind relation_kind_from_string(const std::string& s) {
  if (s == "finite-abstraction") return RelationKind::finite_abstraction;
  if (s == "model-order-reduction") return RelationKind::model_order_reduction;
  throw ConfigError("unknown relation kind '" + s + "'");
}

AssembledLmis assemble_invariance_lmis(const InvarianceProgram& program) {
  if (!(program.lambda > 0.0 && program.lambda < 1.0)) throw std::invalid_argument("assemble_lmis: lambda must lie in (0, 1)");
  if (program.radius < 0.0) throw std::invalid_argument("assemble_lmis: radius must be nonnegative");
  if (program.offsets.empty()) throw std::invalid_argument("assemble_lmis: at least one disturbance vertex is required");
  const LtiModel& m = *program.model;
  const int n = m.state_dim();
  const int d = m.noise_dim();
  const int p = m.output_dim();
  const int nu = m.input_dim();
  const double lambda = program.lambda;

  AssembledLmis out;
  auto& prob = out.problem;
  out.D_inv = prob.add_symmetric(n);
  // With r = 0 the input-bound block forces L = 0; eliminate it instead of
  // leaving the solver a block with empty interior. Same for K.
  if (program.radius > 0.0) out.L = prob.add_matrix(d, n);
  if (program.feedback_bound > 0.0 && nu > 0) out.E = prob.add_matrix(nu, n);

  AffineMatrix mu(1, 1);
  if (program.fixed_mu) {
    out.fixed_mu = *program.fixed_mu;
    mu = AffineMatrix(Eigen::MatrixXd::Constant(1, 1, *program.fixed_mu));
  } else {
    out.mu_var = prob.add_variable();
    mu = prob.scalar(out.mu_var);
  }
  auto mu_times = [&](const Eigen::MatrixXd& M) {
    if (program.fixed_mu) return AffineMatrix(Eigen::MatrixXd(*program.fixed_mu * M));
    AffineMatrix r(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
    r.add_term(out.mu_var, M);
    return r;
  };
  const auto& Dinv = out.D_inv;

  prob.add_lmi(Dinv - AffineMatrix::identity(n) * kMinDInvEigenvalue, "D_inv lower bound");
  prob.add_lmi(AffineMatrix::identity(n) * kMaxDInvEigenvalue - Dinv, "D_inv upper bound");
  if (!program.fixed_mu) prob.add_lmi(AffineMatrix(Eigen::MatrixXd::Constant(1, 1, kMaxMu)) - mu, "mu upper bound");

  // epsilon-deviation: [D_inv, D_inv C'; C D_inv, I] >= 0
  const Eigen::MatrixXd& C = m.C;
  prob.add_lmi(AffineMatrix::blocks({{Dinv, Dinv * Eigen::MatrixXd(C.transpose())},
                                     {Eigen::MatrixXd(C) * Dinv, AffineMatrix::identity(p)}}),
               "epsilon-deviation");

  // input bound: [r^2 D_inv, L'; L, mu I] >= 0
  if (out.L) {
    prob.add_lmi(AffineMatrix::blocks({{Dinv * (program.radius * program.radius), out.L->transpose()},
                                       {*out.L, mu_times(Eigen::MatrixXd::Identity(d, d))}}),
                 "input bound");
  }
  if (out.E) {
    const double k = program.feedback_bound;
    prob.add_lmi(AffineMatrix::blocks({{Dinv * (k * k), out.E->transpose()},
                                       {*out.E, mu_times(Eigen::MatrixXd::Identity(nu, nu))}}),
                 "feedback bound");
  }

  // invariance, one block per vertex v of the disturbance set:
  // [lambda D_inv, 0, *; 0, (1-lambda) mu, *; A D_inv + Bw L + B E, mu v, D_inv] >= 0
  AffineMatrix closed = Eigen::MatrixXd(m.A) * Dinv;
  if (out.L) closed = closed + Eigen::MatrixXd(m.Bw) * *out.L;
  if (out.E) closed = closed + Eigen::MatrixXd(m.B) * *out.E;
  for (std::size_t l = 0; l < program.offsets.size(); ++l) {
    const Eigen::VectorXd& v = program.offsets[l];
    const AffineMatrix mv = mu_times(Eigen::MatrixXd(v));
    prob.add_lmi(AffineMatrix::blocks({{Dinv * lambda, AffineMatrix::zero(n, 1), closed.transpose()},
                                       {AffineMatrix::zero(1, n), mu_times(Eigen::MatrixXd::Constant(1, 1, 1.0 - lambda)), mv.transpose()},
                                       {closed, mv, Dinv}}),
                 "invariance vertex " + std::to_string(l));
  }

  Eigen::VectorXd c = Eigen::VectorXd::Zero(prob.num_vars());
  if (out.mu_var >= 0) c[out.mu_var] = 1.0;
  prob.set_objective(c);
  return out;
}

AssembledLmis assemble_lmis(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices, double radius,
                            double lambda, std::optional<double> fixed_mu) {
  InvarianceProgram program;
  program.model = &model;
  for (const auto& b : beta_vertices) program.offsets.push_back(-b);
  program.radius = radius;
  program.lambda = lambda;
  program.fixed_mu = fixed_mu;
  return assemble_invariance_lmis(program);
}

std::vector<double> lambda_grid(int steps) {
  if (steps < 1) throw std::invalid_argument("lambda_grid: steps must be positive");
  std::vector<double> out;
  for (int i = 1; i <= steps; ++i) out.push_back(static_cast<double>(i) / (steps + 1));
  return out;
}

namespace {

LambdaSolve extract(const AssembledLmis& lmis, const Eigen::VectorXd& x, double lambda, double mu, int n, int d, int nu) {
  LambdaSolve s;
  s.feasible = true;
  s.lambda = lambda;
  s.mu = mu;
  s.D_inv = lmis.D_inv.evaluate(x);
  s.L = lmis.L ? lmis.L->evaluate(x) : Eigen::MatrixXd::Zero(d, n);
  s.E = lmis.E ? lmis.E->evaluate(x) : Eigen::MatrixXd::Zero(nu, n);
  s.residual = lmis.problem.min_eigenvalue(x).first;
  return s;
}

LambdaSolve solve_direct(const InvarianceProgram& program, const EpsilonSearchOptions& options) {
  const AssembledLmis lmis = assemble_invariance_lmis(program);
  const sdp::Result r = sdp::maximize(lmis.problem, options.solver);
  const LtiModel& m = *program.model;
  if (r.status != sdp::Status::optimal && r.status != sdp::Status::iteration_limit) {
    LambdaSolve s;
    s.lambda = program.lambda;
    s.residual = r.min_eigenvalue;
    s.newton_steps = r.newton_steps;
    return s;
  }
  LambdaSolve s = extract(lmis, r.x, program.lambda, r.x[lmis.mu_var], m.state_dim(), m.noise_dim(), m.input_dim());
  s.newton_steps = r.newton_steps;
  return s;
}

LambdaSolve solve_bisection(InvarianceProgram program, const EpsilonSearchOptions& options) {
  const LtiModel& m = *program.model;
  auto probe = [&](double mu, sdp::Result& res) {
    program.fixed_mu = mu;
    AssembledLmis lmis = assemble_invariance_lmis(program);
    res = sdp::find_strictly_feasible(lmis.problem, options.solver);
    return std::make_pair(res.status == sdp::Status::optimal, std::move(lmis));
  };
  sdp::Result res;
  // Bracket the largest feasible mu, starting from mu = 1.
  double lo = 1.0;
  double hi = kMaxMu;
  auto [ok, lmis] = probe(lo, res);
  while (!ok && lo > 1e-10) {
    hi = lo;
    lo *= 0.1;
    std::tie(ok, lmis) = probe(lo, res);
  }
  if (!ok) {
    LambdaSolve s;
    s.lambda = program.lambda;
    s.residual = res.min_eigenvalue;
    return s;
  }
  Eigen::VectorXd best_x = res.x;
  AssembledLmis best = std::move(lmis);
  for (int it = 0; it < 100 && hi / lo > 1.0 + 1e-10; ++it) {
    const double mid = std::sqrt(lo * hi);
    auto [feasible, candidate] = probe(mid, res);
    if (feasible) {
      lo = mid;
      best_x = res.x;
      best = std::move(candidate);
    } else {
      hi = mid;
    }
  }
  return extract(best, best_x, program.lambda, lo, m.state_dim(), m.noise_dim(), m.input_dim());
}

}  // namespace

LambdaSolve solve_at_lambda(const InvarianceProgram& program, const EpsilonSearchOptions& options) {
  return options.bisection ? solve_bisection(program, options) : solve_direct(program, options);
}

LambdaSolve search_lambda(InvarianceProgram program, const EpsilonSearchOptions& options) {
  if (options.lambdas.empty()) throw std::invalid_argument("optimize_epsilon: lambda grid is empty");
  std::vector<double> lambdas = options.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  for (double l : lambdas)
    if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("optimize_epsilon: lambda grid must lie in (0, 1)");

  auto at = [&](double lambda) {
    program.lambda = lambda;
    return solve_at_lambda(program, options);
  };

  LambdaSolve best;
  double best_residual = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    LambdaSolve s = at(lambdas[i]);
    if (s.feasible && (!best.feasible || s.mu > best.mu)) {
      best = std::move(s);
      best_index = i;
    } else if (!s.feasible) {
      best_residual = std::max(best_residual, s.residual);
    }
  }
  if (!best.feasible) {
    std::ostringstream msg;
    msg << "no feasible certificate for any lambda in the grid (best phase-I residual " << best_residual << ")";
    throw InfeasibleError(msg.str());
  }

  if (options.refine && lambdas.size() > 1) {
    // Golden-section search for the largest mu between the grid neighbours.
    double a = best_index > 0 ? lambdas[best_index - 1] : 1e-6;
    double b = best_index + 1 < lambdas.size() ? lambdas[best_index + 1] : 1.0 - 1e-6;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    auto value = [](const LambdaSolve& s) { return s.feasible ? s.mu : -1.0; };
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    LambdaSolve sc = at(c);
    LambdaSolve sd = at(d);
    for (int it = 0; it < options.refine_iterations && b - a > 1e-9; ++it) {
      if (value(sc) >= value(sd)) {
        b = d;
        d = c;
        sd = std::move(sc);
        c = b - phi * (b - a);
        sc = at(c);
      } else {
        a = c;
        c = d;
        sc = std::move(sd);
        d = a + phi * (b - a);
        sd = at(d);
      }
    }
    for (LambdaSolve* s : {&sc, &sd})
      if (s->feasible && s->mu > best.mu) best = std::move(*s);
  }
  return best;
}

namespace {

SimRelation relation_from(const LambdaSolve& s, double delta, double radius) {
  SimRelation rel;
  rel.kind = RelationKind::finite_abstraction;
  rel.delta = delta;
  rel.radius = radius;
  rel.lambda = s.lambda;
  rel.epsilon = 1.0 / std::sqrt(s.mu);
  Eigen::MatrixXd D = s.D_inv.inverse();
  rel.D = 0.5 * (D + D.transpose());
  rel.F = s.L * rel.D;
  return rel;
}

}  // namespace

SimRelation optimize_epsilon(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices, double delta,
                             const EpsilonSearchOptions& options) {
  model.validate();
  const double r = radius_from_delta(delta);
  InvarianceProgram program;
  program.model = &model;
  for (const auto& b : beta_vertices) program.offsets.push_back(-b);
  program.radius = r;
  const LambdaSolve best = search_lambda(program, options);
  SimRelation rel = relation_from(best, delta, r);
  const VerificationReport report = verify_relation(model, beta_vertices, rel);
  if (!report.passed()) throw std::runtime_error("optimize_epsilon: certificate failed verification: " + report.summary());
  return rel;
}

SimRelation optimize_epsilon(const LtiModel& model, const GridAbstraction& abstraction, double delta,
                             const EpsilonSearchOptions& options) {
  return optimize_epsilon(model, abstraction.beta_vertices(), delta, options);
}

double min_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd invariance_certificate(const Eigen::MatrixXd& D, const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                                       double epsilon, double lambda) {
  const auto n = D.rows();
  Eigen::MatrixXd S(n + 1, n + 1);
  const Eigen::MatrixXd DM = D * M;
  const Eigen::VectorXd Dv = D * v;
  S.topLeftCorner(n, n) = lambda * D - M.transpose() * DM;
  S.topRightCorner(n, 1) = -M.transpose() * Dv;
  S.bottomLeftCorner(1, n) = S.topRightCorner(n, 1).transpose();
  S(n, n) = (1.0 - lambda) * epsilon * epsilon - v.dot(Dv);
  return S;
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerificationCheck& c) { return c.passed; });
}

double VerificationReport::worst_margin() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) w = std::min(w, c.margin);
  return w;
}

std::string VerificationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) os << c.name << "=" << c.margin << (c.passed ? "" : " FAIL") << "; ";
  return os.str();
}

VerificationReport verify_relation(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices,
                                   const SimRelation& rel, double tolerance) {
  VerificationReport rep;
  auto add = [&](std::string name, double margin, bool strict = false) {
    rep.checks.push_back({std::move(name), margin, strict ? margin > 0.0 : margin >= -tolerance});
  };
  const double eps = rel.epsilon;
  const Eigen::MatrixXd& D = rel.D;
  add("D symmetric", -(D - D.transpose()).cwiseAbs().maxCoeff());
  add("D positive definite", min_eigenvalue(D), true);
  add("epsilon-deviation", min_eigenvalue(D - model.C.transpose() * model.C));
  const double r = rel.radius;
  if (eps > 0.0) add("input bound", min_eigenvalue((r * r / (eps * eps)) * D - rel.F.transpose() * rel.F));
  add("delta covers radius", rel.delta - delta_from_gamma_norm(r));

  const Eigen::MatrixXd M = model.A + model.Bw * rel.F;
  double worst_inv = std::numeric_limits<double>::infinity();
  double worst_beta = std::numeric_limits<double>::infinity();
  for (const auto& beta : beta_vertices) {
    worst_inv = std::min(worst_inv, min_eigenvalue(invariance_certificate(D, M, -beta, eps, rel.lambda)));
    worst_beta = std::min(worst_beta, eps * eps - beta.dot(D * beta));
  }
  add("invariance", worst_inv);
  add("B inside S", worst_beta);
  return rep;
}

double scalar_oracle(double a, double b_w, double beta_max, double r) {
  const double reach = std::abs(b_w) * r;
  const double abs_a = std::abs(a);
  // x = 0 maps onto -beta, so the interval can never be tighter than beta_max.
  if (abs_a < 1.0) return std::max(beta_max, (beta_max - reach) / (1.0 - abs_a));
  if (abs_a * beta_max <= reach) return beta_max;
  throw std::domain_error("scalar_oracle: no bounded invariant interval");
}

}  // namespace ccsim

#include "ccsim/synthesis.hpp"

#include "ccsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccsim {

GridTransitionSystem::GridTransitionSystem(const GridAbstraction& abstraction) : grid_(&abstraction) {
  if (!abstraction.has_kernel()) throw std::invalid_argument("GridTransitionSystem: abstraction has no kernel");
}

double GridTransitionSystem::expectation(int state, int input, const std::vector<double>& values) const {
  return grid_->expectation(grid_->row(state, input), values);
}

DenseMdp::DenseMdp(int num_states, int num_inputs)
    : n_(num_states), m_(num_inputs),
      T_(static_cast<std::size_t>(num_states) * num_inputs * num_states, 0.0) {
  if (num_states < 1 || num_inputs < 1) throw std::invalid_argument("DenseMdp: empty state or input set");
}

void DenseMdp::set(int state, int input, int next, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("DenseMdp: probability outside [0, 1]");
  T_[(static_cast<std::size_t>(state) * m_ + input) * n_ + next] = p;
}

double DenseMdp::prob(int state, int input, int next) const {
  return T_[(static_cast<std::size_t>(state) * m_ + input) * n_ + next];
}

double DenseMdp::expectation(int state, int input, const std::vector<double>& values) const {
  const double* row = &T_[(static_cast<std::size_t>(state) * m_ + input) * n_];
  double e = 0.0;
  for (int k = 0; k < n_; ++k) e += row[k] * values[static_cast<std::size_t>(k)];
  return e;
}

Synthesis robust_value_iteration(const TransitionSystem& mdp, const Dfa& dfa, const RobustLabeling& labeling,
                                 double delta, double tol, int max_iters) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("robust_value_iteration: delta must lie in [0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("robust_value_iteration: tol must be positive");
  if (max_iters < 0) throw std::invalid_argument("robust_value_iteration: max_iters must be nonnegative");
  const int S = mdp.num_states();
  const int Q = dfa.num_states();
  if (static_cast<int>(labeling.letters.size()) != S)
    throw std::invalid_argument("robust_value_iteration: labeling does not cover every state");

  Synthesis out;
  auto& vt = out.values;
  vt.num_states = S;
  vt.num_dfa_states = Q;
  vt.V.assign(static_cast<std::size_t>(S) * Q, 0.0);
  out.policy.num_dfa_states = Q;
  out.policy.choice.assign(static_cast<std::size_t>(S) * Q, 0);
  for (int s = 0; s < S; ++s)
    for (int q = 0; q < Q; ++q)
      if (dfa.accepting(q)) vt.V[static_cast<std::size_t>(s) * Q + q] = 1.0;

  // Automaton states whose value is not pinned: non-accepting and able to
  // reach an accepting state.
  std::vector<bool> live(static_cast<std::size_t>(Q), false);
  {
    std::vector<bool> reach = dfa.accepting_states();
    for (bool changed = true; changed;) {
      changed = false;
      for (int q = 0; q < Q; ++q) {
        if (reach[static_cast<std::size_t>(q)]) continue;
        for (int l = 0; l < dfa.alphabet_size(); ++l)
          if (reach[static_cast<std::size_t>(dfa.step(q, static_cast<Letter>(l)))]) {
            reach[static_cast<std::size_t>(q)] = changed = true;
            break;
          }
      }
    }
    for (int q = 0; q < Q; ++q) live[static_cast<std::size_t>(q)] = reach[static_cast<std::size_t>(q)] && !dfa.accepting(q);
  }

  std::vector<double> next = vt.V;
  std::vector<std::vector<double>> W(static_cast<std::size_t>(Q));
  vt.residual = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    for (int q = 0; q < Q; ++q) {
      if (!live[static_cast<std::size_t>(q)]) continue;
      auto& w = W[static_cast<std::size_t>(q)];
      w.assign(static_cast<std::size_t>(S), 0.0);
      for (int s = 0; s < S; ++s) {
        double m = 1.0;
        for (Letter l : labeling.at(s)) m = std::min(m, vt.at(s, dfa.step(q, l)));
        w[static_cast<std::size_t>(s)] = m;
      }
    }
    double change = 0.0;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) reduction(max : change)
#endif
    for (int s = 0; s < S; ++s) {
      if (mdp.absorbing(s)) continue;
      for (int q = 0; q < Q; ++q) {
        if (!live[static_cast<std::size_t>(q)]) continue;
        const auto& w = W[static_cast<std::size_t>(q)];
        double best = -1.0;
        int arg = 0;
        for (int u = 0; u < mdp.num_inputs(); ++u) {
          const double v = std::clamp(mdp.expectation(s, u, w) - delta, 0.0, 1.0);
          if (v > best) {
            best = v;
            arg = u;
          }
        }
        const std::size_t k = static_cast<std::size_t>(s) * Q + q;
        change = std::max(change, std::abs(best - vt.V[k]));
        next[k] = best;
        out.policy.choice[k] = arg;
      }
    }
    vt.V.swap(next);
    next = vt.V;
    vt.iterations = it + 1;
    vt.residual = change;
    if (change < tol) break;
  }
  return out;
}

double initial_bound(const ValueTable& values, const GridAbstraction& abstraction, const Dfa& dfa,
                     const RobustLabeling& labeling, const Eigen::VectorXd& x0) {
  const int s = abstraction.project(x0);
  double m = 1.0;
  for (Letter l : labeling.at(s)) m = std::min(m, values.at(s, dfa.step(dfa.initial(), l)));
  return m;
}

RefinedController::RefinedController(const LtiModel& model, const GridAbstraction& abstraction,
                                     const Specification& spec, const AbstractPolicy& policy,
                                     const SimRelation& relation)
    : model_(&model), grid_(&abstraction), spec_(&spec), policy_(&policy), rel_(&relation) {
  if (relation.kind != RelationKind::finite_abstraction)
    throw std::invalid_argument("RefinedController: relation must be a finite abstraction");
  if (policy.num_dfa_states != spec.dfa.num_states())
    throw std::invalid_argument("RefinedController: policy does not match the automaton");
}

void RefinedController::project_abstract() {
  s_hat_ = grid_->project(x_);
  x_hat_ = s_hat_ == grid_->sink_index() ? x_ : grid_->representative(s_hat_);
}

void RefinedController::reset(const Eigen::VectorXd& x0) {
  x_ = x0;
  delta_events_ = 0;
  project_abstract();
  q_ = spec_->dfa.step(spec_->dfa.initial(), exact_letter(spec_->propositions, model_->output(x_)));
}

Eigen::VectorXd RefinedController::input() const {
  const int j = s_hat_ == grid_->sink_index() ? 0 : policy_->at(s_hat_, q_);
  return grid_->input(j);
}

double RefinedController::relation_level() const {
  const Eigen::VectorXd dx = x_ - x_hat_;
  return dx.dot(rel_->D * dx);
}

bool RefinedController::in_relation() const {
  const double e2 = rel_->epsilon * rel_->epsilon;
  return relation_level() <= e2 * (1.0 + 1e-9);
}

const Eigen::VectorXd& RefinedController::advance(Rng& rng) {
  const Eigen::VectorXd u = input();
  const bool abstract_live = s_hat_ != grid_->sink_index();
  if (abstract_live) {
    const Eigen::VectorXd gamma = rel_->F * (x_ - x_hat_);
    const CoupledNoise cn = sample_maximal_coupling(gamma, rng);
    x_ = model_->step(x_, u, cn.w);
    const Eigen::VectorXd next_hat = model_->step(x_hat_, u, cn.w_hat);
    s_hat_ = grid_->project(next_hat);
    if (s_hat_ != grid_->sink_index()) x_hat_ = grid_->representative(s_hat_);
    if (s_hat_ == grid_->sink_index() || !in_relation()) {
      ++delta_events_;
      project_abstract();
    }
  } else {
    x_ = model_->step(x_, u, standard_normal_vector(model_->noise_dim(), rng));
    project_abstract();
  }
  q_ = spec_->dfa.step(q_, exact_letter(spec_->propositions, model_->output(x_)));
  return x_;
}

Eigen::VectorXd mor_interface_input(const ReducedModel& reduced, const SimRelation& relation,
                                    const Eigen::VectorXd& u_r, const Eigen::VectorXd& x_r, const Eigen::VectorXd& x) {
  Eigen::VectorXd u = reduced.R * u_r + reduced.Q * x_r;
  if (relation.K.size()) u += relation.K * (x - reduced.P * x_r);
  return u;
}

WilsonInterval wilson_interval(long successes, long n, double z) {
  if (n <= 0) throw std::invalid_argument("wilson_interval: n must be positive");
  if (successes < 0 || successes > n) throw std::invalid_argument("wilson_interval: successes out of range");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half), half};
}

ValidationResult monte_carlo_validate(const LtiModel& model, const GridAbstraction& abstraction,
                                      const Specification& spec, const AbstractPolicy& policy,
                                      const SimRelation& relation, const Eigen::VectorXd& x0, long n_runs,
                                      int horizon, Rng& rng) {
  if (n_runs <= 0) throw std::invalid_argument("monte_carlo_validate: n_runs must be positive");
  if (horizon < 0) throw std::invalid_argument("monte_carlo_validate: horizon must be nonnegative");
  ValidationResult res;
  res.runs = n_runs;
  RefinedController ctrl(model, abstraction, spec, policy, relation);
  const Dfa& dfa = spec.dfa;
  for (long run = 0; run < n_runs; ++run) {
    ctrl.reset(x0);
    auto resolved = [&] { return dfa.accepting(ctrl.dfa_state()) || dfa.absorbing(ctrl.dfa_state()); };
    for (int t = 0; t < horizon && !resolved(); ++t) ctrl.advance(rng);
    if (dfa.accepting(ctrl.dfa_state())) ++res.successes;
    else if (!dfa.absorbing(ctrl.dfa_state())) ++res.unresolved;
    if (ctrl.delta_events() > 0) ++res.runs_with_delta_event;
  }
  res.frequency = static_cast<double>(res.successes) / static_cast<double>(n_runs);
  res.ci = wilson_interval(res.successes, n_runs);
  return res;
}

}  // namespace ccsim

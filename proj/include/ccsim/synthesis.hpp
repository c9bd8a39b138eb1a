#pragma once

#include "ccsim/coupling.hpp"
#include "ccsim/models.hpp"
#include "ccsim/mor.hpp"
#include "ccsim/simrel.hpp"
#include "ccsim/spec.hpp"

#include <Eigen/Dense>
#include <vector>

namespace ccsim {

/// Finite MDP seen by the value iteration. States flagged absorbing are
/// uncontrolled traps (the grid sink) whose value is 1 on accepting automaton
/// states and 0 otherwise.
class TransitionSystem {
 public:
  virtual ~TransitionSystem() = default;
  virtual int num_states() const = 0;
  virtual int num_inputs() const = 0;
  virtual bool absorbing(int state) const = 0;
  /// sum_{s'} T(s' | state, input) values[s'].
  virtual double expectation(int state, int input, const std::vector<double>& values) const = 0;
};

/// Grid abstraction with its sink as state num_cells().
class GridTransitionSystem final : public TransitionSystem {
 public:
  explicit GridTransitionSystem(const GridAbstraction& abstraction);
  int num_states() const override { return grid_->num_cells() + 1; }
  int num_inputs() const override { return grid_->num_inputs(); }
  bool absorbing(int state) const override { return state == grid_->sink_index(); }
  double expectation(int state, int input, const std::vector<double>& values) const override;

 private:
  const GridAbstraction* grid_;
};

/// Explicit MDP; rows may sum to less than one (missing mass is worth 0).
class DenseMdp final : public TransitionSystem {
 public:
  DenseMdp(int num_states, int num_inputs);
  void set(int state, int input, int next, double p);
  double prob(int state, int input, int next) const;
  int num_states() const override { return n_; }
  int num_inputs() const override { return m_; }
  bool absorbing(int) const override { return false; }
  double expectation(int state, int input, const std::vector<double>& values) const override;

 private:
  int n_;
  int m_;
  std::vector<double> T_;
};

struct ValueTable {
  int num_states = 0;
  int num_dfa_states = 0;
  std::vector<double> V;  // V[s * num_dfa_states + q]
  int iterations = 0;
  double residual = 0.0;

  double at(int s, int q) const { return V[static_cast<std::size_t>(s) * num_dfa_states + q]; }
};

struct AbstractPolicy {
  int num_dfa_states = 0;
  std::vector<int> choice;  // input index per (s, q); 0 where the choice is irrelevant

  int at(int s, int q) const { return choice[static_cast<std::size_t>(s) * num_dfa_states + q]; }
};

struct Synthesis {
  ValueTable values;
  AbstractPolicy policy;
};

/// V_{k+1}(s, q) = max_u clamp01( sum_s' T(s'|s,u) min_{l in letters(s')} V_k(s', tau(q, l)) - delta ),
/// V = 1 on accepting q, started from the accepting indicator. Jacobi sweeps
/// until the sup-norm change drops below tol or max_iters is reached.
Synthesis robust_value_iteration(const TransitionSystem& mdp, const Dfa& dfa, const RobustLabeling& labeling,
                                 double delta, double tol = 1e-6, int max_iters = 10000);

/// Robust lower bound for a run started at concrete state x0.
double initial_bound(const ValueTable& values, const GridAbstraction& abstraction, const Dfa& dfa,
                     const RobustLabeling& labeling, const Eigen::VectorXd& x0);

/// Stateful controller refining an abstract policy through the coupling
/// gamma = F (x - x_hat). It also owns the abstract copy, so stepping it
/// simulates the concrete system jointly with the abstraction.
class RefinedController {
 public:
  RefinedController(const LtiModel& model, const GridAbstraction& abstraction, const Specification& spec,
                    const AbstractPolicy& policy, const SimRelation& relation);

  void reset(const Eigen::VectorXd& x0);
  /// Input u = u_hat for the current (x_hat, q).
  Eigen::VectorXd input() const;
  /// Applies input(), draws coupled noise, advances x, x_hat and q; returns the new x.
  const Eigen::VectorXd& advance(Rng& rng);

  const Eigen::VectorXd& state() const { return x_; }
  const Eigen::VectorXd& abstract_state() const { return x_hat_; }
  int abstract_index() const { return s_hat_; }
  int dfa_state() const { return q_; }
  int delta_events() const { return delta_events_; }
  /// x_delta' D x_delta for the current pair.
  double relation_level() const;
  bool in_relation() const;

 private:
  void project_abstract();

  const LtiModel* model_;
  const GridAbstraction* grid_;
  const Specification* spec_;
  const AbstractPolicy* policy_;
  const SimRelation* rel_;
  Eigen::VectorXd x_;
  Eigen::VectorXd x_hat_;
  int s_hat_ = 0;
  int q_ = 0;
  int delta_events_ = 0;
};

/// u = R u_r + Q x_r + K (x - P x_r).
Eigen::VectorXd mor_interface_input(const ReducedModel& reduced, const SimRelation& relation,
                                    const Eigen::VectorXd& u_r, const Eigen::VectorXd& x_r, const Eigen::VectorXd& x);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
  double half_width = 0.5;
};

/// Wilson score interval for `successes` out of `n` at normal quantile z.
WilsonInterval wilson_interval(long successes, long n, double z = 1.959963984540054);

struct ValidationResult {
  long runs = 0;
  long successes = 0;
  long unresolved = 0;          // horizon hit before the automaton became absorbing
  long runs_with_delta_event = 0;
  double frequency = 0.0;
  WilsonInterval ci;
};

/// Monte-Carlo estimate of P(concrete output word accepted) under the refined
/// controller from x0. A run ends on reaching an accepting or absorbing
/// automaton state; unresolved runs count as failures.
ValidationResult monte_carlo_validate(const LtiModel& model, const GridAbstraction& abstraction,
                                      const Specification& spec, const AbstractPolicy& policy,
                                      const SimRelation& relation, const Eigen::VectorXd& x0, long n_runs,
                                      int horizon, Rng& rng);

}  // namespace ccsim

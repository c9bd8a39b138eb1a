#include "ccsim/spec.hpp"

#include "ccsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccsim {

bool Proposition::contains(const Eigen::VectorXd& y) const {
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(y[i] >= lo[i] && y[i] < hi[i])) return false;
  return true;
}

double Proposition::distance(const Eigen::VectorXd& y) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    double gap = 0.0;
    if (y[i] < lo[i]) gap = lo[i] - y[i];
    else if (y[i] > hi[i]) gap = y[i] - hi[i];
    s += gap * gap;
  }
  return std::sqrt(s);
}

Truth Proposition::robust(const Eigen::VectorXd& y, double epsilon) const {
  if (epsilon < 0.0) throw std::invalid_argument("Proposition::robust: epsilon must be nonnegative");
  if (epsilon == 0.0) return contains(y) ? Truth::robust_true : Truth::robust_false;
  // A Euclidean ball lies in a box iff its centre is at least epsilon from every face.
  bool inside = true;
  for (Eigen::Index i = 0; i < lo.size() && inside; ++i)
    inside = y[i] - epsilon >= lo[i] && y[i] + epsilon < hi[i];
  if (inside) return Truth::robust_true;
  if (distance(y) > epsilon) return Truth::robust_false;
  return Truth::ambiguous;
}

Letter exact_letter(const std::vector<Proposition>& props, const Eigen::VectorXd& y) {
  Letter l = 0;
  for (std::size_t i = 0; i < props.size(); ++i)
    if (props[i].contains(y)) l |= Letter{1} << i;
  return l;
}

std::vector<Letter> achievable_letters(const std::vector<Proposition>& props, const Eigen::VectorXd& y, double epsilon) {
  Letter fixed = 0;
  std::vector<int> open;
  for (std::size_t i = 0; i < props.size(); ++i) {
    switch (props[i].robust(y, epsilon)) {
      case Truth::robust_true: fixed |= Letter{1} << i; break;
      case Truth::robust_false: break;
      case Truth::ambiguous: open.push_back(static_cast<int>(i)); break;
    }
  }
  std::vector<Letter> out;
  const std::size_t combos = std::size_t{1} << open.size();
  out.reserve(combos);
  for (std::size_t mask = 0; mask < combos; ++mask) {
    Letter l = fixed;
    for (std::size_t j = 0; j < open.size(); ++j)
      if (mask & (std::size_t{1} << j)) l |= Letter{1} << open[j];
    out.push_back(l);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dfa::Dfa(int num_states, int num_props, int initial, std::vector<bool> accepting)
    : num_states_(num_states), num_props_(num_props), initial_(initial), accepting_(std::move(accepting)) {
  if (num_states < 1) throw ConfigError("dfa: at least one state is required");
  if (num_props < 0 || num_props > kMaxPropositions)
    throw ConfigError("dfa: number of propositions must lie in [0, " + std::to_string(kMaxPropositions) + "]");
  if (initial < 0 || initial >= num_states) throw ConfigError("dfa: initial state out of range");
  if (static_cast<int>(accepting_.size()) != num_states) throw ConfigError("dfa: accepting mask has the wrong size");
  table_.assign(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(alphabet_size()), -1);
}

void Dfa::set_transition(int q, Letter letter, int next) {
  if (q < 0 || q >= num_states_ || next < 0 || next >= num_states_) throw ConfigError("dfa: transition state out of range");
  if (letter >= static_cast<Letter>(alphabet_size())) throw ConfigError("dfa: letter out of range");
  table_[static_cast<std::size_t>(q) * alphabet_size() + letter] = next;
}

int Dfa::step(int q, Letter letter) const {
  return table_[static_cast<std::size_t>(q) * alphabet_size() + (letter & static_cast<Letter>(alphabet_size() - 1))];
}

int Dfa::run(const std::vector<Letter>& word) const {
  int q = initial_;
  for (Letter l : word) q = step(q, l);
  return q;
}

bool Dfa::absorbing(int q) const {
  for (int l = 0; l < alphabet_size(); ++l)
    if (step(q, static_cast<Letter>(l)) != q) return false;
  return true;
}

void Dfa::validate() const {
  for (std::size_t k = 0; k < table_.size(); ++k)
    if (table_[k] < 0)
      throw ConfigError("dfa: missing transition from state " + std::to_string(k / alphabet_size()) + " on letter " +
                        std::to_string(k % alphabet_size()));
}

Dfa template_reach_avoid(int p1, int p2, int num_props) {
  if (p1 < 0 || p2 < 0 || p1 >= num_props || p2 >= num_props || p1 == p2)
    throw ConfigError("reach-avoid template: invalid proposition indices");
  Dfa dfa(3, num_props, 0, {false, true, false});
  for (int l = 0; l < dfa.alphabet_size(); ++l) {
    const Letter letter = static_cast<Letter>(l);
    const bool has1 = letter & (Letter{1} << p1);
    const bool has2 = letter & (Letter{1} << p2);
    dfa.set_transition(0, letter, has1 ? 1 : (has2 ? 2 : 0));
    dfa.set_transition(1, letter, 1);
    dfa.set_transition(2, letter, 2);
  }
  return dfa;
}

Dfa template_bounded_invariance(int p1, int horizon, int num_props) {
  if (horizon < 1) throw ConfigError("bounded-invariance template: horizon must be at least 1");
  if (p1 < 0 || p1 >= num_props) throw ConfigError("bounded-invariance template: invalid proposition index");
  std::vector<bool> acc(static_cast<std::size_t>(horizon) + 2, false);
  acc[static_cast<std::size_t>(horizon)] = true;
  Dfa dfa(horizon + 2, num_props, 0, acc);
  const int reject = horizon + 1;
  for (int l = 0; l < dfa.alphabet_size(); ++l) {
    const Letter letter = static_cast<Letter>(l);
    const bool has1 = letter & (Letter{1} << p1);
    for (int q = 0; q < horizon; ++q) dfa.set_transition(q, letter, has1 ? q + 1 : reject);
    dfa.set_transition(horizon, letter, horizon);
    dfa.set_transition(reject, letter, reject);
  }
  return dfa;
}

int Specification::proposition_index(const std::string& name) const {
  for (std::size_t i = 0; i < propositions.size(); ++i)
    if (propositions[i].name == name) return static_cast<int>(i);
  throw ConfigError("unknown proposition '" + name + "'");
}

void Specification::validate(int output_dim) const {
  if (static_cast<int>(propositions.size()) != dfa.num_props())
    throw ConfigError("spec: automaton alphabet does not match the proposition count");
  for (const auto& p : propositions) {
    if (p.lo.size() != p.hi.size() || p.dim() != output_dim)
      throw ConfigError("spec: proposition '" + p.name + "' has the wrong dimension");
    if (((p.hi - p.lo).array() < 0.0).any()) throw ConfigError("spec: proposition '" + p.name + "' has lo > hi");
  }
  dfa.validate();
}

RobustLabeling robust_labels(const GridAbstraction& abstraction, const Eigen::MatrixXd& C,
                             const std::vector<Proposition>& props, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("robust_labels: epsilon must be nonnegative");
  RobustLabeling lab;
  lab.epsilon = epsilon;
  lab.letters.reserve(static_cast<std::size_t>(abstraction.num_cells()) + 1);
  for (int i = 0; i < abstraction.num_cells(); ++i)
    lab.letters.push_back(achievable_letters(props, C * abstraction.representative(i), epsilon));
  lab.letters.push_back({Letter{0}});
  return lab;
}

}  // namespace ccsim

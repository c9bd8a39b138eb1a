#pragma once

#include "ccsim/models.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ccsim {

/// Set of atomic propositions; bit i stands for proposition i.
using Letter = std::uint32_t;

inline constexpr int kMaxPropositions = 16;

enum class Truth { robust_false, robust_true, ambiguous };

/// Axis-aligned region [lo, hi) in output space. Bounds may be infinite.
struct Proposition {
  std::string name;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::VectorXd& y) const;
  /// Euclidean distance from y to the closed box.
  double distance(const Eigen::VectorXd& y) const;
  /// Truth of the proposition for every output within distance epsilon of y.
  Truth robust(const Eigen::VectorXd& y, double epsilon) const;
};

Letter exact_letter(const std::vector<Proposition>& props, const Eigen::VectorXd& y);

/// Letters reachable from outputs within epsilon of y, in increasing order.
/// With epsilon == 0 this is {exact_letter(props, y)}.
std::vector<Letter> achievable_letters(const std::vector<Proposition>& props, const Eigen::VectorXd& y, double epsilon);

/// Deterministic automaton with a total transition table over 2^num_props letters.
class Dfa {
 public:
  Dfa() = default;
  Dfa(int num_states, int num_props, int initial, std::vector<bool> accepting);

  int num_states() const { return num_states_; }
  int num_props() const { return num_props_; }
  int alphabet_size() const { return 1 << num_props_; }
  int initial() const { return initial_; }
  bool accepting(int q) const { return accepting_[static_cast<std::size_t>(q)]; }
  const std::vector<bool>& accepting_states() const { return accepting_; }

  void set_transition(int q, Letter letter, int next);
  int step(int q, Letter letter) const;
  /// Runs the automaton over a word from the initial state.
  int run(const std::vector<Letter>& word) const;
  /// True if every letter leads back to q.
  bool absorbing(int q) const;

  /// Throws ConfigError unless the table is total and in range.
  void validate() const;

 private:
  int num_states_ = 0;
  int num_props_ = 0;
  int initial_ = 0;
  std::vector<bool> accepting_;
  std::vector<int> table_;  // -1 marks a missing transition
};

/// States: 0 trying, 1 accepted, 2 rejected. Letters with P1 accept, letters
/// with P2 but not P1 reject, everything else stays in 0.
Dfa template_reach_avoid(int p1, int p2, int num_props);

/// States 0..horizon-1 count consecutive P1 letters; `horizon` accepts and
/// `horizon + 1` rejects.
Dfa template_bounded_invariance(int p1, int horizon, int num_props);

struct Specification {
  std::vector<Proposition> propositions;
  Dfa dfa;

  int proposition_index(const std::string& name) const;
  void validate(int output_dim) const;
};

/// Achievable letters per abstract state (cells, then the sink with {0}).
struct RobustLabeling {
  double epsilon = 0.0;
  std::vector<std::vector<Letter>> letters;

  const std::vector<Letter>& at(int state) const { return letters[static_cast<std::size_t>(state)]; }
  bool certain(int state) const { return at(state).size() == 1; }
};

RobustLabeling robust_labels(const GridAbstraction& abstraction, const Eigen::MatrixXd& C,
                             const std::vector<Proposition>& props, double epsilon);

}  // namespace ccsim

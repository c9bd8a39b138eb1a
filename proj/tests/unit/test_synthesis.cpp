#include "ccsim/coupling.hpp"
#include "ccsim/synthesis.hpp"
#include "support.hpp"

#include <doctest.h>

#include <functional>

using namespace ccsim;
using namespace ccsim::testing;

namespace {

RobustLabeling exact_labels(const std::vector<Letter>& per_state) {
  RobustLabeling lab;
  for (Letter l : per_state) lab.letters.push_back({l});
  return lab;
}

struct Parking1d {
  LtiModel model = parking_1d();
  GridAbstraction grid = build_grid(model, GridSpec{{200}, scalar_inputs(11)});
  Specification spec{{{"P1", Eigen::VectorXd::Constant(1, 4.75), Eigen::VectorXd::Constant(1, 6.25)},
                      {"P2", Eigen::VectorXd::Constant(1, 6.25), Eigen::VectorXd::Constant(1, 10.0)}},
                     template_reach_avoid(0, 1, 2)};
};

const Parking1d& parking() {
  static const Parking1d p;
  return p;
}

SimRelation scalar_relation(double eps, double delta, double F) {
  SimRelation rel;
  rel.epsilon = eps;
  rel.delta = delta;
  rel.D = Eigen::MatrixXd::Identity(1, 1);
  rel.F = Eigen::MatrixXd::Constant(1, 1, F);
  rel.radius = radius_from_delta(delta);
  return rel;
}

}  // namespace

TEST_CASE("two-state fixed point") {
  DenseMdp mdp(2, 1);
  mdp.set(0, 0, 1, 0.7);
  mdp.set(0, 0, 0, 0.3);
  mdp.set(1, 0, 1, 1.0);
  const Dfa dfa = template_reach_avoid(0, 1, 2);
  const auto syn = robust_value_iteration(mdp, dfa, exact_labels({0u, 1u}), 0.1, 1e-13, 10000);
  CHECK(syn.values.at(0, 0) == doctest::Approx(0.6 / 0.7).epsilon(1e-10));
  CHECK(syn.values.at(1, 0) == doctest::Approx(0.9));
  CHECK(syn.values.at(0, 1) == 1.0);
  CHECK(syn.values.at(0, 2) == 0.0);
  CHECK(syn.values.residual < 1e-13);
}

TEST_CASE("initially accepting automaton gives value one") {
  DenseMdp mdp(3, 2);
  mdp.set(0, 0, 1, 0.5);
  Dfa dfa(1, 1, 0, {true});
  dfa.set_transition(0, 0u, 0);
  dfa.set_transition(0, 1u, 0);
  for (double delta : {0.0, 0.5, 1.0}) {
    const auto syn = robust_value_iteration(mdp, dfa, exact_labels({0u, 1u, 0u}), delta);
    for (double v : syn.values.V) CHECK(v == 1.0);
  }
}

TEST_CASE("delta one clamps every non-accepting value to zero") {
  const auto& p = parking();
  const GridTransitionSystem ts(p.grid);
  const auto syn = robust_value_iteration(ts, p.spec.dfa, robust_labels(p.grid, p.model.C, p.spec.propositions, 0.0), 1.0);
  for (int s = 0; s <= p.grid.num_cells(); ++s) {
    CHECK(syn.values.at(s, 0) == 0.0);
    CHECK(syn.values.at(s, 1) == 1.0);
    CHECK(syn.values.at(s, 2) == 0.0);
  }
}

TEST_CASE("value iterates are nondecreasing and bounded") {
  const auto& p = parking();
  const GridTransitionSystem ts(p.grid);
  const auto lab = robust_labels(p.grid, p.model.C, p.spec.propositions, 0.2);
  std::vector<double> prev;
  for (int k = 0; k <= 30; k += 3) {
    const auto syn = robust_value_iteration(ts, p.spec.dfa, lab, 0.012, 1e-300, k);
    if (!prev.empty())
      for (std::size_t i = 0; i < prev.size(); ++i) CHECK(syn.values.V[i] >= prev[i] - 1e-15);
    for (double v : syn.values.V) CHECK((v >= 0.0 && v <= 1.0));
    prev = syn.values.V;
  }
  const auto full = robust_value_iteration(ts, p.spec.dfa, lab, 0.012, 1e-6, 10000);
  CHECK(full.values.residual < 1e-6);
  CHECK(full.values.iterations < 10000);
  CHECK(full.values.at(p.grid.sink_index(), 0) == 0.0);
}

TEST_CASE("value iteration matches brute-force policy enumeration") {
  Rng rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Dfa dfa = template_reach_avoid(0, 1, 2);
  for (int trial = 0; trial < 25; ++trial) {
    const int S = 2 + trial % 3;
    const int U = 2;
    const int H = 1 + trial % 4;
    DenseMdp mdp(S, U);
    for (int s = 0; s < S; ++s)
      for (int u = 0; u < U; ++u) {
        std::vector<double> w(static_cast<std::size_t>(S));
        double tot = 0.0;
        for (auto& x : w) tot += (x = unit(rng));
        const double keep = trial % 2 ? 1.0 : 0.9;  // allow leaking mass
        for (int t = 0; t < S; ++t) mdp.set(s, u, t, keep * w[static_cast<std::size_t>(t)] / tot);
      }
    std::vector<Letter> labels(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) labels[static_cast<std::size_t>(s)] = static_cast<Letter>((s * 7 + trial) % 4 == 3 ? 0 : (s * 7 + trial) % 4);
    const auto syn = robust_value_iteration(mdp, dfa, exact_labels(labels), 0.0, 1e-300, H);

    // Enumerate every time-dependent deterministic policy on the trying state
    // and every path of length H.
    const long per_step = 1L << S;
    long total = 1;
    for (int k = 0; k < H; ++k) total *= per_step;
    std::vector<double> best(static_cast<std::size_t>(S), 0.0);
    for (long code = 0; code < total; ++code) {
      std::function<double(int, int, int)> prob = [&](int s, int q, int t) -> double {
        if (dfa.accepting(q)) return 1.0;
        if (t == H || q == 2) return 0.0;
        long c = code;
        for (int k = 0; k < t; ++k) c /= per_step;
        const int u = static_cast<int>((c % per_step) >> s) & 1;
        double acc = 0.0;
        for (int n = 0; n < S; ++n) {
          const double pr = mdp.prob(s, u, n);
          if (pr > 0.0) acc += pr * prob(n, dfa.step(q, labels[static_cast<std::size_t>(n)]), t + 1);
        }
        return acc;
      };
      for (int s = 0; s < S; ++s) best[static_cast<std::size_t>(s)] = std::max(best[static_cast<std::size_t>(s)], prob(s, 0, 0));
    }
    for (int s = 0; s < S; ++s) CHECK(syn.values.at(s, 0) == doctest::Approx(best[static_cast<std::size_t>(s)]).epsilon(1e-12));
  }
}

TEST_CASE("values are monotone in delta and epsilon") {
  const auto& p = parking();
  const GridTransitionSystem ts(p.grid);
  const auto lab0 = robust_labels(p.grid, p.model.C, p.spec.propositions, 0.1);
  const auto lab1 = robust_labels(p.grid, p.model.C, p.spec.propositions, 0.3);
  const auto a = robust_value_iteration(ts, p.spec.dfa, lab0, 0.0);
  const auto b = robust_value_iteration(ts, p.spec.dfa, lab0, 0.02);
  const auto c = robust_value_iteration(ts, p.spec.dfa, lab1, 0.0);
  for (std::size_t i = 0; i < a.values.V.size(); ++i) {
    CHECK(b.values.V[i] <= a.values.V[i] + 1e-9);
    CHECK(c.values.V[i] <= a.values.V[i] + 1e-9);
  }
}

TEST_CASE("initial bound reads the first letter") {
  const auto& p = parking();
  const GridTransitionSystem ts(p.grid);
  const auto lab = robust_labels(p.grid, p.model.C, p.spec.propositions, 0.2);
  const auto syn = robust_value_iteration(ts, p.spec.dfa, lab, 0.012);
  CHECK(initial_bound(syn.values, p.grid, p.spec.dfa, lab, Eigen::VectorXd::Constant(1, 5.5)) == 1.0);
  CHECK(initial_bound(syn.values, p.grid, p.spec.dfa, lab, Eigen::VectorXd::Constant(1, 8.0)) == 0.0);
  CHECK(initial_bound(syn.values, p.grid, p.spec.dfa, lab, Eigen::VectorXd::Constant(1, 20.0)) == 0.0);
  const double far = initial_bound(syn.values, p.grid, p.spec.dfa, lab, Eigen::VectorXd::Constant(1, -5.0));
  CHECK((far > 0.0 && far < 1.0));
}

TEST_CASE("Wilson interval") {
  const auto w = wilson_interval(50, 100);
  CHECK(w.lo == doctest::Approx(0.4038315).epsilon(1e-6));
  CHECK(w.hi == doctest::Approx(0.5961685).epsilon(1e-6));
  const auto z = wilson_interval(0, 10);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == doctest::Approx(0.2775328).epsilon(1e-6));
  CHECK_THROWS(wilson_interval(0, 0));
  CHECK_THROWS(wilson_interval(11, 10));
}

TEST_CASE("refined controller keeps the pair related until a delta event") {
  const auto& p = parking();
  const GridTransitionSystem ts(p.grid);
  const double delta = 0.012;
  const double r = radius_from_delta(delta);
  const double eps = 0.05 / (1.0 - 0.9) - r / (1.0 - 0.9);  // scalar closed form with F = -r / eps
  const SimRelation rel = scalar_relation(eps, delta, -r / eps);
  const auto lab = robust_labels(p.grid, p.model.C, p.spec.propositions, eps);
  const auto syn = robust_value_iteration(ts, p.spec.dfa, lab, delta);
  RefinedController ctrl(p.model, p.grid, p.spec, syn.policy, rel);
  Rng rng(17);
  const int runs = 10000, k = 10;
  int with_event = 0;
  for (int run = 0; run < runs; ++run) {
    ctrl.reset(Eigen::VectorXd::Constant(1, -2.0));
    for (int t = 0; t < k; ++t) {
      const int before = ctrl.delta_events();
      if (before == 0) {
        REQUIRE(ctrl.in_relation());
        CHECK(std::abs(ctrl.state()[0] - ctrl.abstract_state()[0]) <= eps * (1.0 + 1e-9));
        CHECK(std::abs((rel.F * (ctrl.state() - ctrl.abstract_state()))[0]) <= r * (1.0 + 1e-9));
      }
      ctrl.advance(rng);
    }
    if (ctrl.delta_events() > 0) ++with_event;
  }
  const double bound = 1.0 - std::pow(1.0 - delta, k);
  const double sd = std::sqrt(bound * (1.0 - bound) / runs);
  CHECK(static_cast<double>(with_event) / runs <= bound + 3.0 * sd);
}

TEST_CASE("Monte-Carlo validation from inside the target") {
  const auto& p = parking();
  const GridTransitionSystem ts(p.grid);
  const SimRelation rel = scalar_relation(0.5, 0.0, 0.0);
  const auto lab = robust_labels(p.grid, p.model.C, p.spec.propositions, rel.epsilon);
  const auto syn = robust_value_iteration(ts, p.spec.dfa, lab, 0.0);
  Rng rng(5);
  const auto res = monte_carlo_validate(p.model, p.grid, p.spec, syn.policy, rel, Eigen::VectorXd::Constant(1, 5.5), 100, 50, rng);
  CHECK(res.successes == 100);
  CHECK(res.frequency == 1.0);
  CHECK_THROWS(monte_carlo_validate(p.model, p.grid, p.spec, syn.policy, rel, Eigen::VectorXd::Constant(1, 5.5), 0, 50, rng));
  const auto zero = monte_carlo_validate(p.model, p.grid, p.spec, syn.policy, rel, Eigen::VectorXd::Constant(1, -5.0), 50, 0, rng);
  CHECK(zero.unresolved == 50);
  CHECK(zero.frequency == 0.0);
}

TEST_CASE("reduction interface input") {
  ReducedModel red;
  red.R = Eigen::MatrixXd::Constant(1, 1, 2.0);
  red.Q = Eigen::MatrixXd{{0.5}};
  red.P = Eigen::MatrixXd{{1.0}, {0.0}};
  SimRelation rel;
  rel.K = Eigen::MatrixXd{{0.1, -0.2}};
  const Eigen::VectorXd u = mor_interface_input(red, rel, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0),
                                                Eigen::Vector2d(3.0, 1.0));
  CHECK(u[0] == doctest::Approx(2.0 + 1.0 + 0.1 * 1.0 - 0.2 * 1.0));
}

#include "ccsim/io.hpp"

#include "ccsim/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ccsim::io {

namespace {

double number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(what + ": expected a number");
}

const json& field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(what + ": missing field '" + key + "'");
  return j.at(key);
}

std::vector<int> int_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected a list of integers");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw ConfigError(what + ": expected integers");
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array()) throw ConfigError(what + ": expected a matrix (list of rows)");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  if (!j.front().is_array()) throw ConfigError(what + ": matrix rows must be lists");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(what + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = number(row[static_cast<std::size_t>(c)], what);
      if (!std::isfinite(v)) throw ConfigError(what + ": entries must be finite");
      M(r, c) = v;
    }
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError(what + ": expected a list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

json to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Box box_from_json(const json& j, const std::string& what) {
  Box b{vector_from_json(field(j, "lo", what), what + ".lo"), vector_from_json(field(j, "hi", what), what + ".hi")};
  if (b.lo.size() != b.hi.size()) throw ConfigError(what + ": lo and hi differ in length");
  return b;
}

std::vector<Eigen::VectorXd> uniform_inputs(const Box& input_box, const std::vector<int>& per_axis) {
  const int m = input_box.dim();
  if (static_cast<int>(per_axis.size()) != m) throw ConfigError("grid: inputs_per_axis must have one entry per input");
  std::size_t total = 1;
  for (int k : per_axis) {
    if (k < 1) throw ConfigError("grid: inputs_per_axis entries must be positive");
    total *= static_cast<std::size_t>(k);
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Eigen::VectorXd u(m);
    std::size_t rest = idx;
    for (int i = 0; i < m; ++i) {
      const int k = per_axis[static_cast<std::size_t>(i)];
      const auto pos = static_cast<int>(rest % static_cast<std::size_t>(k));
      rest /= static_cast<std::size_t>(k);
      u[i] = k == 1 ? 0.5 * (input_box.lo[i] + input_box.hi[i])
                    : input_box.lo[i] + (input_box.hi[i] - input_box.lo[i]) * pos / (k - 1);
    }
    out.push_back(std::move(u));
  }
  return out;
}

GridSpec grid_from_json(const json& j, const LtiModel& model) {
  GridSpec g;
  g.cells_per_axis = int_list(field(j, "cells_per_axis", "grid"), "grid.cells_per_axis");
  if (j.contains("input_samples")) {
    for (const auto& u : j.at("input_samples")) g.input_samples.push_back(vector_from_json(u, "grid.input_samples"));
  } else if (j.contains("inputs_per_axis")) {
    g.input_samples = uniform_inputs(model.input_box, int_list(j.at("inputs_per_axis"), "grid.inputs_per_axis"));
  } else {
    g.input_samples = uniform_inputs(model.input_box, std::vector<int>(static_cast<std::size_t>(model.input_dim()), 11));
  }
  return g;
}

GridSpec grid_from_string(const std::string& s, const LtiModel& model) {
  GridSpec g;
  std::string token;
  std::istringstream is(s);
  while (std::getline(is, token, s.find('x') != std::string::npos ? 'x' : ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      g.cells_per_axis.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("grid: cannot parse '" + s + "'");
    }
  }
  g.input_samples = uniform_inputs(model.input_box, std::vector<int>(static_cast<std::size_t>(model.input_dim()), 11));
  return g;
}

ModelFile model_from_json(const json& j) {
  ModelFile f;
  auto& m = f.model;
  m.A = matrix_from_json(field(j, "A", "model"), "model.A");
  m.B = matrix_from_json(field(j, "B", "model"), "model.B");
  m.Bw = matrix_from_json(field(j, "Bw", "model"), "model.Bw");
  m.C = matrix_from_json(field(j, "C", "model"), "model.C");
  m.state_box = box_from_json(field(j, "state_box", "model"), "model.state_box");
  m.input_box = box_from_json(field(j, "input_box", "model"), "model.input_box");
  m.validate();
  if (j.contains("grid")) f.grid = grid_from_json(j.at("grid"), m);
  return f;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

ModelFile load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

ReducedFile reduced_from_json(const json& j, const LtiModel& full) {
  ReducedFile f;
  std::optional<Box> ubox;
  if (j.contains("input_box")) ubox = box_from_json(j.at("input_box"), "reduced.input_box");
  f.reduced = build_reduced(full, matrix_from_json(field(j, "P", "reduced"), "reduced.P"),
                            matrix_from_json(field(j, "Ar", "reduced"), "reduced.Ar"),
                            matrix_from_json(field(j, "Br", "reduced"), "reduced.Br"),
                            matrix_from_json(field(j, "Brw", "reduced"), "reduced.Brw"),
                            matrix_from_json(field(j, "R", "reduced"), "reduced.R"), ubox);
  if (j.contains("state_box")) f.state_box = box_from_json(j.at("state_box"), "reduced.state_box");
  if (j.contains("grid")) {
    if (!f.state_box) throw ConfigError("reduced: a grid requires a state_box");
    f.grid = grid_from_json(j.at("grid"), f.reduced.as_model(*f.state_box));
  }
  if (j.contains("feedback_bound")) f.options.feedback_bound = number(j.at("feedback_bound"), "reduced.feedback_bound");
  if (j.contains("trunc_split")) f.options.trunc_split = number(j.at("trunc_split"), "reduced.trunc_split");
  return f;
}

ReducedFile load_reduced(const std::string& path, const LtiModel& full) {
  return reduced_from_json(read_json_file(path), full);
}

namespace {

Letter letter_from_json(const json& j, const Specification& spec) {
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 0 || v >= (1LL << spec.propositions.size())) throw ConfigError("spec: letter out of range");
    return static_cast<Letter>(v);
  }
  if (j.is_array()) {
    Letter l = 0;
    for (const auto& name : j) {
      if (!name.is_string()) throw ConfigError("spec: letter lists must contain proposition names");
      l |= Letter{1} << spec.proposition_index(name.get<std::string>());
    }
    return l;
  }
  throw ConfigError("spec: a letter is an integer or a list of proposition names");
}

}  // namespace

Specification spec_from_json(const json& j) {
  Specification spec;
  for (const auto& p : field(j, "propositions", "spec")) {
    Proposition prop;
    if (!p.contains("name") || !p.at("name").is_string()) throw ConfigError("spec: proposition without a name");
    prop.name = p.at("name").get<std::string>();
    prop.lo = vector_from_json(field(p, "lo", "spec proposition"), "spec.lo");
    prop.hi = vector_from_json(field(p, "hi", "spec proposition"), "spec.hi");
    for (Eigen::Index i = 0; i < prop.lo.size(); ++i) {
      if (std::isnan(prop.lo[i])) prop.lo[i] = -std::numeric_limits<double>::infinity();
    }
    for (Eigen::Index i = 0; i < prop.hi.size(); ++i) {
      if (std::isnan(prop.hi[i])) prop.hi[i] = std::numeric_limits<double>::infinity();
    }
    spec.propositions.push_back(std::move(prop));
  }
  const int np = static_cast<int>(spec.propositions.size());
  if (np > kMaxPropositions) throw ConfigError("spec: too many propositions");

  if (j.contains("template")) {
    const auto name = j.at("template").get<std::string>();
    const int target = spec.proposition_index(field(j, "target", "spec").get<std::string>());
    if (name == "reach_avoid") {
      spec.dfa = template_reach_avoid(target, spec.proposition_index(field(j, "avoid", "spec").get<std::string>()), np);
    } else if (name == "bounded_invariance") {
      spec.dfa = template_bounded_invariance(target, field(j, "horizon", "spec").get<int>(), np);
    } else {
      throw ConfigError("spec: unknown template '" + name + "'");
    }
  } else {
    const auto& d = field(j, "dfa", "spec");
    const int states = field(d, "states", "spec.dfa").get<int>();
    std::vector<bool> acc(static_cast<std::size_t>(std::max(states, 0)), false);
    for (const auto& q : field(d, "accepting", "spec.dfa")) {
      const int k = q.get<int>();
      if (k < 0 || k >= states) throw ConfigError("spec.dfa: accepting state out of range");
      acc[static_cast<std::size_t>(k)] = true;
    }
    spec.dfa = Dfa(states, np, d.value("initial", 0), acc);
    for (const auto& t : field(d, "transitions", "spec.dfa")) {
      if (!t.is_array() || t.size() != 3) throw ConfigError("spec.dfa: transitions are [q, letter, q']");
      spec.dfa.set_transition(t[0].get<int>(), letter_from_json(t[1], spec), t[2].get<int>());
    }
  }
  spec.dfa.validate();
  return spec;
}

Specification load_spec(const std::string& path) { return spec_from_json(read_json_file(path)); }

json relation_to_json(const SimRelation& rel) {
  json j{{"kind", to_string(rel.kind)}, {"epsilon", rel.epsilon}, {"delta", rel.delta},
         {"lambda", rel.lambda},       {"radius", rel.radius},   {"D", to_json(rel.D)},
         {"F", to_json(rel.F)}};
  if (rel.kind == RelationKind::model_order_reduction) {
    j["K"] = to_json(rel.K);
    j["feedback_bound"] = rel.feedback_bound;
    j["coupling_delta"] = rel.coupling_delta;
    j["delta_trunc"] = rel.delta_trunc;
    j["w_halfwidth"] = vector_to_json(rel.w_halfwidth);
  }
  return j;
}

SimRelation relation_from_json(const json& j) {
  SimRelation rel;
  rel.kind = j.contains("kind") ? relation_kind_from_string(j.at("kind").get<std::string>()) : RelationKind::finite_abstraction;
  rel.epsilon = number(field(j, "epsilon", "relation"), "relation.epsilon");
  rel.delta = number(field(j, "delta", "relation"), "relation.delta");
  rel.lambda = number(field(j, "lambda", "relation"), "relation.lambda");
  rel.D = matrix_from_json(field(j, "D", "relation"), "relation.D");
  rel.F = matrix_from_json(field(j, "F", "relation"), "relation.F");
  rel.radius = j.contains("radius") ? number(j.at("radius"), "relation.radius") : 0.0;
  if (j.contains("K")) rel.K = matrix_from_json(j.at("K"), "relation.K");
  if (j.contains("feedback_bound")) rel.feedback_bound = number(j.at("feedback_bound"), "relation.feedback_bound");
  if (j.contains("coupling_delta")) rel.coupling_delta = number(j.at("coupling_delta"), "relation.coupling_delta");
  if (j.contains("delta_trunc")) rel.delta_trunc = number(j.at("delta_trunc"), "relation.delta_trunc");
  if (j.contains("w_halfwidth")) rel.w_halfwidth = vector_from_json(j.at("w_halfwidth"), "relation.w_halfwidth");
  return rel;
}

void write_value_table(std::ostream& os, const GridAbstraction& abstraction, const ValueTable& values,
                       const AbstractPolicy& policy) {
  const int n = abstraction.dim();
  for (int i = 0; i < n; ++i) os << "x" << i << ',';
  os << "dfa_state,value,input_index\n";
  for (int s = 0; s < abstraction.num_cells(); ++s) {
    const Eigen::VectorXd& x = abstraction.representative(s);
    for (int q = 0; q < values.num_dfa_states; ++q) {
      os << std::setprecision(12);
      for (int i = 0; i < n; ++i) os << x[i] << ',';
      os << q << ',' << std::setprecision(17) << values.at(s, q) << ',' << policy.at(s, q) << '\n';
    }
  }
}

void write_policy(std::ostream& os, const GridAbstraction& abstraction, const AbstractPolicy& policy) {
  const int m = abstraction.num_inputs() > 0 ? static_cast<int>(abstraction.input(0).size()) : 0;
  os << "cell,dfa_state,input_index";
  for (int i = 0; i < m; ++i) os << ",u" << i;
  os << '\n' << std::setprecision(17);
  for (int s = 0; s < abstraction.num_cells(); ++s) {
    for (int q = 0; q < policy.num_dfa_states; ++q) {
      const int j = policy.at(s, q);
      os << s << ',' << q << ',' << j;
      for (int i = 0; i < m; ++i) os << ',' << abstraction.input(j)[i];
      os << '\n';
    }
  }
}

AbstractPolicy read_policy(const std::string& path, int num_cells, int num_dfa_states) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  AbstractPolicy p;
  p.num_dfa_states = num_dfa_states;
  p.choice.assign(static_cast<std::size_t>(num_cells + 1) * num_dfa_states, 0);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    const int s = std::stoi(a), q = std::stoi(b), j = std::stoi(c);
    if (s < 0 || s >= num_cells || q < 0 || q >= num_dfa_states) throw ConfigError("policy: entry out of range");
    p.choice[static_cast<std::size_t>(s) * num_dfa_states + q] = j;
  }
  return p;
}

}  // namespace ccsim::io

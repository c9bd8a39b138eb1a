#pragma once

#include "ccsim/models.hpp"
#include "ccsim/mor.hpp"
#include "ccsim/simrel.hpp"
#include "ccsim/spec.hpp"
#include "ccsim/synthesis.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>

namespace ccsim::io {

using json = nlohmann::json;

/// Matrices are nested row lists; a bare number is a 1x1 matrix.
Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what);
Eigen::VectorXd vector_from_json(const json& j, const std::string& what);
json to_json(const Eigen::MatrixXd& M);
json vector_to_json(const Eigen::VectorXd& v);

Box box_from_json(const json& j, const std::string& what);

struct ModelFile {
  LtiModel model;
  std::optional<GridSpec> grid;
};

/// {"A","B","Bw","C","state_box":{"lo","hi"},"input_box":{"lo","hi"},
///  "grid":{"cells_per_axis":[..], "input_samples":[[..],..] | "inputs_per_axis":[..]}}
ModelFile model_from_json(const json& j);
ModelFile load_model(const std::string& path);

/// Grid spec from JSON; `inputs_per_axis` spreads samples uniformly over the
/// input box including its corners.
GridSpec grid_from_json(const json& j, const LtiModel& model);
/// Parses "200" or "60x65" / "60,65"; input samples default to 11 per axis.
GridSpec grid_from_string(const std::string& s, const LtiModel& model);
std::vector<Eigen::VectorXd> uniform_inputs(const Box& input_box, const std::vector<int>& per_axis);

struct ReducedFile {
  ReducedModel reduced;
  std::optional<Box> state_box;
  std::optional<GridSpec> grid;
  MorOptions options;
};

/// {"P","Ar","Br","Brw","R", optional "input_box","state_box","grid",
///  "feedback_bound","trunc_split"}
ReducedFile reduced_from_json(const json& j, const LtiModel& full);
ReducedFile load_reduced(const std::string& path, const LtiModel& full);

/// {"propositions":[{"name","lo","hi"}], "dfa":{"states","initial","accepting","transitions":[[q,letter,q']]}}
/// or {"propositions":[..], "template":"reach_avoid", "target":"P1", "avoid":"P2"}
/// or {"propositions":[..], "template":"bounded_invariance", "target":"P1", "horizon":6}.
/// A letter is an integer bitmask or a list of proposition names.
Specification spec_from_json(const json& j);
Specification load_spec(const std::string& path);

json relation_to_json(const SimRelation& rel);
SimRelation relation_from_json(const json& j);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

/// Columns: x_hat coordinates, dfa_state, value, input_index. One row per
/// (cell, automaton state); the sink is omitted.
void write_value_table(std::ostream& os, const GridAbstraction& abstraction, const ValueTable& values,
                       const AbstractPolicy& policy);
/// Columns: cell, dfa_state, input_index, then the input coordinates.
void write_policy(std::ostream& os, const GridAbstraction& abstraction, const AbstractPolicy& policy);
AbstractPolicy read_policy(const std::string& path, int num_cells, int num_dfa_states);

}  // namespace ccsim::io

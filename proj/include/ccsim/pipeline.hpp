#pragma once

#include "ccsim/io.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ccsim::pipeline {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitConfig = 3;

struct RunConfig {
  std::string model_path;
  std::string grid;  // JSON file or "N" / "NxM"; empty uses the model file's grid
  std::string spec_path;
  std::vector<double> deltas;
  int lambda_steps = 99;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty writes tables to stdout where possible
  std::string mor_path;
  long runs = 10000;
  int horizon = 200;
  int cells = 20;  // initial cells sampled by validate
  bool timing = true;
};

struct QuantifyRow {
  double delta = 0.0;
  std::optional<double> epsilon;  // empty when infeasible
  double lambda = 0.0;
  double solve_time_ms = 0.0;
};

/// Minimal epsilon for each delta; infeasible deltas give rows without epsilon.
std::vector<QuantifyRow> quantify(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices,
                                  const std::vector<double>& deltas, const EpsilonSearchOptions& options);
void write_quantify_csv(std::ostream& os, const std::vector<QuantifyRow>& rows, bool timing);

EpsilonSearchOptions search_options(const RunConfig& config);
GridSpec resolve_grid(const RunConfig& config, const LtiModel& model, const std::optional<GridSpec>& fallback);

/// FNV-1a digest of the inputs that determine synthesize outputs.
std::string config_hash(const RunConfig& config);

int cmd_quantify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_synthesize(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_reduce(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace ccsim::pipeline

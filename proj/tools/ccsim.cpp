#include "ccsim/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace ccsim::pipeline;
  CLI::App app{"Coupling-based (epsilon, delta) simulation relations and controller synthesis"};
  app.require_subcommand(1);

  RunConfig cfg;
  bool no_timing = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "Model JSON file");
    sub->add_option("--grid", cfg.grid, "Grid JSON file or cell counts such as 200 or 60x65");
    sub->add_option("--delta", cfg.deltas, "Coupling miss probability (repeatable)")->take_all()->allow_extra_args(false);
    sub->add_option("--lambda-steps", cfg.lambda_steps, "Number of interior lambda grid points");
    sub->add_option("--out", cfg.out_dir, "Output directory");
    sub->add_option("--mor", cfg.mor_path, "Reduced-model JSON file");
    sub->add_flag("--no-timing", no_timing, "Write zero timings for byte-reproducible outputs");
  };

  auto* quantify = app.add_subcommand("quantify", "Minimal epsilon for each delta");
  common(quantify);
  auto* synthesize = app.add_subcommand("synthesize", "Robust value iteration and abstract policy");
  common(synthesize);
  synthesize->add_option("--spec", cfg.spec_path, "Specification JSON file");
  synthesize->add_option("--seed", cfg.seed, "Random seed");
  auto* validate = app.add_subcommand("validate", "Monte-Carlo check of synthesize outputs");
  common(validate);
  validate->add_option("--spec", cfg.spec_path, "Specification JSON file");
  validate->add_option("--seed", cfg.seed, "Random seed");
  validate->add_option("--runs", cfg.runs, "Runs per initial cell");
  validate->add_option("--horizon", cfg.horizon, "Maximum steps per run");
  validate->add_option("--cells", cfg.cells, "Number of initial cells");
  auto* reduce = app.add_subcommand("reduce", "Minimal epsilon of a model-order reduction for each delta");
  common(reduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  cfg.timing = !no_timing;

  if (*quantify) return cmd_quantify(cfg, std::cout, std::cerr);
  if (*synthesize) return cmd_synthesize(cfg, std::cout, std::cerr);
  if (*validate) return cmd_validate(cfg, std::cout, std::cerr);
  return cmd_reduce(cfg, std::cout, std::cerr);
}

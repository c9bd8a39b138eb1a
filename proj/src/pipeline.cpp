#include "ccsim/pipeline.hpp"

#include "ccsim/errors.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ccsim::pipeline {

namespace fs = std::filesystem;
using io::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " file '" + path + "' not found");
}

void check_deltas(const std::vector<double>& deltas) {
  for (double d : deltas)
    if (!(d >= 0.0 && d < 1.0)) throw ConfigError("delta values must lie in [0, 1)");
}

fs::path output_dir(const RunConfig& c) {
  if (c.out_dir.empty()) throw ConfigError("missing --out");
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

struct Problem {
  io::ModelFile model_file;
  GridAbstraction grid;
  Specification spec;
  double delta = 0.0;
};

Problem load_problem(const RunConfig& c) {
  require_file(c.model_path, "model");
  require_file(c.spec_path, "spec");
  check_deltas(c.deltas);
  Problem p;
  p.model_file = io::load_model(c.model_path);
  p.spec = io::load_spec(c.spec_path);
  p.delta = c.deltas.empty() ? 0.0 : c.deltas.front();
  return p;
}

std::vector<int> sampled_cells(int num_cells, int count) {
  std::vector<int> out;
  if (count <= 0 || num_cells <= 0) return out;
  count = std::min(count, num_cells);
  for (int k = 0; k < count; ++k)
    out.push_back(static_cast<int>((static_cast<long long>(2 * k + 1) * num_cells) / (2LL * count)));
  return out;
}

}  // namespace

std::vector<QuantifyRow> quantify(const LtiModel& model, const std::vector<Eigen::VectorXd>& beta_vertices,
                                  const std::vector<double>& deltas, const EpsilonSearchOptions& options) {
  std::vector<QuantifyRow> rows;
  for (double delta : deltas) {
    QuantifyRow row;
    row.delta = delta;
    const auto start = Clock::now();
    try {
      const SimRelation rel = optimize_epsilon(model, beta_vertices, delta, options);
      row.epsilon = rel.epsilon;
      row.lambda = rel.lambda;
    } catch (const InfeasibleError&) {
      row.epsilon.reset();
    }
    row.solve_time_ms = elapsed_ms(start);
    rows.push_back(row);
  }
  return rows;
}

void write_quantify_csv(std::ostream& os, const std::vector<QuantifyRow>& rows, bool timing) {
  os << "delta,epsilon,lambda_best,solve_time_ms\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.delta << ',';
    if (r.epsilon) os << *r.epsilon << ',' << r.lambda;
    else os << "infeasible,infeasible";
    os << ',' << std::fixed << std::setprecision(1) << (timing ? r.solve_time_ms : 0.0) << std::defaultfloat
       << std::setprecision(10) << '\n';
  }
}

EpsilonSearchOptions search_options(const RunConfig& config) {
  if (config.lambda_steps < 1) throw ConfigError("--lambda-steps must be positive");
  EpsilonSearchOptions o;
  o.lambdas = lambda_grid(config.lambda_steps);
  return o;
}

GridSpec resolve_grid(const RunConfig& config, const LtiModel& model, const std::optional<GridSpec>& fallback) {
  if (!config.grid.empty()) {
    if (fs::is_regular_file(config.grid)) return io::grid_from_json(io::read_json_file(config.grid), model);
    return io::grid_from_string(config.grid, model);
  }
  if (fallback) return *fallback;
  throw ConfigError("no grid: pass --grid or add a \"grid\" block to the model file");
}

std::string config_hash(const RunConfig& c) {
  std::ostringstream key;
  key << slurp(c.model_path) << '\x1f' << slurp(c.spec_path) << '\x1f';
  if (!c.mor_path.empty()) key << slurp(c.mor_path);
  key << '\x1f' << (c.grid.empty() || !fs::is_regular_file(c.grid) ? c.grid : slurp(c.grid)) << '\x1f'
      << c.lambda_steps << '\x1f' << std::setprecision(17);
  for (double d : c.deltas) key << d << ',';
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : key.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

int cmd_quantify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(c.model_path, "model");
    check_deltas(c.deltas);
    const io::ModelFile mf = io::load_model(c.model_path);
    const GridSpec gs = resolve_grid(c, mf.model, mf.grid);
    const GridAbstraction grid = build_grid(mf.model, gs, false);
    const auto rows = quantify(mf.model, grid.beta_vertices(), c.deltas, search_options(c));
    std::ostringstream csv;
    write_quantify_csv(csv, rows, c.timing);
    if (c.out_dir.empty()) {
      out << csv.str();
    } else {
      write_text(output_dir(c) / "frontier.csv", csv.str());
    }
    for (const auto& r : rows)
      if (!r.epsilon) err << "delta " << r.delta << ": infeasible\n";
    return kExitOk;
  });
}

int cmd_synthesize(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = Clock::now();
    Problem p = load_problem(c);
    const fs::path dir = output_dir(c);
    const LtiModel& full = p.model_file.model;
    const EpsilonSearchOptions opts = search_options(c);

    json summary;
    LtiModel abstract_model = full;
    std::optional<io::ReducedFile> reduced;
    SimRelation mor_rel;
    if (!c.mor_path.empty()) {
      require_file(c.mor_path, "mor");
      const json rj = io::read_json_file(c.mor_path);
      reduced = io::reduced_from_json(rj, full);
      if (!reduced->state_box) throw ConfigError("reduced model file needs a state_box for synthesis");
      abstract_model = reduced->reduced.as_model(*reduced->state_box);
      const double budget = rj.contains("delta") ? rj.at("delta").get<double>() : p.delta;
      MorOptions mo = reduced->options;
      mo.search = opts;
      mor_rel = optimize_epsilon_mor(full, reduced->reduced, budget, mo);
      p.spec.validate(abstract_model.output_dim());
    } else {
      p.spec.validate(full.output_dim());
    }
    const GridSpec gs = resolve_grid(c, abstract_model, reduced ? reduced->grid : p.model_file.grid);
    p.grid = build_grid(abstract_model, gs, true);

    const SimRelation rel = optimize_epsilon(abstract_model, p.grid, p.delta, opts);
    double eps = rel.epsilon;
    double delta = rel.delta;
    if (reduced) {
      const auto [e, d] = compose_transitive(rel, mor_rel);
      eps = e;
      delta = d;
      summary["reduction"] = io::relation_to_json(mor_rel);
      summary["composed"] = {{"epsilon", e}, {"delta", d}};
    }
    const RobustLabeling lab = robust_labels(p.grid, abstract_model.C, p.spec.propositions, eps);
    const GridTransitionSystem ts(p.grid);
    const Synthesis syn = robust_value_iteration(ts, p.spec.dfa, lab, delta);

    std::ostringstream values, policy;
    io::write_value_table(values, p.grid, syn.values, syn.policy);
    io::write_policy(policy, p.grid, syn.policy);
    write_text(dir / "values.csv", values.str());
    write_text(dir / "policy.csv", policy.str());
    io::write_json_file((dir / "relation.json").string(), io::relation_to_json(rel));

    summary["epsilon"] = eps;
    summary["delta"] = delta;
    summary["abstraction_epsilon"] = rel.epsilon;
    summary["abstraction_delta"] = rel.delta;
    summary["lambda"] = rel.lambda;
    summary["iterations"] = syn.values.iterations;
    summary["residual"] = syn.values.residual;
    summary["num_cells"] = p.grid.num_cells();
    summary["num_dfa_states"] = p.spec.dfa.num_states();
    summary["state_count"] = (p.grid.num_cells() + 1) * p.spec.dfa.num_states();
    summary["config_hash"] = config_hash(c);
    summary["wall_time_ms"] = c.timing ? elapsed_ms(start) : 0.0;
    io::write_json_file((dir / "summary.json").string(), summary);
    out << "epsilon " << eps << " delta " << delta << " iterations " << syn.values.iterations << '\n';
    return kExitOk;
  });
}

int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Problem p = load_problem(c);
    if (!c.mor_path.empty()) throw ConfigError("validate supports finite-abstraction runs only (drop --mor)");
    if (c.runs <= 0) throw ConfigError("--runs must be positive");
    if (c.horizon < 0) throw ConfigError("--horizon must be nonnegative");
    const fs::path dir(c.out_dir.empty() ? "." : c.out_dir);
    const json summary = io::read_json_file((dir / "summary.json").string());
    if (summary.contains("reduction")) throw ConfigError("summary comes from a reduced pipeline; validate is unsupported");
    if (summary.value("config_hash", std::string()) != config_hash(c))
      throw ConfigError("configuration does not match the synthesize outputs in '" + dir.string() + "'");
    const LtiModel& model = p.model_file.model;
    p.spec.validate(model.output_dim());
    const GridSpec gs = resolve_grid(c, model, p.model_file.grid);
    p.grid = build_grid(model, gs, true);
    const SimRelation rel = io::relation_from_json(io::read_json_file((dir / "relation.json").string()));
    const AbstractPolicy policy =
        io::read_policy((dir / "policy.csv").string(), p.grid.num_cells(), p.spec.dfa.num_states());
    const RobustLabeling lab = robust_labels(p.grid, model.C, p.spec.propositions, rel.epsilon);
    const GridTransitionSystem ts(p.grid);
    const Synthesis syn = robust_value_iteration(ts, p.spec.dfa, lab, rel.delta);

    json rows = json::array();
    bool all_pass = true;
    for (int cell : sampled_cells(p.grid.num_cells(), c.cells)) {
      const Eigen::VectorXd x0 = p.grid.representative(cell);
      std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                        static_cast<std::uint32_t>(cell)};
      Rng rng(seq);
      const double bound = initial_bound(syn.values, p.grid, p.spec.dfa, lab, x0);
      const ValidationResult v = monte_carlo_validate(model, p.grid, p.spec, policy, rel, x0, c.runs, c.horizon, rng);
      const bool pass = v.frequency >= bound - v.ci.half_width;
      all_pass = all_pass && pass;
      rows.push_back({{"cell", cell},
                      {"x0", io::vector_to_json(x0)},
                      {"bound", bound},
                      {"frequency", v.frequency},
                      {"ci_lo", v.ci.lo},
                      {"ci_hi", v.ci.hi},
                      {"half_width", v.ci.half_width},
                      {"runs", v.runs},
                      {"unresolved", v.unresolved},
                      {"runs_with_delta_event", v.runs_with_delta_event},
                      {"pass", pass}});
    }
    const json report{{"epsilon", rel.epsilon}, {"delta", rel.delta},   {"runs_per_cell", c.runs},
                      {"horizon", c.horizon},   {"seed", c.seed},       {"all_pass", all_pass},
                      {"cells", rows}};
    io::write_json_file((dir / "validation.json").string(), report);
    out << (all_pass ? "all cells pass" : "some cells fail") << '\n';
    return kExitOk;
  });
}

int cmd_reduce(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(c.model_path, "model");
    require_file(c.mor_path, "mor");
    check_deltas(c.deltas);
    const io::ModelFile mf = io::load_model(c.model_path);
    const io::ReducedFile rf = io::load_reduced(c.mor_path, mf.model);
    MorOptions mo = rf.options;
    mo.search = search_options(c);
    std::ostringstream csv;
    csv << "delta,epsilon,lambda_best,coupling_delta,delta_trunc,solve_time_ms\n" << std::setprecision(10);
    json relations = json::array();
    for (double d : c.deltas) {
      const auto start = Clock::now();
      csv << d << ',';
      try {
        const SimRelation rel = optimize_epsilon_mor(mf.model, rf.reduced, d, mo);
        csv << rel.epsilon << ',' << rel.lambda << ',' << rel.coupling_delta << ',' << rel.delta_trunc;
        relations.push_back(io::relation_to_json(rel));
      } catch (const InfeasibleError&) {
        csv << "infeasible,infeasible,infeasible,infeasible";
        relations.push_back(nullptr);
        err << "delta " << d << ": infeasible\n";
      }
      csv << ',' << std::fixed << std::setprecision(1) << (c.timing ? elapsed_ms(start) : 0.0) << std::defaultfloat
          << std::setprecision(10) << '\n';
    }
    if (c.out_dir.empty()) {
      out << csv.str();
    } else {
      const fs::path dir = output_dir(c);
      write_text(dir / "reduction.csv", csv.str());
      io::write_json_file((dir / "reduction.json").string(), relations);
    }
    return kExitOk;
  });
}

}  // namespace ccsim::pipeline

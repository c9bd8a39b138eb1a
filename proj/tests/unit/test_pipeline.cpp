#include "ccsim/pipeline.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ccsim;
using namespace ccsim::pipeline;
namespace fs = std::filesystem;

namespace {

const std::string kData = CCSIM_DATA_DIR;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ccsim_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig parking_config(const fs::path& out) {
  RunConfig c;
  c.model_path = kData + "/parking1d.json";
  c.spec_path = kData + "/parking1d_spec.json";
  c.deltas = {0.012};
  c.lambda_steps = 19;
  c.out_dir = out.string();
  c.timing = false;
  return c;
}

}  // namespace

TEST_CASE("quantify with an empty delta list writes only the header") {
  RunConfig c;
  c.model_path = kData + "/parking1d.json";
  std::ostringstream out, err;
  CHECK(cmd_quantify(c, out, err) == kExitOk);
  CHECK(out.str() == "delta,epsilon,lambda_best,solve_time_ms\n");
}

TEST_CASE("quantify 1D parking") {
  RunConfig c;
  c.model_path = kData + "/parking1d.json";
  c.deltas = {0.0, 0.012, 0.018};
  c.lambda_steps = 19;
  c.timing = false;
  std::ostringstream out, err;
  REQUIRE(cmd_quantify(c, out, err) == kExitOk);
  std::istringstream is(out.str());
  std::string line;
  std::getline(is, line);
  const double expected[] = {0.5, 0.1992, 0.05};
  for (double e : expected) {
    REQUIRE(std::getline(is, line));
    std::istringstream ls(line);
    std::string d, eps;
    std::getline(ls, d, ',');
    std::getline(ls, eps, ',');
    CHECK(std::stod(eps) == doctest::Approx(e).epsilon(0.01));
  }
}

TEST_CASE("infeasible rows are marked and the run continues") {
  const fs::path dir = scratch("unstable");
  fs::create_directories(dir);
  std::ofstream(dir / "model.json") << R"({"A": 1.5, "B": 0.5, "Bw": 1, "C": 1,
    "state_box": {"lo": [-10], "hi": [10]}, "input_box": {"lo": [-1], "hi": [1]},
    "grid": {"cells_per_axis": [20]}})";
  RunConfig c;
  c.model_path = (dir / "model.json").string();
  c.deltas = {0.0};
  c.lambda_steps = 5;
  c.timing = false;
  std::ostringstream out, err;
  CHECK(cmd_quantify(c, out, err) == kExitOk);
  CHECK(out.str().find("0,infeasible,infeasible,0.0") != std::string::npos);
  CHECK(err.str().find("infeasible") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("configuration errors map to exit code 3") {
  std::ostringstream out, err;
  RunConfig c = parking_config(scratch("errors"));
  c.spec_path = kData + "/does_not_exist.json";
  CHECK(cmd_synthesize(c, out, err) == kExitConfig);
  CHECK(err.str().find("not found") != std::string::npos);
  c = parking_config(scratch("errors"));
  c.deltas = {1.5};
  CHECK(cmd_synthesize(c, out, err) == kExitConfig);
  c = parking_config(scratch("errors"));
  c.grid = "abc";
  CHECK(cmd_quantify(c, out, err) == kExitConfig);
  RunConfig none;
  CHECK(cmd_quantify(none, out, err) == kExitConfig);
}

TEST_CASE("synthesize is deterministic and validate checks the hash") {
  const fs::path a = scratch("synth_a");
  const fs::path b = scratch("synth_b");
  std::ostringstream out, err;
  REQUIRE(cmd_synthesize(parking_config(a), out, err) == kExitOk);
  REQUIRE(cmd_synthesize(parking_config(b), out, err) == kExitOk);
  for (const char* f : {"values.csv", "policy.csv", "summary.json", "relation.json"}) {
    CAPTURE(f);
    CHECK(read_file(a / f) == read_file(b / f));
  }
  const auto summary = io::read_json_file((a / "summary.json").string());
  CHECK(summary.at("epsilon").get<double>() == doctest::Approx(0.1992).epsilon(0.01));
  CHECK(summary.at("state_count").get<int>() == 603);

  RunConfig v = parking_config(a);
  v.runs = 500;
  v.cells = 5;
  v.seed = 3;
  REQUIRE(cmd_validate(v, out, err) == kExitOk);
  const auto report = io::read_json_file((a / "validation.json").string());
  CHECK(report.at("cells").size() == 5);
  const std::string first = read_file(a / "validation.json");
  REQUIRE(cmd_validate(v, out, err) == kExitOk);
  CHECK(read_file(a / "validation.json") == first);

  RunConfig mismatch = v;
  mismatch.deltas = {0.018};
  CHECK(cmd_validate(mismatch, out, err) == kExitConfig);
  RunConfig empty = v;
  empty.runs = 0;
  CHECK(cmd_validate(empty, out, err) == kExitConfig);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("reduced pipeline reports the composed relation") {
  const fs::path dir = scratch("mor");
  RunConfig c;
  c.model_path = kData + "/mor2d.json";
  c.mor_path = kData + "/mor2d_reduced.json";
  c.spec_path = kData + "/mor_spec.json";
  c.deltas = {0.012};
  c.lambda_steps = 9;
  c.out_dir = dir.string();
  c.timing = false;
  std::ostringstream out, err;
  REQUIRE_MESSAGE(cmd_synthesize(c, out, err) == kExitOk, err.str());
  const auto s = io::read_json_file((dir / "summary.json").string());
  REQUIRE(s.contains("composed"));
  const double e_abs = s.at("abstraction_epsilon").get<double>();
  const double e_red = s.at("reduction").at("epsilon").get<double>();
  CHECK(s.at("composed").at("epsilon").get<double>() == e_abs + e_red);

  RunConfig r = c;
  r.deltas = {0.01, 0.05};
  r.out_dir.clear();
  std::ostringstream csv;
  REQUIRE(cmd_reduce(r, csv, err) == kExitOk);
  CHECK(csv.str().rfind("delta,epsilon,lambda_best,coupling_delta,delta_trunc,solve_time_ms\n", 0) == 0);
  fs::remove_all(dir);
}

#ifdef CCSIM_CLI
TEST_CASE("command-line exit codes") {
  const std::string cli = CCSIM_CLI;
  const std::string quiet = " > /dev/null 2>&1";
  auto status = [](int raw) { return WEXITSTATUS(raw); };
  CHECK(status(std::system((cli + " quantify --model " + kData + "/parking1d.json --delta 0 --lambda-steps 5" + quiet).c_str())) == 0);
  CHECK(status(std::system((cli + " synthesize --model " + kData + "/parking1d.json --spec /nonexistent.json --out /tmp/ccsim_cli" + quiet).c_str())) == 3);
  CHECK(status(std::system((cli + " frobnicate" + quiet).c_str())) == 3);
  CHECK(status(std::system((cli + " --help" + quiet).c_str())) == 0);
}
#endif

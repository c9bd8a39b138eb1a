#include "ccsim/coupling.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/io.hpp"
#include "ccsim/mor.hpp"
#include "ccsim/pipeline.hpp"
#include "ccsim/simrel.hpp"
#include "ccsim/spec.hpp"
#include "ccsim/synthesis.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ccsim;

namespace {

EpsilonSearchOptions options_for(int lambda_steps) {
  EpsilonSearchOptions o;
  o.lambdas = lambda_grid(lambda_steps);
  return o;
}

// Runs a CLI subcommand and returns (exit code, stdout, stderr).
template <class Fn>
py::tuple run_command(Fn fn, const pipeline::RunConfig& config) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = fn(config, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_ccsim, m) {
  m.doc() = "Coupling-based (epsilon, delta) simulation relations for stochastic LTI systems";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

  py::class_<Box>(m, "Box")
      .def(py::init<>())
      .def(py::init([](Eigen::VectorXd lo, Eigen::VectorXd hi) { return Box{std::move(lo), std::move(hi)}; }),
           py::arg("lo"), py::arg("hi"))
      .def_readwrite("lo", &Box::lo)
      .def_readwrite("hi", &Box::hi);

  py::class_<LtiModel>(m, "LtiModel")
      .def(py::init<>())
      .def(py::init([](Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd Bw, Eigen::MatrixXd C, Box state_box,
                       Box input_box) {
             LtiModel model{std::move(A), std::move(B), std::move(Bw), std::move(C), std::move(state_box),
                            std::move(input_box)};
             model.validate();
             return model;
           }),
           py::arg("A"), py::arg("B"), py::arg("Bw"), py::arg("C"), py::arg("state_box"), py::arg("input_box"))
      .def_readwrite("A", &LtiModel::A)
      .def_readwrite("B", &LtiModel::B)
      .def_readwrite("Bw", &LtiModel::Bw)
      .def_readwrite("C", &LtiModel::C)
      .def_readwrite("state_box", &LtiModel::state_box)
      .def_readwrite("input_box", &LtiModel::input_box)
      .def("step", &LtiModel::step, py::arg("x"), py::arg("u"), py::arg("w"));

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def(py::init([](std::vector<int> cells, std::vector<Eigen::VectorXd> inputs) {
             return GridSpec{std::move(cells), std::move(inputs)};
           }),
           py::arg("cells_per_axis"), py::arg("input_samples"))
      .def_readwrite("cells_per_axis", &GridSpec::cells_per_axis)
      .def_readwrite("input_samples", &GridSpec::input_samples);

  py::class_<GridAbstraction>(m, "GridAbstraction")
      .def("num_cells", &GridAbstraction::num_cells)
      .def("num_inputs", &GridAbstraction::num_inputs)
      .def("project", &GridAbstraction::project, py::arg("x"))
      .def("representative", &GridAbstraction::representative, py::arg("cell"))
      .def("beta_vertices", &GridAbstraction::beta_vertices);

  m.def("build_grid", &build_grid, py::arg("model"), py::arg("spec"), py::arg("with_kernel") = true);

  py::enum_<RelationKind>(m, "RelationKind")
      .value("finite_abstraction", RelationKind::finite_abstraction)
      .value("model_order_reduction", RelationKind::model_order_reduction);

  py::class_<SimRelation>(m, "SimRelation")
      .def(py::init<>())
      .def_readwrite("epsilon", &SimRelation::epsilon)
      .def_readwrite("delta", &SimRelation::delta)
      .def_readwrite("D", &SimRelation::D)
      .def_readwrite("F", &SimRelation::F)
      .def_readwrite("K", &SimRelation::K)
      .def_readwrite("lambda_", &SimRelation::lambda)
      .def_readwrite("kind", &SimRelation::kind)
      .def_readwrite("radius", &SimRelation::radius)
      .def_readwrite("feedback_bound", &SimRelation::feedback_bound)
      .def_readwrite("coupling_delta", &SimRelation::coupling_delta)
      .def_readwrite("delta_trunc", &SimRelation::delta_trunc)
      .def("__repr__", [](const SimRelation& r) {
        std::ostringstream s;
        s << "SimRelation(epsilon=" << r.epsilon << ", delta=" << r.delta << ", lambda=" << r.lambda << ")";
        return s.str();
      });

  py::class_<VerificationReport>(m, "VerificationReport")
      .def_property_readonly("passed", &VerificationReport::passed)
      .def_property_readonly("worst_margin", &VerificationReport::worst_margin)
      .def("summary", &VerificationReport::summary);

  m.def("delta_from_gamma_norm", &delta_from_gamma_norm, py::arg("gamma_norm"));
  m.def("radius_from_delta", &radius_from_delta, py::arg("delta"));
  m.def(
      "sample_coupling",
      [](const Eigen::VectorXd& gamma, int n, std::uint64_t seed) {
        Rng rng(seed);
        Eigen::MatrixXd w_hat(n, gamma.size()), w(n, gamma.size());
        std::vector<bool> hit(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          const CoupledNoise c = sample_maximal_coupling(gamma, rng);
          w_hat.row(i) = c.w_hat.transpose();
          w.row(i) = c.w.transpose();
          hit[static_cast<std::size_t>(i)] = c.hit;
        }
        return py::make_tuple(w_hat, w, hit);
      },
      py::arg("gamma"), py::arg("n"), py::arg("seed") = 0,
      "Draws n pairs (w_hat, w) from the maximal coupling; returns (w_hat, w, hit).");

  m.def(
      "optimize_epsilon",
      [](const LtiModel& model, const std::vector<Eigen::VectorXd>& betas, double delta, int lambda_steps) {
        py::gil_scoped_release release;
        return optimize_epsilon(model, betas, delta, options_for(lambda_steps));
      },
      py::arg("model"), py::arg("beta_vertices"), py::arg("delta"), py::arg("lambda_steps") = 99);
  m.def("verify_relation", &verify_relation, py::arg("model"), py::arg("beta_vertices"), py::arg("relation"),
        py::arg("tolerance") = 1e-8);
  m.def("scalar_oracle", &scalar_oracle, py::arg("a"), py::arg("b_w"), py::arg("beta_max"), py::arg("r"));
  m.def("compose_transitive", &compose_transitive, py::arg("abstraction"), py::arg("reduction"));
  m.def(
      "quantify",
      [](const LtiModel& model, const std::vector<Eigen::VectorXd>& betas, const std::vector<double>& deltas,
         int lambda_steps) {
        std::vector<pipeline::QuantifyRow> rows;
        {
          py::gil_scoped_release release;
          rows = pipeline::quantify(model, betas, deltas, options_for(lambda_steps));
        }
        py::list out;
        for (const auto& r : rows)
          out.append(py::make_tuple(r.delta, r.epsilon ? py::cast(*r.epsilon) : py::none(), r.lambda));
        return out;
      },
      py::arg("model"), py::arg("beta_vertices"), py::arg("deltas"), py::arg("lambda_steps") = 99,
      "Returns (delta, epsilon or None, lambda) for each delta.");

  m.def(
      "load_model",
      [](const std::string& path) {
        const io::ModelFile f = io::load_model(path);
        return py::make_tuple(f.model, f.grid ? py::cast(*f.grid) : py::none());
      },
      py::arg("path"), "Returns (model, grid spec or None).");

  py::class_<pipeline::RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("model_path", &pipeline::RunConfig::model_path)
      .def_readwrite("grid", &pipeline::RunConfig::grid)
      .def_readwrite("spec_path", &pipeline::RunConfig::spec_path)
      .def_readwrite("deltas", &pipeline::RunConfig::deltas)
      .def_readwrite("lambda_steps", &pipeline::RunConfig::lambda_steps)
      .def_readwrite("seed", &pipeline::RunConfig::seed)
      .def_readwrite("out_dir", &pipeline::RunConfig::out_dir)
      .def_readwrite("mor_path", &pipeline::RunConfig::mor_path)
      .def_readwrite("runs", &pipeline::RunConfig::runs)
      .def_readwrite("horizon", &pipeline::RunConfig::horizon)
      .def_readwrite("cells", &pipeline::RunConfig::cells)
      .def_readwrite("timing", &pipeline::RunConfig::timing);

  m.def("cmd_quantify", [](const pipeline::RunConfig& c) { return run_command(pipeline::cmd_quantify, c); });
  m.def("cmd_synthesize", [](const pipeline::RunConfig& c) { return run_command(pipeline::cmd_synthesize, c); });
  m.def("cmd_validate", [](const pipeline::RunConfig& c) { return run_command(pipeline::cmd_validate, c); });
  m.def("cmd_reduce", [](const pipeline::RunConfig& c) { return run_command(pipeline::cmd_reduce, c); });
}

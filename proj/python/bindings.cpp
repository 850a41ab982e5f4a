#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "usc/cli.hpp"
#include "usc/errors.hpp"
#include "usc/experts.hpp"
#include "usc/geometry.hpp"
#include "usc/harness/bounds.hpp"
#include "usc/harness/config.hpp"
#include "usc/harness/experiment.hpp"
#include "usc/harness/trace.hpp"
#include "usc/meta.hpp"

namespace py = pybind11;
using namespace usc;

namespace {

py::dict TraceSummary(const harness::RunTrace& tr) {
  py::dict d;
  d["stream_class"] = ToString(tr.stream_class);
  d["horizon"] = tr.rounds();
  d["num_experts"] = tr.num_experts();
  d["comparator_loss"] = tr.comparator_loss;
  d["x_star"] = tr.x_star;
  d["usc_regret"] = tr.UscRegret();
  d["usc_loss"] = tr.usc_loss;
  d["regret_curve"] = tr.UscCumulativeRegretCurve();
  d["weights"] = tr.expert_weight;
  py::list experts;
  for (size_t i = 0; i < tr.num_experts(); ++i) {
    py::dict e;
    e["name"] = tr.experts[i].name;
    e["class"] = ToString(tr.experts[i].expert_class);
    e["parameter"] = tr.experts[i].parameter;
    e["regret"] = tr.ExpertRegret(i);
    experts.append(e);
  }
  d["experts"] = experts;
  return d;
}

py::dict ReportDict(const harness::BoundReport& r) {
  py::dict d;
  d["all_pass"] = r.AllPass();
  py::list checks;
  for (const auto& c : r.checks) {
    py::dict e;
    e["name"] = c.name;
    e["lhs"] = c.lhs;
    e["rhs"] = c.rhs;
    e["pass"] = c.pass;
    e["skipped"] = c.skipped;
    checks.append(e);
  }
  d["checks"] = checks;
  d["warnings"] = r.warnings;
  d["text"] = r.Format();
  return d;
}

}  // namespace

PYBIND11_MODULE(_usc, m) {
  m.doc() = "Universal online convex optimization core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<FeasibleSet>(m, "FeasibleSet")
      .def_static("ball", [](const Vector& c, double r) { return FeasibleSet::MakeBall(c, r); }, py::arg("center"),
                  py::arg("radius"))
      .def_static("box", [](const Vector& lo, const Vector& hi) { return FeasibleSet::MakeBox(lo, hi); },
                  py::arg("lower"), py::arg("upper"))
      .def_property_readonly("dim", &FeasibleSet::dim)
      .def_property_readonly("diameter", &FeasibleSet::diameter)
      .def_property_readonly("center", [](const FeasibleSet& s) { return Vector(s.center()); })
      .def("contains", &FeasibleSet::Contains, py::arg("x"), py::arg("tol") = FeasibleSet::kMembershipTolerance)
      .def("project", [](const FeasibleSet& s, const Vector& p) { return Project(s, p); })
      .def("generalized_project",
           [](const FeasibleSet& s, const Vector& p, const Matrix& metric) { return GeneralizedProject(s, p, metric); });

  m.def("gamma_constant", &GammaConstant, py::arg("num_experts"), py::arg("horizon"));
  m.def("build_grid", [](long horizon) { return BuildGrid(horizon).values; }, py::arg("horizon"));
  m.def("select_grid", [](long horizon, double p) { return BuildGrid(horizon).SelectAtMost(p); }, py::arg("horizon"),
        py::arg("parameter"));
  m.def("normalized_expert_loss", &NormalizedExpertLoss, py::arg("gradient"), py::arg("expert_point"),
        py::arg("anchor"), py::arg("grad_bound"), py::arg("diameter"));

  py::class_<AdaptMlProd>(m, "AdaptMlProd")
      .def(py::init<long, double, double, Vector>(), py::arg("num_experts"), py::arg("grad_bound"),
           py::arg("diameter"), py::arg("anchor"))
      .def("weights", &AdaptMlProd::Weights)
      .def("update",
           [](AdaptMlProd& a, const Vector& g, const std::vector<Vector>& points, const Vector& aggregate) {
             const MetaRoundLosses r = a.Update(g, points, aggregate);
             return py::make_tuple(r.expert_losses, r.meta_loss);
           })
      .def_property_readonly("learning_rates", &AdaptMlProd::learning_rates)
      .def_property_readonly("round", &AdaptMlProd::round);

  m.def(
      "run_experiment",
      [](const std::string& config_text, py::object seed, py::object horizon) {
        harness::ExperimentConfig cfg = harness::ParseConfig(config_text, "<python>");
        if (!seed.is_none()) cfg.stream.seed = seed.cast<std::uint64_t>();
        if (!horizon.is_none()) cfg.stream.horizon = horizon.cast<long>();
        const harness::RunTrace tr = harness::RunExperiment(cfg, ExpertRegistry::WithBuiltins());
        py::dict d = TraceSummary(tr);
        d["report"] = ReportDict(harness::VerifyBounds(tr));
        return d;
      },
      py::arg("config_text"), py::arg("seed") = py::none(), py::arg("horizon") = py::none());
  m.def(
      "verify_trace",
      [](const std::string& dir, bool strict) { return ReportDict(harness::VerifyBounds(harness::ReadTrace(dir), {strict})); },
      py::arg("trace_dir"), py::arg("strict") = false);
  m.def("cli_main", [](std::vector<std::string> args) {
    args.insert(args.begin(), "usc");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return CliMain(static_cast<int>(argv.size()), argv.data());
  });
}

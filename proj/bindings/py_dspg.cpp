// Python bindings for the simulator core. Vectors cross the boundary as
// numpy arrays via the Eigen casters; experiment configs are parsed from the
// same text format the CLI reads.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dspg/consensus.hpp"
#include "dspg/estimator.hpp"
#include "dspg/network.hpp"
#include "dspg/runtime.hpp"
#include "dspg/sweep.hpp"

namespace py = pybind11;
using namespace dspg;

namespace {

StepSchedule make_schedule(const std::string& kind, double gamma0, std::int64_t switch_tick,
                           double a, double b, bool offset_at_switch) {
  StepSchedule schedule;
  if (kind == "constant") {
    schedule.kind = ScheduleKind::kConstant;
  } else if (kind == "diminishing") {
    schedule.kind = ScheduleKind::kDiminishing;
  } else if (kind == "hybrid") {
    schedule.kind = ScheduleKind::kHybrid;
  } else {
    throw ConfigError({"schedule kind must be constant, diminishing or hybrid"});
  }
  schedule.gamma0 = gamma0;
  schedule.switch_tick = switch_tick;
  schedule.a = a;
  schedule.b = b;
  schedule.offset_at_switch = offset_at_switch;
  schedule.validate();
  return schedule;
}

ActivationPolicy make_activation(const std::string& kind, double p_active) {
  ActivationPolicy policy;
  if (kind == "all-active") {
    policy.kind = ActivationKind::kAllActive;
  } else if (kind == "bernoulli") {
    policy.kind = ActivationKind::kBernoulli;
    policy.p_active = p_active;
  } else if (kind == "round-robin") {
    policy.kind = ActivationKind::kRoundRobin;
  } else {
    throw ConfigError({"activation must be all-active, bernoulli or round-robin"});
  }
  policy.validate();
  return policy;
}

py::dict trace_to_dict(const Trace& trace) {
  const auto n = static_cast<Eigen::Index>(trace.records.size());
  Eigen::VectorXd ticks(n), norms(n), stale(n), gamma0(n), compound(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const TraceRecord& row = trace.records[static_cast<std::size_t>(r)];
    ticks[r] = static_cast<double>(row.tick);
    norms[r] = row.norm;
    stale[r] = row.staleness_error.mean();
    gamma0[r] = row.gamma[0];
    compound[r] = row.mean_compound_staleness;
  }
  py::dict out;
  out["tick"] = ticks;
  out["norm"] = norms;
  out["staleness_err_mean"] = stale;
  out["gamma_agent_0"] = gamma0;
  out["mean_compound_staleness"] = compound;
  return out;
}

py::dict result_to_dict(const SimulationResult& result) {
  py::dict out;
  out["final_estimate"] = result.final_estimate;
  out["status"] = result.status == RunStatus::kOk ? "ok" : "diverged";
  out["local_clocks"] = result.local_clocks;
  out["total_updates"] = result.total_updates;
  out["trace"] = trace_to_dict(result.trace);
  return out;
}

}  // namespace

PYBIND11_MODULE(_dspg, m) {
  m.doc() = "Decentralized two-measurement gradient descent over erasure channels";

  // Translators run newest-first, so the base error registers before the
  // derived ones.
  py::register_exception<Error>(m, "DspgError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalOverflowError>(m, "NumericalOverflowError",
                                                 PyExc_ArithmeticError);

  py::class_<QuadraticSpec>(m, "QuadraticSpec")
      .def_property_readonly("dimension", &QuadraticSpec::dimension)
      .def_readonly("generation_seed", &QuadraticSpec::generation_seed)
      .def_property_readonly("matrices",
                             [](const QuadraticSpec& spec) { return spec.matrices; })
      .def_property_readonly("shifts", [](const QuadraticSpec& spec) { return spec.shifts; })
      .def("to_objective_set", &QuadraticSpec::to_objective_set);

  py::class_<ObjectiveSet>(m, "ObjectiveSet")
      .def_property_readonly("dimension", &ObjectiveSet::dimension)
      .def("evaluate", &ObjectiveSet::evaluate, py::arg("agent"), py::arg("x"))
      .def("has_gradient", &ObjectiveSet::has_gradient, py::arg("agent"))
      .def("analytic_gradient", &ObjectiveSet::analytic_gradient, py::arg("agent"),
           py::arg("x"));

  m.def(
      "make_quadratic_spec",
      [](int d, std::uint64_t seed, std::optional<Vector> x_star) {
        return x_star ? make_quadratic_set(d, seed, *x_star) : make_quadratic_set(d, seed);
      },
      py::arg("d"), py::arg("seed"), py::arg("x_star") = std::nullopt);
  m.def(
      "make_quadratic_set",
      [](int d, std::uint64_t seed, std::optional<Vector> x_star) {
        const QuadraticSpec spec =
            x_star ? make_quadratic_set(d, seed, *x_star) : make_quadratic_set(d, seed);
        return spec.to_objective_set();
      },
      py::arg("d"), py::arg("seed"), py::arg("x_star") = std::nullopt);
  m.def("make_quartic_1d", &make_quartic_1d);

  m.def(
      "sample_perturbation",
      [](std::uint64_t seed, int d) {
        Rng rng(seed);
        return sample_perturbation(rng, d).signs;
      },
      py::arg("seed"), py::arg("d"), "One perturbation vector from a fresh stream");

  m.def(
      "dspg_estimate",
      [](const ObjectiveSet& obj, int agent, const Vector& view, const Vector& signs,
         double c) {
        PerturbationVector delta{signs};
        return dspg_estimate(obj, agent, view, delta, c);
      },
      py::arg("objectives"), py::arg("agent"), py::arg("view"), py::arg("signs"),
      py::arg("c"));

  py::class_<EstimatorDiagnostics>(m, "EstimatorDiagnostics")
      .def_readonly("mean", &EstimatorDiagnostics::mean)
      .def_readonly("variance", &EstimatorDiagnostics::variance)
      .def_readonly("true_gradient", &EstimatorDiagnostics::true_gradient)
      .def_readonly("bias", &EstimatorDiagnostics::bias);

  m.def("enumerate_diagnostics", &enumerate_diagnostics, py::arg("objectives"),
        py::arg("agent"), py::arg("x"), py::arg("c"));
  m.def("variance_bound", &variance_bound, py::arg("objectives"), py::arg("agent"),
        py::arg("x"));
  m.def("consensus_minimizer", &consensus_minimizer, py::arg("spec"),
        "argmin of the summed quadratic family via a direct linear solve");

  m.def(
      "run_simulation",
      [](const ObjectiveSet& objectives, double c, double p_success, std::int64_t iterations,
         std::uint64_t master_seed, const std::string& schedule, double gamma0,
         std::int64_t switch_tick, double a, double b, bool offset_at_switch,
         int subsample_stride, std::optional<Vector> init, const std::string& activation,
         double p_active) {
        SimulationParams params;
        params.objectives = objectives;
        params.c = SimulationParams::common_c(objectives.dimension(), c);
        params.channel.p_success = p_success;
        params.schedule = make_schedule(schedule, gamma0, switch_tick, a, b, offset_at_switch);
        params.activation = make_activation(activation, p_active);
        params.iterations = iterations;
        params.master_seed = master_seed;
        params.subsample_stride = subsample_stride;
        params.init = std::move(init);
        return result_to_dict(run_simulation(params));
      },
      py::arg("objectives"), py::arg("c"), py::arg("p_success"), py::arg("iterations"),
      py::arg("master_seed"), py::arg("schedule") = "constant", py::arg("gamma0") = 0.001,
      py::arg("switch_tick") = 5000, py::arg("a") = 1.0, py::arg("b") = 100.0,
      py::arg("offset_at_switch") = true, py::arg("subsample_stride") = 1,
      py::arg("init") = std::nullopt, py::arg("activation") = "all-active",
      py::arg("p_active") = 1.0);

  m.def(
      "run_consensus",
      [](const ObjectiveSet& objectives, double c, double p_success, std::int64_t iterations,
         std::uint64_t master_seed, const std::string& schedule, double gamma0,
         std::int64_t switch_tick, double a, double b, bool offset_at_switch,
         int subsample_stride, std::optional<Vector> init, bool deterministic_mean) {
        ConsensusParams params;
        params.base.objectives = objectives;
        params.base.c = SimulationParams::common_c(objectives.dimension(), c);
        params.base.channel.p_success = p_success;
        params.base.schedule =
            make_schedule(schedule, gamma0, switch_tick, a, b, offset_at_switch);
        params.base.iterations = iterations;
        params.base.master_seed = master_seed;
        params.base.subsample_stride = subsample_stride;
        params.base.init = std::move(init);
        params.deterministic_mean = deterministic_mean;
        return result_to_dict(run_consensus(params));
      },
      py::arg("objectives"), py::arg("c"), py::arg("p_success"), py::arg("iterations"),
      py::arg("master_seed"), py::arg("schedule") = "constant", py::arg("gamma0") = 0.001,
      py::arg("switch_tick") = 5000, py::arg("a") = 1.0, py::arg("b") = 100.0,
      py::arg("offset_at_switch") = true, py::arg("subsample_stride") = 1,
      py::arg("init") = std::nullopt, py::arg("deterministic_mean") = false);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config_file", &load_config_file, py::arg("path"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("d", &ExperimentConfig::d)
      .def_readonly("c_values", &ExperimentConfig::c_values)
      .def_readonly("p_values", &ExperimentConfig::p_values)
      .def_readonly("iterations", &ExperimentConfig::iterations)
      .def_readonly("trials", &ExperimentConfig::trials)
      .def_readonly("master_seed", &ExperimentConfig::master_seed)
      .def_readonly("output_path", &ExperimentConfig::output_path);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("c", &SweepRow::c)
      .def_readonly("p_c", &SweepRow::p_c)
      .def_readonly("mean_final_norm", &SweepRow::mean_final_norm)
      .def_readonly("std_final_norm", &SweepRow::std_final_norm)
      .def_readonly("diverged_count", &SweepRow::diverged_count)
      .def_readonly("trials", &SweepRow::trials)
      .def("__repr__", [](const SweepRow& row) {
        return "SweepRow(c=" + format_double(row.c) + ", p_c=" + format_double(row.p_c) +
               ", mean_final_norm=" + format_double(row.mean_final_norm) + ")";
      });

  m.def(
      "run_sweep",
      [](const ExperimentConfig& config, const std::string& out_dir, int parallel,
         bool verbose, bool write_files) {
        SweepOptions options;
        options.out_dir = out_dir;
        options.parallel = parallel;
        options.verbose = verbose;
        options.write_files = write_files;
        const SweepSummary summary = run_sweep(config, options);
        py::list rows;
        for (const auto& row : summary.rows) rows.append(row);
        return rows;
      },
      py::arg("config"), py::arg("out_dir") = "out", py::arg("parallel") = 1,
      py::arg("verbose") = false, py::arg("write_files") = true);

  m.def(
      "run_diagnostics",
      [](const ExperimentConfig& config, const std::string& out_dir) {
        SweepOptions options;
        options.out_dir = out_dir;
        run_diagnostics(config, options);
      },
      py::arg("config"), py::arg("out_dir") = "out");
}

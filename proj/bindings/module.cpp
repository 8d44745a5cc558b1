#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pneutop/gradcheck.hpp"
#include "pneutop/io.hpp"
#include "pneutop/optimizer.hpp"

namespace py = pybind11;
using namespace pneutop;

PYBIND11_MODULE(_pneutop, m) {
    m.doc() = "Pressure-driven compliant mechanism topology optimization";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ModelError>(m, "ModelError");
    py::register_exception<SolverError>(m, "SolverError");

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("lx", &RunConfig::lx)
        .def_readwrite("ly", &RunConfig::ly)
        .def_readwrite("nex", &RunConfig::nex)
        .def_readwrite("ney", &RunConfig::ney)
        .def_readwrite("thickness", &RunConfig::thickness)
        .def_readwrite("pressure_in", &RunConfig::pressure_in)
        .def_readwrite("spring_kss", &RunConfig::spring_kss)
        .def_readwrite("e1", &RunConfig::e1)
        .def_readwrite("e0_ratio", &RunConfig::e0_ratio)
        .def_readwrite("nu", &RunConfig::nu)
        .def_readwrite("chi", &RunConfig::chi)
        .def_readwrite("flow_contrast", &RunConfig::flow_contrast)
        .def_readwrite("delta_eta", &RunConfig::delta_eta)
        .def_readwrite("beta_start", &RunConfig::beta_start)
        .def_readwrite("beta_max", &RunConfig::beta_max)
        .def_readwrite("beta_period", &RunConfig::beta_period)
        .def_readwrite("volume_target", &RunConfig::volume_target)
        .def_readwrite("volume_update_period", &RunConfig::volume_update_period)
        .def_readwrite("mma_move_limit", &RunConfig::mma_move_limit)
        .def_readwrite("mma_max_iters", &RunConfig::mma_max_iters)
        .def_readwrite("early_exit", &RunConfig::early_exit)
        .def_readwrite("filter_radius_factor", &RunConfig::filter_radius_factor)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def("validate", &RunConfig::validate);

    py::class_<ProblemModel>(m, "ProblemModel")
        .def_property_readonly("num_elems",
                               [](const ProblemModel& p) { return p.mesh.num_elems(); })
        .def_property_readonly("num_nodes",
                               [](const ProblemModel& p) { return p.mesh.num_nodes(); })
        .def_property_readonly("num_design_vars", &ProblemModel::num_design_vars)
        .def_property_readonly("output_node",
                               [](const ProblemModel& p) { return p.tags.output_node; })
        .def_property_readonly("passive_elems",
                               [](const ProblemModel& p) { return p.tags.passive_elems; });

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("iteration", &IterationRecord::iteration)
        .def_readonly("f0", &IterationRecord::f0)
        .def_readonly("volume", &IterationRecord::volume)
        .def_readonly("beta", &IterationRecord::beta)
        .def_readonly("mnd_intermediate", &IterationRecord::mnd_intermediate)
        .def_readonly("max_change", &IterationRecord::max_change);

    py::class_<OptimizationResult>(m, "OptimizationResult")
        .def_readonly("rho", &OptimizationResult::rho)
        .def_readonly("scale", &OptimizationResult::scale)
        .def_readonly("final_f0", &OptimizationResult::final_f0)
        .def_readonly("output_displacement", &OptimizationResult::output_displacement)
        .def_readonly("iterations", &OptimizationResult::iterations)
        .def_readonly("history", &OptimizationResult::history)
        .def_property_readonly("eroded",
                               [](const OptimizationResult& r) { return r.fields.eroded; })
        .def_property_readonly("intermediate",
                               [](const OptimizationResult& r) { return r.fields.intermediate; })
        .def_property_readonly("dilated",
                               [](const OptimizationResult& r) { return r.fields.dilated; });

    m.def("parse_config", &parse_config, py::arg("path"));
    m.def("build_model", &build_model, py::arg("config"));
    m.def("project", py::overload_cast<double, double, double>(&project),
          py::arg("rho_tilde"), py::arg("beta"), py::arg("eta"));
    m.def("project_derivative",
          py::overload_cast<double, double, double>(&project_derivative),
          py::arg("rho_tilde"), py::arg("beta"), py::arg("eta"));
    m.def("smooth_step", &smooth_step, py::arg("rho"), py::arg("beta"), py::arg("eta"));
    m.def(
        "flow_coefficient",
        [](double rho_bar, double kv, double contrast, double eta_k, double beta_k) {
            FlowParams p;
            p.kv = kv;
            p.contrast = contrast;
            p.eta_k = eta_k;
            p.beta_k = beta_k;
            return flow_coefficient(rho_bar, p);
        },
        py::arg("rho_bar"), py::arg("kv") = 1.0, py::arg("contrast") = 1e-7,
        py::arg("eta_k") = 0.2, py::arg("beta_k") = 10.0);
    m.def(
        "simp_modulus",
        [](double rho_bar, double e1, double e0, double chi) {
            return simp_modulus(rho_bar, {e1, e0, 0.4, chi});
        },
        py::arg("rho_bar"), py::arg("e1") = 100e6, py::arg("e0") = 100.0, py::arg("chi") = 3.0);
    m.def("discreteness", &discreteness, py::arg("rho_bar"));
    m.def(
        "apply_filter",
        [](const ProblemModel& model, const Vector& rho) {
            return FilterOperator(model.mesh, model.config.filter_radius()).apply(rho);
        },
        py::arg("model"), py::arg("rho"));
    m.def(
        "solve_intermediate",
        [](const ProblemModel& model, const Vector& rho, double beta) {
            const auto eval = evaluate_realization(model, rho, beta, 1, 1.0, false);
            return py::make_tuple(eval.objective.mse, eval.objective.se,
                                  eval.output_displacement);
        },
        py::arg("model"), py::arg("rho"), py::arg("beta"),
        "Full pipeline on the intermediate field; returns (MSE, SE, output displacement).");
    m.def(
        "check_gradients",
        [](const ProblemModel& model, unsigned seed) {
            GradientCheckOptions opts;
            opts.seed = seed;
            const auto rep = check_gradients(model, opts);
            return py::make_tuple(rep.passed, rep.max_rel_error);
        },
        py::arg("model"), py::arg("seed") = 42);
    m.def("run_optimization", &run_optimization, py::arg("model"),
          py::arg("observer") = nullptr,
          py::call_guard<py::gil_scoped_release>());
}

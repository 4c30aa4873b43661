#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "niforge/lqg.hpp"
#include "niforge/nearest_ni.hpp"
#include "niforge/ni_analysis.hpp"
#include "niforge/ph_form.hpp"
#include "niforge/state_space.hpp"

namespace py = pybind11;
using namespace niforge;

PYBIND11_MODULE(_niforge, m) {
    m.doc() = "Nearest negative-imaginary systems: PH-parameterized projected "
              "gradient solver, NI analysis, and LQG synthesis";

    py::register_exception<EvaluationAtPoleError>(m, "EvaluationAtPoleError");
    py::register_exception<RiccatiError>(m, "RiccatiError");
    py::register_exception<SolverDivergence>(m, "SolverDivergence");

    py::class_<StateSpace>(m, "StateSpace")
        .def(py::init<Matrix, Matrix, Matrix, Matrix>(), py::arg("A"), py::arg("B"),
             py::arg("C"), py::arg("D"))
        .def_property_readonly("A", &StateSpace::A)
        .def_property_readonly("B", &StateSpace::B)
        .def_property_readonly("C", &StateSpace::C)
        .def_property_readonly("D", &StateSpace::D)
        .def_property_readonly("n", &StateSpace::n)
        .def_property_readonly("m", &StateSpace::m)
        .def("__repr__", [](const StateSpace& s) {
            return "StateSpace(n=" + std::to_string(s.n()) + ", m=" + std::to_string(s.m()) + ")";
        });

    py::class_<FrequencyGrid>(m, "FrequencyGrid")
        .def(py::init<std::vector<double>>(), py::arg("points"))
        .def_static("logspace", &FrequencyGrid::logspace, py::arg("wmin"), py::arg("wmax"),
                    py::arg("count"))
        .def_property_readonly("points", &FrequencyGrid::points);

    py::class_<ModeSpec>(m, "ModeSpec")
        .def(py::init([](double omega, double zeta) { return ModeSpec{omega, zeta}; }),
             py::arg("omega"), py::arg("zeta"))
        .def_readwrite("omega", &ModeSpec::omega)
        .def_readwrite("zeta", &ModeSpec::zeta);

    m.def("ss_new", &ss_new, py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"));
    m.def("tf_eval", &tf_eval, py::arg("sys"), py::arg("s"));
    m.def("freq_response", &freq_response, py::arg("sys"), py::arg("grid"));
    m.def("poles", &poles, py::arg("sys"));
    m.def("is_hurwitz", &is_hurwitz, py::arg("sys"), py::arg("margin") = 0.0);
    m.def("positive_feedback", &positive_feedback, py::arg("plant"), py::arg("controller"));
    m.def(
        "step_response",
        [](const StateSpace& sys, double horizon, double dt) {
            const auto traj = step_response(sys, horizon, dt);
            std::vector<double> t;
            Matrix y(static_cast<Eigen::Index>(traj.size()), sys.m());
            for (std::size_t k = 0; k < traj.size(); ++k) {
                t.push_back(traj[k].t);
                y.row(static_cast<Eigen::Index>(k)) = traj[k].y.transpose();
            }
            return py::make_tuple(t, y);
        },
        py::arg("sys"), py::arg("horizon"), py::arg("dt"),
        "Returns (t, y) with one output row per sample.");
    m.def("flex_plant", &flex_plant, py::arg("modes"));
    m.def("tf_to_ss", &tf_to_ss, py::arg("numerator"), py::arg("denominator"));
    m.def("minimality_warning", &minimality_warning, py::arg("sys"));
    m.def("default_grid", &default_grid, py::arg("points") = 500);

    py::class_<NiVerdict>(m, "NiVerdict")
        .def_readonly("is_ni", &NiVerdict::is_ni)
        .def_readonly("worst_omega", &NiVerdict::worst_omega)
        .def_readonly("min_margin", &NiVerdict::min_margin)
        .def_readonly("rhp_pole_count", &NiVerdict::rhp_pole_count)
        .def_readonly("d_symmetric", &NiVerdict::d_symmetric)
        .def_readonly("skipped_omegas", &NiVerdict::skipped_omegas)
        .def("__repr__", [](const NiVerdict& v) {
            return std::string("NiVerdict(is_ni=") + (v.is_ni ? "True" : "False") +
                   ", min_margin=" + std::to_string(v.min_margin) + ")";
        });

    m.def(
        "ni_sample_check",
        [](const StateSpace& sys, const FrequencyGrid& grid, double tol) {
            return ni_sample_check(sys, grid, tol);
        },
        py::arg("sys"), py::arg("grid"), py::arg("tol") = 1e-8);
    m.def(
        "sni_check",
        [](const StateSpace& sys, const FrequencyGrid& grid, double margin) {
            return sni_check(sys, grid, margin);
        },
        py::arg("sys"), py::arg("grid"), py::arg("margin"));
    m.def("ni_lmi_residual", &ni_lmi_residual, py::arg("sys"), py::arg("P"));
    m.def("lmi_relaxation_delta", &lmi_relaxation_delta, py::arg("sys"), py::arg("P"));
    m.def("dc_gain", &dc_gain, py::arg("sys"));
    m.def("dc_gain_condition", &dc_gain_condition, py::arg("plant"), py::arg("controller"));

    py::class_<PhForm>(m, "PhForm")
        .def(py::init([](Matrix J, Matrix R, Matrix Q) {
                 return PhForm{std::move(J), std::move(R), std::move(Q)};
             }),
             py::arg("J"), py::arg("R"), py::arg("Q"))
        .def_readwrite("J", &PhForm::J)
        .def_readwrite("R", &PhForm::R)
        .def_readwrite("Q", &PhForm::Q)
        .def("validate", &PhForm::validate, py::arg("pd_floor") = 0.0);

    m.def("project_skew", &project_skew, py::arg("M"));
    m.def("project_psd", &project_psd, py::arg("M"));
    m.def("project_pd", &project_pd, py::arg("M"), py::arg("floor"));
    m.def("assemble", &assemble, py::arg("ph"), py::arg("C"));
    m.def("assemble_system", &assemble_system, py::arg("ph"), py::arg("C"), py::arg("D"));
    m.def("admissibility_residual", &admissibility_residual, py::arg("sys"), py::arg("ph"));

    py::class_<DcConstraint>(m, "DcConstraint")
        .def(py::init([](double plant_dc_gain, double epsilon) {
                 return DcConstraint{plant_dc_gain, epsilon};
             }),
             py::arg("plant_dc_gain"), py::arg("epsilon") = 1e-2)
        .def_readwrite("plant_dc_gain", &DcConstraint::plant_dc_gain)
        .def_readwrite("epsilon", &DcConstraint::epsilon);

    py::class_<NearestNiProblem>(m, "NearestNiProblem")
        .def(py::init<StateSpace, double, double, std::optional<DcConstraint>>(),
             py::arg("target"), py::arg("w1") = 1.0, py::arg("w2") = 1.0,
             py::arg("dc") = std::nullopt)
        .def_readonly("target", &NearestNiProblem::target)
        .def_readonly("w1", &NearestNiProblem::w1)
        .def_readonly("w2", &NearestNiProblem::w2);

    py::enum_<InitKind>(m, "InitKind")
        .value("Standard", InitKind::Standard)
        .value("LmiRelaxed", InitKind::LmiRelaxed)
        .value("Warm", InitKind::Warm);

    py::enum_<StopReason>(m, "StopReason")
        .value("ExactZero", StopReason::ExactZero)
        .value("RelTolWindow", StopReason::RelTolWindow)
        .value("Stalled", StopReason::Stalled)
        .value("MaxIter", StopReason::MaxIter);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("max_iter", &SolverConfig::max_iter)
        .def_readwrite("rel_tol", &SolverConfig::rel_tol)
        .def_readwrite("pd_floor", &SolverConfig::pd_floor)
        .def_readwrite("restart", &SolverConfig::restart)
        .def_readwrite("init", &SolverConfig::init)
        .def_readwrite("warm_start", &SolverConfig::warm_start)
        .def_readwrite("lmi_inner_iters", &SolverConfig::lmi_inner_iters)
        .def_readwrite("single_step_rule", &SolverConfig::single_step_rule)
        .def_readwrite("stall_limit", &SolverConfig::stall_limit);

    py::class_<PerturbationReport>(m, "PerturbationReport")
        .def_readonly("abs_a", &PerturbationReport::abs_a)
        .def_readonly("rel_a", &PerturbationReport::rel_a)
        .def_readonly("abs_b", &PerturbationReport::abs_b)
        .def_readonly("rel_b", &PerturbationReport::rel_b)
        .def_readonly("abs_c", &PerturbationReport::abs_c)
        .def_readonly("rel_c", &PerturbationReport::rel_c)
        .def_readonly("abs_d", &PerturbationReport::abs_d)
        .def_readonly("rel_d", &PerturbationReport::rel_d)
        .def_readonly("total", &PerturbationReport::total);

    py::class_<SolverResult>(m, "SolverResult")
        .def_readonly("ph", &SolverResult::ph)
        .def_readonly("nearest", &SolverResult::nearest)
        .def_readonly("objective_trace", &SolverResult::objective_trace)
        .def_readonly("report", &SolverResult::report)
        .def_readonly("final_objective", &SolverResult::final_objective)
        .def_readonly("iterations", &SolverResult::iterations)
        .def_readonly("stop", &SolverResult::stop)
        .def_readonly("converged", &SolverResult::converged)
        .def_readonly("dc_feasible", &SolverResult::dc_feasible);

    m.def("objective", &objective, py::arg("problem"), py::arg("ph"));
    m.def(
        "gradients",
        [](const NearestNiProblem& p, const PhForm& ph) {
            const Gradients g = gradients(p, ph);
            return py::make_tuple(g.J, g.R, g.Q);
        },
        py::arg("problem"), py::arg("ph"));
    m.def("init_standard", &init_standard, py::arg("problem"));
    m.def("init_lmi", &init_lmi, py::arg("problem"), py::arg("inner_iters") = 500);
    m.def("solve", &solve, py::arg("problem"), py::arg("config") = SolverConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "dc_gain_rescale",
        [](const Matrix& Q, const Matrix& C, const Matrix& D, double plant_dc, double epsilon) {
            const DcRescale r = dc_gain_rescale(Q, C, D, plant_dc, epsilon);
            return py::make_tuple(r.Q, r.scaled, r.alpha);
        },
        py::arg("Q"), py::arg("C"), py::arg("D"), py::arg("plant_dc"), py::arg("epsilon"));
    m.def("perturbation_report", &perturbation_report, py::arg("problem"), py::arg("ph"));

    py::class_<LqgWeights>(m, "LqgWeights")
        .def(py::init([](Matrix Qc, Matrix Rc, Matrix Nc, Matrix W, Matrix V) {
                 return LqgWeights{std::move(Qc), std::move(Rc), std::move(Nc), std::move(W),
                                   std::move(V)};
             }),
             py::arg("Qc"), py::arg("Rc"), py::arg("Nc"), py::arg("W"), py::arg("V"))
        .def_static("defaults", &LqgWeights::defaults, py::arg("plant"))
        .def_readwrite("Qc", &LqgWeights::Qc)
        .def_readwrite("Rc", &LqgWeights::Rc)
        .def_readwrite("Nc", &LqgWeights::Nc)
        .def_readwrite("W", &LqgWeights::W)
        .def_readwrite("V", &LqgWeights::V);

    m.def("solve_care", &solve_care, py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"),
          py::arg("N"));
    m.def("lqr_gain", &lqr_gain, py::arg("A"), py::arg("B"), py::arg("weights"));
    m.def("kalman_gain", &kalman_gain, py::arg("A"), py::arg("C"), py::arg("W"), py::arg("V"));
    m.def("lqg_controller", &lqg_controller, py::arg("plant"), py::arg("weights"));
    m.def("solve_lyapunov", &solve_lyapunov, py::arg("A"), py::arg("Q"));
}

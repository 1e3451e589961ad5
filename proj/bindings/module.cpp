#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vprad/aa.hpp"
#include "vprad/config.hpp"
#include "vprad/diagnostics.hpp"
#include "vprad/evolve.hpp"
#include "vprad/field.hpp"
#include "vprad/kepler.hpp"
#include "vprad/snapshot.hpp"
#include "vprad/structfn.hpp"

namespace py = pybind11;
using namespace vprad;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kinetic simulator for the radial Vlasov-Poisson system around "
              "a repulsive point charge, in action-angle variables.";

    // structure functions
    m.def("eval_G", &eval_G, py::arg("s"));
    m.def("eval_H", [](double x) { return eval_H(x); }, py::arg("x"));
    m.def("eval_H_prime", [](double x) { return eval_H_prime(x); }, py::arg("x"));
    m.def("eval_H_second", [](double x) { return eval_H_second(x); }, py::arg("x"));
    m.def("h_integral", [](double x) { return h_integral(x); }, py::arg("x"));

    // transform
    py::class_<PhaseState>(m, "PhaseState")
        .def(py::init<double, double>(), py::arg("r"), py::arg("v"))
        .def_readwrite("r", &PhaseState::r)
        .def_readwrite("v", &PhaseState::v)
        .def("__repr__", [](const PhaseState& p) {
            return "PhaseState(r=" + std::to_string(p.r) +
                   ", v=" + std::to_string(p.v) + ")";
        });
    py::class_<AAState>(m, "AAState")
        .def(py::init<double, double>(), py::arg("theta"), py::arg("a"))
        .def_readwrite("theta", &AAState::theta)
        .def_readwrite("a", &AAState::a)
        .def("__repr__", [](const AAState& s) {
            return "AAState(theta=" + std::to_string(s.theta) +
                   ", a=" + std::to_string(s.a) + ")";
        });
    m.def("to_aa", &to_aa, py::arg("p"), py::arg("q"));
    m.def("from_aa", &from_aa, py::arg("s"), py::arg("q"));
    m.def("R_tilde", &R_tilde, py::arg("s"), py::arg("t"), py::arg("q"));
    m.def("V_tilde", &V_tilde, py::arg("s"), py::arg("t"), py::arg("q"));
    m.def(
        "dR_tilde",
        [](AAState s, double t, double q) {
            RTildeDeriv d = dR_tilde(s, t, q);
            return py::make_tuple(d.value, d.dtheta, d.da);
        },
        py::arg("s"), py::arg("t"), py::arg("q"),
        "Returns (Rtilde, dRtilde/dtheta, dRtilde/da).");
    m.def("jacobian_to_aa", &jacobian_to_aa, py::arg("p"), py::arg("q"),
          py::arg("rel_step") = 1e-5);
    m.def(
        "invert_R",
        [](double r, double t, double q, const std::vector<double>& a_grid,
           const std::vector<double>& theta_grid, double rel_tol) {
            auto roots = invert_R(r, t, q, a_grid, theta_grid, rel_tol);
            py::list out;
            for (const auto& b : roots) {
                const char* kind = b.kind == BranchKind::aleph  ? "aleph"
                                   : b.kind == BranchKind::tau1 ? "tau1"
                                                                : "tau2";
                out.append(py::make_tuple(kind, b.state.theta, b.state.a));
            }
            return out;
        },
        py::arg("r"), py::arg("t"), py::arg("q"), py::arg("a_grid"),
        py::arg("theta_grid") = std::vector<double>{},
        py::arg("rel_tol") = 1e-10);

    // kepler oracle
    m.def("kepler_flow", &kepler_flow, py::arg("p"), py::arg("duration"),
          py::arg("q"), py::arg("tol") = 1e-12);

    // ensemble + field
    py::class_<ParticleEnsemble>(m, "ParticleEnsemble")
        .def(py::init<>())
        .def_readwrite("theta", &ParticleEnsemble::theta)
        .def_readwrite("a", &ParticleEnsemble::a)
        .def_readwrite("w", &ParticleEnsemble::w)
        .def_readwrite("t", &ParticleEnsemble::t)
        .def_readwrite("lam", &ParticleEnsemble::lambda)
        .def_readwrite("q", &ParticleEnsemble::q)
        .def("__len__", &ParticleEnsemble::size)
        .def("total_mass", &ParticleEnsemble::total_mass);
    py::class_<FieldTable>(m, "FieldTable")
        .def(py::init([](const std::vector<double>& radii,
                         const std::vector<double>& weights, double t) {
                 return FieldTable(radii, weights, t);
             }),
             py::arg("radii"), py::arg("weights"), py::arg("t"))
        .def_static("build", &FieldTable::build, py::arg("ens"))
        .def("mass", &FieldTable::mass, py::arg("r"))
        .def("field", &FieldTable::field, py::arg("r"))
        .def("potential", &FieldTable::potential, py::arg("r"))
        .def("density", &FieldTable::density, py::arg("r"), py::arg("bandwidth"))
        .def("total_mass", &FieldTable::total_mass)
        .def("__len__", &FieldTable::size);
    m.def(
        "grad_psi_tilde",
        [](const FieldTable& tbl, AAState s, double t, double q) {
            PsiGrad g = grad_psi_tilde(tbl, s, t, q);
            return py::make_tuple(g.dtheta, g.da);
        },
        py::arg("tbl"), py::arg("s"), py::arg("t"), py::arg("q"));

    // evolution
    py::class_<StepOptions>(m, "StepOptions")
        .def(py::init<>())
        .def_readwrite("threads", &StepOptions::threads)
        .def_readwrite("track_tangents", &StepOptions::track_tangents)
        .def_readwrite("tangent_stencil", &StepOptions::tangent_stencil);
    m.def("step_aa", &step_aa, py::arg("ens"), py::arg("dt"),
          py::arg("opt") = StepOptions{});
    m.def("load_config", &load_config, py::arg("path"));
    py::class_<SimConfig>(m, "SimConfig")
        .def_readwrite("threads", &SimConfig::threads)
        .def_readonly("q", &SimConfig::q)
        .def_readonly("lam", &SimConfig::lambda)
        .def_readonly("t0", &SimConfig::t0)
        .def_readonly("t_end", &SimConfig::t_end);
    m.def(
        "run_simulation",
        [](const SimConfig& cfg) { return run_simulation(cfg); },
        py::arg("config"), "Run to t_end and return the final ensemble.");

    // diagnostics
    m.def(
        "weighted_norm",
        [](const ParticleEnsemble& ens, const std::string& expr) {
            return weighted_norm(ens, Weight::parse(expr));
        },
        py::arg("ens"), py::arg("weight"));
    m.def("average_indicator", &average_indicator, py::arg("ens"),
          py::arg("a_cut"));
    m.def(
        "decay_fit",
        [](const std::vector<double>& t, const std::vector<double>& v,
           double t_lo, double t_hi) {
            FitResult f = decay_fit(t, v, t_lo, t_hi);
            return py::make_tuple(f.slope, f.stderr_slope, f.n);
        },
        py::arg("t"), py::arg("value"), py::arg("t_lo"), py::arg("t_hi"),
        "OLS slope on (ln t, ln value); returns (slope, stderr, n).");

    m.attr("__version__") = VPRAD_VERSION;
}

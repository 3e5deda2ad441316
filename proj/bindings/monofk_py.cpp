#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "monofk/commands.hpp"
#include "monofk/geometry.hpp"
#include "monofk/special_functions.hpp"
#include "monofk/spectral.hpp"
#include "monofk/stochastic.hpp"

namespace py = pybind11;
using namespace monofk;

namespace {

CommandResult run_command(const std::string& command, const std::string& config_json) {
    RunConfig cfg = run_config_from_json(config_json);
    if (command == "geometry") return cmd_geometry(cfg);
    if (command == "spectral") return cmd_spectral(cfg);
    if (command == "fk") return cmd_fk(cfg);
    if (command == "convergence") return cmd_convergence(cfg);
    throw std::invalid_argument("unknown command: " + command);
}

} // namespace

PYBIND11_MODULE(_monofk, m) {
    m.doc() = "Charged particle in a magnetic monopole field: spectral semigroup "
              "and stochastic parallel transport over the two-chart bundle.";
    m.attr("__version__") = kVersion;

    py::enum_<ChartId>(m, "ChartId")
        .value("Plus", ChartId::Plus)
        .value("Minus", ChartId::Minus);

    py::class_<Point3>(m, "Point3")
        .def(py::init<double, double, double>(), py::arg("x1"), py::arg("x2"), py::arg("x3"))
        .def_readwrite("x1", &Point3::x1)
        .def_readwrite("x2", &Point3::x2)
        .def_readwrite("x3", &Point3::x3)
        .def("__repr__", [](const Point3& p) {
            return "Point3(" + std::to_string(p.x1) + ", " + std::to_string(p.x2) + ", " +
                   std::to_string(p.x3) + ")";
        });

    py::class_<Covector3>(m, "Covector3")
        .def(py::init<double, double, double>(), py::arg("c1"), py::arg("c2"), py::arg("c3"))
        .def_readwrite("c1", &Covector3::c1)
        .def_readwrite("c2", &Covector3::c2)
        .def_readwrite("c3", &Covector3::c3);

    py::class_<ChartAtlas>(m, "ChartAtlas")
        .def(py::init<int, double, double>(), py::arg("n") = 1, py::arg("delta") = 0.5,
             py::arg("switch_margin") = 0.5)
        .def_readwrite("n", &ChartAtlas::n)
        .def_readwrite("delta", &ChartAtlas::delta)
        .def_readwrite("switch_margin", &ChartAtlas::switch_margin);

    py::class_<FiberValue>(m, "FiberValue")
        .def_readonly("chart", &FiberValue::chart)
        .def_readonly("value", &FiberValue::value);

    m.def("norm", &norm, py::arg("x"));
    m.def("azimuth", &azimuth, py::arg("x"),
          "Azimuth in (-pi, pi]; raises ValueError on the axis.");
    m.def("chart_contains", &chart_contains, py::arg("atlas"), py::arg("chart"), py::arg("x"));
    m.def("transition_phase", &transition_phase, py::arg("atlas"), py::arg("x"),
          "exp(2 i n phi(x)) relating the chart representations on the overlap.");
    m.def("connection_form", &connection_form, py::arg("atlas"), py::arg("chart"), py::arg("x"));
    m.def("parallel_transport_polyline", &parallel_transport_polyline, py::arg("atlas"),
          py::arg("chart"), py::arg("points"),
          "Midpoint-rule transport phase along a polyline inside one chart.");
    m.def("loop_holonomy", &loop_holonomy, py::arg("atlas"), py::arg("chart"), py::arg("theta"),
          py::arg("segments"),
          "Closed-loop transport around the colatitude-theta circle.");

    m.def("gamma_fn", &gamma_fn, py::arg("x"));
    m.def("bessel_j", &bessel_j, py::arg("mu"), py::arg("x"));
    m.def("scaled_bessel", &scaled_bessel, py::arg("mu"), py::arg("y"),
          "y^(-1/2) J_mu(y), continued to y = 0.");
    m.def("jacobi_polynomial", &jacobi_polynomial, py::arg("k"), py::arg("alpha"),
          py::arg("beta"), py::arg("xi"));

    py::class_<QuadratureRule>(m, "QuadratureRule")
        .def_readonly("nodes", &QuadratureRule::nodes)
        .def_readonly("weights", &QuadratureRule::weights)
        .def_readonly("a", &QuadratureRule::a)
        .def_readonly("b", &QuadratureRule::b);
    m.def("gauss_legendre", &gauss_legendre, py::arg("npts"), py::arg("a"), py::arg("b"));
    m.def("gauss_hermite", &gauss_hermite, py::arg("npts"),
          "Nodes and weights for averages against the standard Gaussian.");

    py::class_<AngularMode>(m, "AngularMode")
        .def(py::init<int, int, int>(), py::arg("n"), py::arg("ell"), py::arg("m"))
        .def_readwrite("n", &AngularMode::n)
        .def_readwrite("ell", &AngularMode::ell)
        .def_readwrite("m", &AngularMode::m);

    py::class_<RadialProfile>(m, "RadialProfile")
        .def(py::init([](double k_lo, double k_hi, double amplitude) {
                 return RadialProfile{RadialProfile::Kind::SmoothBump, k_lo, k_hi, amplitude};
             }),
             py::arg("k_lo") = 1.0, py::arg("k_hi") = 3.0, py::arg("amplitude") = 1.0)
        .def_readwrite("k_lo", &RadialProfile::k_lo)
        .def_readwrite("k_hi", &RadialProfile::k_hi)
        .def_readwrite("amplitude", &RadialProfile::amplitude);

    py::class_<SectionTerm>(m, "SectionTerm")
        .def(py::init([](std::complex<double> coeff, const AngularMode& mode,
                         const RadialProfile& profile) {
                 SectionTerm t;
                 t.coeff = coeff;
                 t.mode = mode;
                 t.profile = profile;
                 return t;
             }),
             py::arg("coeff"), py::arg("mode"), py::arg("profile"))
        .def_readwrite("coeff", &SectionTerm::coeff)
        .def_readwrite("mode", &SectionTerm::mode)
        .def_readwrite("profile", &SectionTerm::profile)
        .def_readonly("t_evolved", &SectionTerm::t_evolved)
        .def_readonly("h_power", &SectionTerm::h_power);

    py::class_<SectionInD>(m, "SectionInD")
        .def(py::init<>())
        .def(py::init([](const std::vector<SectionTerm>& terms) {
                 SectionInD s;
                 s.terms = terms;
                 return s;
             }),
             py::arg("terms"))
        .def_readwrite("terms", &SectionInD::terms)
        .def("charge", &SectionInD::charge);

    m.def("mu_of", &mu_of, py::arg("mode"),
          "Transform order: mu^2 = ell(ell+1) - n^2 + 1/4.");
    m.def(
        "harmonic",
        [](const AngularMode& mode, ChartId chart, const Point3& u) {
            return harmonic_eval(harmonic_table(mode), chart, u);
        },
        py::arg("mode"), py::arg("chart"), py::arg("u"),
        "Normalized monopole harmonic at a unit vector, in the requested chart.");
    m.def("section_eval", &section_eval, py::arg("section"), py::arg("x"), py::arg("chart"));
    m.def("semigroup_apply", &semigroup_apply, py::arg("section"), py::arg("t"),
          "e^{-Ht}, applied exactly on the spectrum.");
    m.def("hamiltonian_apply", &hamiltonian_apply, py::arg("section"));
    m.def("covariant_derivative_fd", &covariant_derivative_fd, py::arg("section"), py::arg("x"),
          py::arg("chart"), py::arg("direction"), py::arg("h_fd"), py::arg("atlas"));
    m.def("section_from_json", &section_from_json, py::arg("text"));
    m.def("section_to_json", &section_to_json, py::arg("section"));

    py::class_<PathConfig>(m, "PathConfig")
        .def(py::init([](double t_final, int n_steps, uint64_t seed, uint64_t path_index) {
                 return PathConfig{t_final, n_steps, seed, path_index};
             }),
             py::arg("t_final") = 1.0, py::arg("n_steps") = 100, py::arg("seed") = 0,
             py::arg("path_index") = 0)
        .def_readwrite("t_final", &PathConfig::t_final)
        .def_readwrite("n_steps", &PathConfig::n_steps)
        .def_readwrite("seed", &PathConfig::seed)
        .def_readwrite("path_index", &PathConfig::path_index);

    py::class_<BrownianPath>(m, "BrownianPath")
        .def_readonly("times", &BrownianPath::times)
        .def_readonly("points", &BrownianPath::points);

    py::class_<TransportState::Switch>(m, "ChartSwitch")
        .def_readonly("step", &TransportState::Switch::step)
        .def_readonly("from_chart", &TransportState::Switch::from)
        .def_readonly("to_chart", &TransportState::Switch::to);

    py::class_<TransportState>(m, "TransportState")
        .def_readonly("chart", &TransportState::chart)
        .def_readonly("phase_angle", &TransportState::phase_angle)
        .def_readonly("switch_times", &TransportState::switch_times);

    py::class_<FkEstimate>(m, "FkEstimate")
        .def_readonly("mean", &FkEstimate::mean)
        .def_readonly("stderr", &FkEstimate::stderr_)
        .def_readonly("n_paths", &FkEstimate::n_paths)
        .def_readonly("n_rejected", &FkEstimate::n_rejected);

    m.def("sample_brownian_path", &sample_brownian_path, py::arg("x0"), py::arg("cfg"));
    m.def("ito_integral", &ito_integral, py::arg("path"), py::arg("f"),
          "Left-endpoint line-integral sum of a covector field along the path.");
    m.def("stratonovich_integral", &stratonovich_integral, py::arg("path"), py::arg("f"),
          "Midpoint line-integral sum of a covector field along the path.");
    m.def("stochastic_transport", &stochastic_transport, py::arg("path"), py::arg("atlas"),
          py::arg("start_chart"), py::arg("forced_toggles") = std::vector<int>{});
    m.def("transport_inverse_apply", &transport_inverse_apply, py::arg("state"),
          py::arg("section"), py::arg("path"), py::arg("atlas"), py::arg("output_chart"));
    m.def("fk_estimate", &fk_estimate, py::arg("section"), py::arg("x"), py::arg("t"),
          py::arg("n_paths"), py::arg("cfg_template"), py::arg("atlas"),
          py::call_guard<py::gil_scoped_release>(),
          "Monte Carlo estimate of the transported endpoint average.");
    m.def("worker_count", &worker_count);

    m.def(
        "run",
        [](const std::string& command, const std::string& config_json) {
            auto res = run_command(command, config_json);
            return std::make_pair(res.report_json, res.all_passed);
        },
        py::arg("command"), py::arg("config_json") = std::string("{}"),
        py::call_guard<py::gil_scoped_release>(),
        "Run one of geometry|spectral|fk|convergence; returns (report_json, all_passed).");
}

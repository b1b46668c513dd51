#include "cuspsim/analysis.hpp"
#include "cuspsim/errors.hpp"
#include "cuspsim/exact.hpp"
#include "cuspsim/ideal.hpp"
#include "cuspsim/runner.hpp"
#include "cuspsim/truncated.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cuspsim;

namespace {

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

// Evaluate a scalar closed form over an array of times.
template <typename T, typename F>
py::array_t<T> map_times(const std::vector<double>& times, F fn) {
    std::vector<T> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(fn(t));
    return to_array(out);
}

RealSeries make_series(const std::vector<double>& times, const std::vector<double>& values) {
    RealSeries s;
    s.times = times;
    s.values = values;
    return s;
}

py::dict exact_dict(const ExactObservables& obs) {
    py::dict d;
    d["t"] = to_array(obs.times);
    d["P_i"] = to_array(obs.p_init);
    d["P_r"] = to_array(obs.p_reflect);
    d["P_R"] = to_array(obs.p_right);
    d["psi0"] = to_array(obs.psi0);
    for (std::size_t n = 0; n < obs.p_offset.size(); ++n) d[py::str("P_" + std::to_string(n + 1))] = to_array(obs.p_offset[n]);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quench dynamics of a Bloch state on a tight-binding ring with a site defect";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<LatticeConfig>(m, "LatticeConfig")
        .def(py::init<int, long long, double, int>(), py::arg("n_sites"), py::arg("k_init"),
             py::arg("defect_strength"), py::arg("defect_site") = 0)
        .def_property_readonly("n_sites", &LatticeConfig::n_sites)
        .def_property_readonly("k_init", &LatticeConfig::k_init)
        .def_property_readonly("defect_strength", &LatticeConfig::defect_strength)
        .def_property_readonly("defect_site", &LatticeConfig::defect_site)
        .def_property_readonly("q_init", &LatticeConfig::q_init)
        .def("__repr__", [](const LatticeConfig& c) {
            return "LatticeConfig(n_sites=" + std::to_string(c.n_sites()) + ", k_init=" + std::to_string(c.k_init()) +
                   ", defect_strength=" + std::to_string(c.defect_strength()) +
                   ", defect_site=" + std::to_string(c.defect_site()) + ")";
        });

    py::class_<IdealModelParams>(m, "IdealModelParams")
        .def_readonly("g", &IdealModelParams::g)
        .def_readonly("delta", &IdealModelParams::delta)
        .def_readonly("heisenberg_time", &IdealModelParams::heisenberg_time)
        .def_readonly("theta", &IdealModelParams::theta)
        .def_readonly("omega", &IdealModelParams::omega)
        .def_readonly("q_init", &IdealModelParams::q_init)
        .def_static("from_ratio", &IdealModelParams::from_ratio, py::arg("g_over_delta"))
        .def_static("from_coupling", &IdealModelParams::from_coupling, py::arg("g"), py::arg("delta"),
                    py::arg("q_init") = 0.0);

    m.def("derive_params", &derive_params, py::arg("config"));
    m.def("uniform_grid", &uniform_grid, py::arg("period"), py::arg("n_periods"), py::arg("samples_per_period"));

    m.def(
        "run_exact",
        [](const LatticeConfig& cfg, const std::vector<double>& times, int n_offsets, bool parallel) {
            ExactObservables obs;
            {
                py::gil_scoped_release release;
                obs = run_exact(cfg, times, n_offsets, {.parallel = parallel});
            }
            return exact_dict(obs);
        },
        py::arg("config"), py::arg("times"), py::arg("n_offsets") = 3, py::arg("parallel") = true,
        "Exact N-level evolution; dict of P_i, P_r, P_R, P_1.., psi0 arrays.");

    m.def(
        "evolve_truncated",
        [](const IdealModelParams& p, int m_levels, const std::vector<double>& times) {
            const PsiTrajectory traj = evolve_truncated(build_truncated(p, m_levels), times);
            const auto dim = static_cast<py::ssize_t>(2 * m_levels + 1);
            py::array_t<cplx> psi({static_cast<py::ssize_t>(times.size()), dim});
            auto view = psi.mutable_unchecked<2>();
            for (std::size_t i = 0; i < times.size(); ++i) {
                for (py::ssize_t c = 0; c < dim; ++c) view(i, c) = traj.psi[i][c];
            }
            py::dict d;
            d["t"] = to_array(traj.times);
            d["psi"] = psi;
            d["S"] = to_array(traj.s_values);
            return d;
        },
        py::arg("params"), py::arg("m_levels"), py::arg("times"),
        "Truncated model; psi has shape (len(times), 2M+1), column M is psi_0.");

    m.def("psi0", [](const IdealModelParams& p, const std::vector<double>& t) {
        return map_times<cplx>(t, [&](double x) { return psi0_closed_form(p, x); });
    }, py::arg("params"), py::arg("times"));
    m.def("s_value", [](const IdealModelParams& p, const std::vector<double>& t) {
        return map_times<cplx>(t, [&](double x) { return s_closed_form(p, x).value; });
    }, py::arg("params"), py::arg("times"));
    m.def("psi_n", [](const IdealModelParams& p, int n, const std::vector<double>& t) {
        return map_times<cplx>(t, [&](double x) { return psi_n_closed_form(p, n, x); });
    }, py::arg("params"), py::arg("n"), py::arg("times"));
    m.def("populations", [](const IdealModelParams& p, const std::vector<double>& t) {
        py::dict d;
        d["P_i"] = map_times<double>(t, [&](double x) { return populations_closed_form(p, x).p_init; });
        d["P_r"] = map_times<double>(t, [&](double x) { return populations_closed_form(p, x).p_reflect; });
        d["P_R"] = map_times<double>(t, [&](double x) { return right_mover_closed_form(p, x); });
        return d;
    }, py::arg("params"), py::arg("times"), "Closed-form P_i, P_r and P_R.");

    m.def("sinc_sum", [](double alpha, long n_max) {
        const SincSum s = sinc_sum_identity(alpha, n_max);
        return py::make_tuple(s.partial_sum, s.tail_bound);
    }, py::arg("alpha"), py::arg("n_max"), "(partial sum, tail bound) of sum_n sin^2(n a)/(n a)^2.");

    m.def(
        "detect_cusps",
        [](const std::vector<double>& times, const std::vector<double>& values, const IdealModelParams& p,
           double kappa, int stride, bool refine, int sign) {
            CuspDetectorOptions opts;
            opts.kappa = kappa;
            opts.stride = stride;
            opts.refine = refine;
            opts.envelope_sign = sign;
            const CuspReport r = detect_cusps(make_series(times, values), p, opts);
            py::dict d;
            d["times"] = to_array(r.cusp_times);
            d["spacings"] = to_array(r.spacings);
            d["values"] = to_array(r.tip_values);
            d["envelope_residuals"] = to_array(r.envelope_residuals);
            d["threshold"] = r.threshold;
            return d;
        },
        py::arg("times"), py::arg("values"), py::arg("params"), py::arg("kappa") = 5.0, py::arg("stride") = 0,
        py::arg("refine") = false, py::arg("sign") = 1);

    m.def(
        "compare",
        [](const std::vector<double>& times, const std::vector<double>& a, const std::vector<double>& b) {
            const ComparisonReport r = compare_series(make_series(times, a), make_series(times, b));
            return py::make_tuple(r.max_abs_error, r.rms_error);
        },
        py::arg("times"), py::arg("a"), py::arg("b"), "(max, rms) of |a - b|.");

    m.def(
        "run",
        [](const std::string& config_json, bool write_files) {
            const RunConfig cfg = run_config_from_json(config_json);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run(cfg, write_files);
            }
            py::dict out;
            for (const auto& [method, table] : r.tables) {
                py::dict cols;
                for (std::size_t c = 0; c < table.columns.size(); ++c) cols[py::str(table.columns[c])] = to_array(table.data[c]);
                out[py::str(method_name(method))] = cols;
            }
            return out;
        },
        py::arg("config_json"), py::arg("write_files") = false,
        "Run a JSON-configured scenario; {method: {column: array}}.");
}

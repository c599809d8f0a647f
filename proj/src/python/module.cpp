#include "ergolab/averaging.hpp"
#include "ergolab/convolution.hpp"
#include "ergolab/error.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/multiflow.hpp"
#include "ergolab/parallel.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ergolab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    const auto* data = a.data();
    return std::vector<double>(data, data + a.size());
}

py::array_t<double> points_array(const PointSet& points) {
    py::array_t<double> out({points.size(), points.dim});
    std::copy(points.coords.begin(), points.coords.end(), out.mutable_data());
    return out;
}

py::dict certificate_dict(const ErgodicityCertificate& c) {
    py::dict d;
    d["search_radius"] = c.search_radius;
    d["min_frequency_norm"] = c.min_frequency_norm;
    d["minimizer"] = c.minimizer;
    d["offending_k"] = c.offending_k ? py::cast(*c.offending_k) : py::none();
    d["threshold"] = c.threshold;
    d["vectors_checked"] = c.vectors_checked;
    d["passed"] = c.passed();
    return d;
}

py::dict error_dict(const L1Error& e) {
    py::dict d;
    d["exact"] = e.exact;
    d["closed_form"] = e.closed_form;
    d["lattice"] = e.lattice;
    d["mc"] = e.mc;
    d["mc_stderr"] = e.mc_stderr;
    d["oracle_bound"] = e.oracle_bound;
    d["lattice_points"] = e.lattice_points;
    d["mc_samples"] = e.mc_samples;
    return d;
}

py::dict report_dict(const AcDiagnosticReport& r) {
    py::list suspects;
    for (const auto& s : r.atom_suspects) {
        py::dict d;
        d["cell"] = s.cell;
        d["fraction"] = s.fraction;
        d["refined_fraction"] = s.refined_fraction;
        suspects.append(d);
    }
    py::dict d;
    d["max_cell_fraction"] = r.max_cell_fraction;
    d["max_cell_fraction_refined"] = r.max_cell_fraction_refined;
    d["split_half_tv"] = r.split_half_tv;
    d["atom_suspects"] = suspects;
    d["sample_count"] = r.sample_count;
    d["cells_per_axis"] = r.cells_per_axis;
    d["conv_power_input"] = r.conv_power_input;
    return d;
}

AveragingMode make_mode(const std::string& mode, int resolution, std::size_t count, std::uint64_t seed,
                        std::uint32_t stream) {
    if (mode == "quadrature") {
        return Quadrature{resolution};
    }
    if (mode == "mc") {
        return MonteCarlo{count, Seed{seed}, stream};
    }
    throw UsageError("mode must be 'quadrature' or 'mc'");
}

SphereMeasure sphere_of(const WeightMeasure& m) {
    const auto* s = m.as<SphereMeasure>();
    if (s == nullptr) {
        throw ConfigError("expected a sphere measure");
    }
    return *s;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Ergodic averages of torus translation flows against weight measures";
    m.attr("__version__") = ERGOLAB_VERSION;

    const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
    py::register_exception<CertificateRefused>(m, "CertificateRefused", base.ptr());
    py::register_exception<BudgetError>(m, "BudgetError", base.ptr());

    m.def("set_thread_count", &set_thread_count, py::arg("threads"));
    m.def("thread_count", &thread_count);

    py::class_<WeightMeasure>(m, "WeightMeasure")
        .def_property_readonly("dim", &WeightMeasure::dim)
        .def("describe", &WeightMeasure::describe)
        .def("__repr__", [](const WeightMeasure& w) { return "<WeightMeasure " + w.describe() + ">"; })
        .def(
            "fourier", [](const WeightMeasure& w, const Array& xi) { return fourier(w, to_vector(xi)); },
            py::arg("xi"))
        .def(
            "sample",
            [](const WeightMeasure& w, std::uint64_t seed, std::size_t count) {
                PointSet points;
                {
                    py::gil_scoped_release release;
                    points = sample(w, Seed{seed}, count);
                }
                return points_array(points);
            },
            py::arg("seed"), py::arg("count"));

    m.def("interval_density", &interval_density);
    m.def(
        "uniform_box", [](const Array& lo, const Array& hi) { return uniform_box(to_vector(lo), to_vector(hi)); },
        py::arg("lo"), py::arg("hi"));
    m.def("point_mass", [](const Array& a) { return point_mass(to_vector(a)); }, py::arg("at"));
    m.def("moment_curve", &make_moment_curve, py::arg("d"));
    m.def("straight_line", &make_straight_line, py::arg("d"));
    m.def(
        "sphere", [](const Array& center, double radius) { return make_sphere(to_vector(center), radius); },
        py::arg("center"), py::arg("radius") = 1.0);
    m.def("conv_power", &make_conv_power, py::arg("base"), py::arg("n"));
    m.def(
        "semimeridian",
        [](double longitude, const WeightMeasure& sphere) { return make_semimeridian(longitude, sphere_of(sphere)); },
        py::arg("longitude"), py::arg("sphere"));

    py::class_<TorusMultiflow>(m, "TorusMultiflow")
        .def(py::init([](const Array& matrix) {
                 if (matrix.ndim() != 2) {
                     throw ConfigError("matrix must be two-dimensional (torus_dim x time_dim)");
                 }
                 return TorusMultiflow(matrix.shape(0), matrix.shape(1), to_vector(matrix));
             }),
             py::arg("matrix"))
        .def_property_readonly("torus_dim", &TorusMultiflow::torus_dim)
        .def_property_readonly("time_dim", &TorusMultiflow::time_dim)
        .def(
            "frequency", [](const TorusMultiflow& f, const std::vector<int>& k) { return f.frequency(k); },
            py::arg("k"))
        .def(
            "act",
            [](const TorusMultiflow& f, const Array& s, const Array& x) {
                return act(f, to_vector(s), to_vector(x));
            },
            py::arg("s"), py::arg("x"));

    m.def(
        "ergodicity_certificate",
        [](const TorusMultiflow& f, int radius, double threshold) {
            return certificate_dict(ergodicity_certificate(f, radius, threshold));
        },
        py::arg("flow"), py::arg("search_radius") = 50, py::arg("threshold") = 1e-12);

    py::class_<TrigObservable>(m, "TrigObservable")
        .def(py::init([](std::size_t torus_dim, const std::vector<std::pair<std::vector<int>, Complex>>& modes,
                         bool real_valued) {
                 std::vector<TrigMode> out;
                 for (const auto& [k, c] : modes) {
                     out.push_back({k, c});
                 }
                 return TrigObservable(torus_dim, out, real_valued);
             }),
             py::arg("torus_dim"), py::arg("modes"), py::arg("real_valued") = false)
        .def_property_readonly("torus_dim", &TrigObservable::torus_dim)
        .def_property_readonly("real_valued", &TrigObservable::real_valued)
        .def_property_readonly("modes",
                               [](const TrigObservable& o) {
                                   py::list out;
                                   for (const auto& mode : o.modes()) {
                                       out.append(py::make_tuple(mode.k, mode.coefficient));
                                   }
                                   return out;
                               })
        .def(
            "__call__", [](const TrigObservable& o, const Array& x) { return evaluate(o, to_vector(x)); },
            py::arg("x"))
        .def("mean", [](const TrigObservable& o) { return mean(o); });

    m.def("five_mode_observable", &five_mode_observable, py::arg("torus_dim"));
    m.def("single_mode_observable", &single_mode_observable, py::arg("k"), py::arg("coefficient") = Complex{1.0, 0.0});

    m.def(
        "average_pointwise",
        [](const TorusMultiflow& f, const TrigObservable& o, const WeightMeasure& w, double t, const Array& x,
           const std::string& mode, int resolution, std::size_t count, std::uint64_t seed, std::uint32_t stream) {
            if (mode == "quadrature" && resolution <= 0) {
                resolution = quadrature_resolution_for(f, o, w, t);
            }
            const AveragingMode chosen = make_mode(mode, resolution, count, seed, stream);
            const std::vector<double> point = to_vector(x);
            PointwiseAverage result;
            {
                py::gil_scoped_release release;
                result = average_pointwise(f, o, w, t, point, chosen);
            }
            return py::make_tuple(result.value, result.standard_error);
        },
        py::arg("flow"), py::arg("obs"), py::arg("measure"), py::arg("t"), py::arg("x"),
        py::arg("mode") = "quadrature", py::arg("resolution") = 0, py::arg("count") = 100'000,
        py::arg("seed") = 0, py::arg("stream") = 0,
        "Returns (value, standard_error); the standard error is 0 for quadrature.");

    m.def("multiplier_oracle", &multiplier_oracle, py::arg("flow"), py::arg("obs"), py::arg("measure"), py::arg("t"));

    m.def(
        "l1_error",
        [](const TorusMultiflow& f, const TrigObservable& o, const WeightMeasure& w, double t,
           std::size_t lattice_points, std::size_t mc_samples, std::uint64_t seed) {
            return error_dict(l1_error(f, o, w, t, TorusGrid{lattice_points, mc_samples}, Seed{seed}));
        },
        py::arg("flow"), py::arg("obs"), py::arg("measure"), py::arg("t"), py::arg("lattice_points") = 4096,
        py::arg("mc_samples") = 4096, py::arg("seed") = 0);

    m.def(
        "convergence_sweep",
        [](const TorusMultiflow& f, const TrigObservable& o, const WeightMeasure& w, const std::vector<double>& values,
           const std::string& kind, std::size_t lattice_points, std::size_t mc_samples, std::uint64_t seed,
           bool waive_ergodicity) {
            if (kind != "time" && kind != "radius") {
                throw UsageError("kind must be 'time' or 'radius'");
            }
            const Schedule schedule{kind == "time" ? ScheduleKind::Time : ScheduleKind::Radius, values};
            AveragingReport report;
            {
                py::gil_scoped_release release;
                report = convergence_sweep(f, o, w, schedule, TorusGrid{lattice_points, mc_samples}, Seed{seed},
                                           SweepOptions{waive_ergodicity, 50});
            }
            std::vector<double> errors;
            for (const auto& e : report.entries) {
                errors.push_back(e.error.exact);
            }
            py::dict d;
            d["values"] = values;
            d["errors"] = errors;
            d["last_over_first"] = report.decay.last_over_first;
            d["envelope_slope"] = report.decay.envelope_slope;
            d["nonergodic"] = report.nonergodic;
            d["certificate"] = certificate_dict(report.certificate);
            d["csv"] = sweep_csv(report);
            return d;
        },
        py::arg("flow"), py::arg("obs"), py::arg("measure"), py::arg("values"), py::arg("kind") = "time",
        py::arg("lattice_points") = 4096, py::arg("mc_samples") = 4096, py::arg("seed") = 0,
        py::arg("waive_ergodicity") = false);

    m.def(
        "iterated_vs_convolution",
        [](const TorusMultiflow& f, const TrigObservable& o, const WeightMeasure& w, double t, int n, const Array& x,
           std::size_t count, std::uint64_t seed) {
            const IterationCheck c =
                iterated_vs_convolution(f, o, w, t, n, to_vector(x), MonteCarlo{count, Seed{seed}, 0});
            py::dict d;
            d["analytic_deviation"] = c.analytic_deviation;
            d["analytic_value"] = c.analytic_value;
            d["mc_value"] = c.mc.value;
            d["mc_standard_error"] = c.mc.standard_error;
            d["mc_deviation"] = c.mc_deviation;
            return d;
        },
        py::arg("flow"), py::arg("obs"), py::arg("measure"), py::arg("t"), py::arg("n"), py::arg("x"),
        py::arg("count") = 100'000, py::arg("seed") = 0);

    m.def(
        "ac_diagnostic",
        [](const WeightMeasure& w, std::size_t count, int cells, std::uint64_t seed) {
            AcDiagnosticReport r;
            {
                py::gil_scoped_release release;
                r = ac_diagnostic(w, count, cells, Seed{seed});
            }
            return report_dict(r);
        },
        py::arg("measure"), py::arg("sample_count"), py::arg("cells_per_axis"), py::arg("seed") = 0);

    m.def(
        "tangent_determinant",
        [](const WeightMeasure& w, const std::vector<double>& params) {
            const auto* curve = w.as<CurveMeasure>();
            if (curve == nullptr) {
                throw UnsupportedError("tangent_determinant needs a curve measure");
            }
            return tangent_determinant(*curve, params);
        },
        py::arg("curve"), py::arg("params"));

    m.def(
        "general_position_check",
        [](const WeightMeasure& w, std::size_t trials, double threshold, std::uint64_t seed) {
            const GeneralPositionReport r = general_position_check(w, trials, threshold, Seed{seed});
            py::dict d;
            d["trials"] = r.trials;
            d["failures"] = r.failures;
            d["min_abs_det"] = r.min_abs_det;
            d["threshold"] = r.threshold;
            d["abs_dets"] = py::array_t<double>(r.abs_dets.size(), r.abs_dets.data());
            return d;
        },
        py::arg("curve"), py::arg("trials"), py::arg("threshold") = 1e-12, py::arg("seed") = 0);

    m.def(
        "sum_map_jacobian",
        [](double longitude, double theta, double phi, double psi, const WeightMeasure& sphere) {
            return sum_map_jacobian(longitude, theta, phi, psi, sphere_of(sphere)).det;
        },
        py::arg("longitude"), py::arg("theta"), py::arg("phi"), py::arg("psi"), py::arg("sphere"));

    m.def(
        "jacobian_scan",
        [](const WeightMeasure& sphere, std::size_t trials, double threshold, std::uint64_t seed) {
            const JacobianScanResult r = jacobian_scan(sphere_of(sphere), trials, threshold, Seed{seed});
            py::dict d;
            d["trials"] = r.trials;
            d["degenerate"] = r.degenerate;
            d["fraction"] = r.fraction();
            d["threshold"] = r.threshold;
            d["min_abs_det"] = r.min_abs_det;
            return d;
        },
        py::arg("sphere"), py::arg("trials"), py::arg("threshold") = 1e-6, py::arg("seed") = 0);

    m.def(
        "disintegration_test",
        [](const WeightMeasure& sphere, std::size_t count, std::uint64_t seed, const std::string& colatitude) {
            if (colatitude != "sine" && colatitude != "uniform") {
                throw UsageError("colatitude must be 'sine' or 'uniform'");
            }
            const DisintegrationResult r =
                disintegration_test(sphere_of(sphere), count, Seed{seed},
                                    colatitude == "sine" ? ColatitudeLaw::Sine : ColatitudeLaw::Uniform);
            py::dict d;
            d["ks"] = r.ks;
            d["max_ks"] = r.max_ks;
            d["critical_value"] = r.critical_value;
            d["alpha"] = r.alpha;
            d["passes"] = r.passes();
            return d;
        },
        py::arg("sphere"), py::arg("sample_count"), py::arg("seed") = 0, py::arg("colatitude") = "sine");
}

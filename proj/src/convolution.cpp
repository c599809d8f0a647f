#include "ergolab/convolution.hpp"

#include "ergolab/error.hpp"
#include "ergolab/numerics.hpp"
#include "ergolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace ergolab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t cell_count(std::size_t dim, int cells_per_axis) {
    std::uint64_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) {
        if (total > (std::uint64_t{1} << 62) / static_cast<std::uint64_t>(cells_per_axis)) {
            throw ConfigError("histogram: cells_per_axis^dim overflows the cell index");
        }
        total *= static_cast<std::uint64_t>(cells_per_axis);
    }
    return total;
}

std::uint64_t flat_cell(std::span<const double> x, const Box& box, int cells) {
    std::uint64_t flat = 0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        const double u = (x[a] - box.lo[a]) / (box.hi[a] - box.lo[a]);
        const double scaled = std::floor(u * cells);
        const int index = static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(cells - 1)));
        flat = flat * static_cast<std::uint64_t>(cells) + static_cast<std::uint64_t>(index);
    }
    return flat;
}

std::vector<int> unflatten(std::uint64_t flat, std::size_t dim, int cells) {
    std::vector<int> index(dim);
    for (std::size_t a = dim; a-- > 0;) {
        index[a] = static_cast<int>(flat % static_cast<std::uint64_t>(cells));
        flat /= static_cast<std::uint64_t>(cells);
    }
    return index;
}

double total_variation(const HistogramDensity& a, const HistogramDensity& b) {
    const double na = static_cast<double>(a.total);
    const double nb = static_cast<double>(b.total);
    double tv = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.cells.size() || j < b.cells.size()) {
        if (j == b.cells.size() || (i < a.cells.size() && a.cells[i].first < b.cells[j].first)) {
            tv += a.cells[i++].second / na;
        } else if (i == a.cells.size() || b.cells[j].first < a.cells[i].first) {
            tv += b.cells[j++].second / nb;
        } else {
            tv += std::abs(a.cells[i++].second / na - b.cells[j++].second / nb);
        }
    }
    return 0.5 * tv;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void require_r3(const SphereMeasure& sphere, const char* what) {
    if (sphere.ambient_dim() != 3) {
        throw UnsupportedError(std::string(what) + ": only spheres in R^3 are supported");
    }
    static_cast<void>(WeightMeasure{sphere});
}

Vec3 meridian_point(const SphereMeasure& sphere, double longitude, double theta) {
    const double st = std::sin(theta);
    return {sphere.center[0] + sphere.radius * st * std::cos(longitude),
            sphere.center[1] + sphere.radius * st * std::sin(longitude),
            sphere.center[2] + sphere.radius * std::cos(theta)};
}

} // namespace

std::vector<int> HistogramDensity::cell_indices(std::uint64_t flat) const {
    return unflatten(flat, dim, cells_per_axis);
}

double HistogramDensity::max_cell_fraction() const {
    std::uint64_t best = 0;
    for (const auto& cell : cells) {
        best = std::max(best, cell.second);
    }
    return total == 0 ? 0.0 : static_cast<double>(best) / static_cast<double>(total);
}

HistogramDensity histogram_on_box(const PointSet& samples, std::size_t begin, std::size_t end, const Box& box,
                                  int cells_per_axis) {
    if (cells_per_axis < 2) {
        throw ConfigError("histogram: cells_per_axis must be at least 2");
    }
    if (begin >= end || end > samples.size()) {
        throw UsageError("histogram: empty sample range");
    }
    cell_count(samples.dim, cells_per_axis);
    std::vector<std::uint64_t> flats(end - begin);
    parallel_for(flats.size(), 8192, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            flats[i] = flat_cell(samples[begin + i], box, cells_per_axis);
        }
    });
    std::sort(flats.begin(), flats.end());

    HistogramDensity histogram;
    histogram.dim = samples.dim;
    histogram.box = box;
    histogram.cells_per_axis = cells_per_axis;
    histogram.total = flats.size();
    for (std::size_t i = 0; i < flats.size();) {
        std::size_t j = i;
        while (j < flats.size() && flats[j] == flats[i]) {
            ++j;
        }
        histogram.cells.emplace_back(flats[i], j - i);
        i = j;
    }
    return histogram;
}

HistogramDensity estimate_density(const PointSet& samples, int cells_per_axis) {
    if (samples.size() == 0) {
        throw UsageError("estimate_density: empty sample list");
    }
    Box box{Point(samples.dim, std::numeric_limits<double>::infinity()),
            Point(samples.dim, -std::numeric_limits<double>::infinity())};
    for (double x : samples.coords) {
        if (!std::isfinite(x)) {
            throw UsageError("estimate_density: samples must have finite coordinates");
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto x = samples[i];
        for (std::size_t a = 0; a < samples.dim; ++a) {
            box.lo[a] = std::min(box.lo[a], x[a]);
            box.hi[a] = std::max(box.hi[a], x[a]);
        }
    }
    for (std::size_t a = 0; a < samples.dim; ++a) {
        const double width = box.hi[a] - box.lo[a];
        const double pad = width > 0.0 ? 0.005 * width : 0.005 * std::max(1.0, std::abs(box.lo[a]));
        box.lo[a] -= pad;
        box.hi[a] += pad;
    }
    return histogram_on_box(samples, 0, samples.size(), box, cells_per_axis);
}

std::string histogram_csv(const HistogramDensity& histogram) {
    std::ostringstream out;
    for (std::size_t a = 0; a < histogram.dim; ++a) {
        out << 'i' << a << ',';
    }
    out << "count\n";
    for (const auto& [flat, count] : histogram.cells) {
        for (int index : histogram.cell_indices(flat)) {
            out << index << ',';
        }
        out << count << '\n';
    }
    return out.str();
}

AcDiagnosticReport ac_diagnostic(const PointSet& samples, int cells_per_axis) {
    const HistogramDensity coarse = estimate_density(samples, cells_per_axis);
    const HistogramDensity refined = histogram_on_box(samples, 0, samples.size(), coarse.box, 2 * cells_per_axis);

    AcDiagnosticReport report;
    report.sample_count = samples.size();
    report.cells_per_axis = cells_per_axis;
    report.max_cell_fraction = coarse.max_cell_fraction();
    report.max_cell_fraction_refined = refined.max_cell_fraction();

    const std::size_t half = samples.size() / 2;
    if (half > 0) {
        const HistogramDensity first = histogram_on_box(samples, 0, half, coarse.box, cells_per_axis);
        const HistogramDensity second = histogram_on_box(samples, half, samples.size(), coarse.box, cells_per_axis);
        report.split_half_tv = total_variation(first, second);
    }

    // Largest child count per coarse cell; children of coarse index i are
    // refined indices 2i and 2i+1 along every axis.
    std::unordered_map<std::uint64_t, std::uint64_t> max_child;
    for (const auto& [flat, count] : refined.cells) {
        std::uint64_t parent = 0;
        for (int index : refined.cell_indices(flat)) {
            parent = parent * static_cast<std::uint64_t>(cells_per_axis) + static_cast<std::uint64_t>(index / 2);
        }
        auto& slot = max_child[parent];
        slot = std::max(slot, count);
    }
    const double n = static_cast<double>(samples.size());
    const double mass_threshold = 100.0 / std::sqrt(n);
    for (const auto& [flat, count] : coarse.cells) {
        const double fraction = static_cast<double>(count) / n;
        if (fraction < mass_threshold) {
            continue;
        }
        const double child = static_cast<double>(max_child[flat]) / n;
        if (child > fraction / 1.5) {
            report.atom_suspects.push_back({coarse.cell_indices(flat), fraction, child});
        }
    }
    return report;
}

AcDiagnosticReport ac_diagnostic(const WeightMeasure& measure, std::size_t sample_count, int cells_per_axis,
                                 Seed seed) {
    if (sample_count < 10'000) {
        throw UsageError("ac_diagnostic: sample_count must be at least 10^4");
    }
    AcDiagnosticReport report = ac_diagnostic(sample(measure, seed, sample_count), cells_per_axis);
    report.conv_power_input = measure.as<ConvPower>() != nullptr;
    return report;
}

double tangent_determinant(const CurveMeasure& curve, std::span<const double> params) {
    const std::size_t d = curve.dim;
    if (params.size() != d) {
        throw ConfigError("tangent_determinant: need exactly d parameters");
    }
    if (d == 1) {
        return std::abs(curve_tangent(curve, params[0])[0]);
    }
    std::vector<double> matrix(d * d);
    for (std::size_t j = 0; j < d; ++j) {
        const Point tangent = curve_tangent(curve, params[j]);
        for (std::size_t i = 0; i < d; ++i) {
            matrix[i * d + j] = tangent[i];
        }
    }
    return static_cast<double>(determinant(matrix, d));
}

GeneralPositionReport general_position_check(const WeightMeasure& measure, std::size_t trials, double threshold,
                                             Seed seed) {
    const auto* curve = measure.as<CurveMeasure>();
    if (curve == nullptr) {
        throw UnsupportedError("general_position_check: measure must be a CurveMeasure");
    }
    if (trials == 0) {
        throw UsageError("general_position_check: trials must be positive");
    }
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
        throw ConfigError("general_position_check: threshold must be positive and finite");
    }
    GeneralPositionReport report;
    report.trials = trials;
    report.threshold = threshold;
    report.abs_dets.resize(trials);
    parallel_for(trials, 256, [&](std::size_t begin, std::size_t end) {
        std::vector<double> params(curve->dim);
        for (std::size_t t = begin; t < end; ++t) {
            CounterRng rng(seed, 0, t);
            for (double& r : params) {
                r = sample_curve_parameter(*curve, rng);
            }
            report.abs_dets[t] = std::abs(tangent_determinant(*curve, params));
        }
    });
    report.min_abs_det = *std::min_element(report.abs_dets.begin(), report.abs_dets.end());
    report.failures = static_cast<std::size_t>(
        std::count_if(report.abs_dets.begin(), report.abs_dets.end(), [&](double v) { return v < threshold; }));
    return report;
}

Vec3 sphere_chart_point(const SphereMeasure& sphere, double phi, double psi) {
    const double sp = std::sin(phi);
    return {sphere.center[0] + sphere.radius * std::cos(phi), sphere.center[1] + sphere.radius * sp * std::cos(psi),
            sphere.center[2] + sphere.radius * sp * std::sin(psi)};
}

std::pair<double, double> sphere_chart_angles(const SphereMeasure& sphere, const Vec3& point) {
    Vec3 u;
    for (int a = 0; a < 3; ++a) {
        u[a] = (point[a] - sphere.center[a]) / sphere.radius;
    }
    return {std::acos(std::clamp(u[0], -1.0, 1.0)), std::atan2(u[2], u[1])};
}

SumMapJacobian sum_map_jacobian(double longitude, double theta, double phi, double psi,
                                const SphereMeasure& sphere) {
    require_r3(sphere, "sum_map_jacobian");
    const double r = sphere.radius;
    const double ct = std::cos(theta);
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    SumMapJacobian result;
    result.columns[0] = {r * ct * std::cos(longitude), r * ct * std::sin(longitude), -r * std::sin(theta)};
    result.columns[1] = {-r * sp, r * cp * std::cos(psi), r * cp * std::sin(psi)};
    result.columns[2] = {0.0, -r * sp * std::sin(psi), r * sp * std::cos(psi)};
    result.det = dot3(result.columns[0], cross(result.columns[1], result.columns[2]));
    result.coordinate_singular = std::abs(sp) < 1e-12;
    return result;
}

double sum_map_jacobian_numeric(double longitude, double theta, double phi, double psi,
                                const SphereMeasure& sphere, double h) {
    require_r3(sphere, "sum_map_jacobian_numeric");
    auto sum_map = [&](double t, double f, double s) {
        const Vec3 m = meridian_point(sphere, longitude, t);
        const Vec3 p = sphere_chart_point(sphere, f, s);
        // The center enters both points; the derivative is unaffected.
        return Vec3{m[0] + p[0], m[1] + p[1], m[2] + p[2]};
    };
    auto difference = [&](const Vec3& plus, const Vec3& minus) {
        return Vec3{(plus[0] - minus[0]) / (2 * h), (plus[1] - minus[1]) / (2 * h), (plus[2] - minus[2]) / (2 * h)};
    };
    const Vec3 d_theta = difference(sum_map(theta + h, phi, psi), sum_map(theta - h, phi, psi));
    const Vec3 d_phi = difference(sum_map(theta, phi + h, psi), sum_map(theta, phi - h, psi));
    const Vec3 d_psi = difference(sum_map(theta, phi, psi + h), sum_map(theta, phi, psi - h));
    return dot3(d_theta, cross(d_phi, d_psi));
}

double default_degeneracy_threshold(const SphereMeasure& sphere) {
    return 1e-6 * sphere.radius * sphere.radius * sphere.radius;
}

JacobianScanResult jacobian_scan(const SphereMeasure& sphere, std::size_t trials, double degeneracy_threshold,
                                 Seed seed) {
    require_r3(sphere, "jacobian_scan");
    if (trials < 1000) {
        throw UsageError("jacobian_scan: trials must be at least 1000");
    }
    if (!(degeneracy_threshold > 0.0) || !std::isfinite(degeneracy_threshold)) {
        throw ConfigError("jacobian_scan: degeneracy threshold must be positive and finite");
    }
    std::vector<double> abs_det(trials);
    parallel_for(trials, 4096, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            CounterRng rng(seed, 0, t);
            const double longitude = kTwoPi * rng.uniform();
            const double theta = std::numbers::pi * rng.uniform();
            const double phi = std::acos(1.0 - 2.0 * rng.uniform());
            const double psi = kTwoPi * rng.uniform();
            abs_det[t] = std::abs(sum_map_jacobian(longitude, theta, phi, psi, sphere).det);
        }
    });
    JacobianScanResult result;
    result.trials = trials;
    result.threshold = degeneracy_threshold;
    result.min_abs_det = *std::min_element(abs_det.begin(), abs_det.end());
    result.degenerate = static_cast<std::size_t>(
        std::count_if(abs_det.begin(), abs_det.end(), [&](double v) { return v < degeneracy_threshold; }));
    return result;
}

DisintegrationResult disintegration_test(const SphereMeasure& sphere, std::size_t sample_count, Seed seed,
                                         ColatitudeLaw law) {
    require_r3(sphere, "disintegration_test");
    if (sample_count < 10'000) {
        throw UsageError("disintegration_test: sample_count must be at least 10^4");
    }
    const PointSet direct = sample(WeightMeasure{sphere}, seed, sample_count);
    PointSet layered;
    layered.dim = 3;
    layered.coords.resize(3 * sample_count);
    parallel_for(sample_count, 4096, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng(seed, 1, i);
            const double longitude = kTwoPi * rng.uniform();
            const double u = rng.uniform();
            const double theta = law == ColatitudeLaw::Sine ? std::acos(1.0 - 2.0 * u) : std::numbers::pi * u;
            const Vec3 p = meridian_point(sphere, longitude, theta);
            std::copy(p.begin(), p.end(), layered[i].begin());
        }
    });

    DisintegrationResult result;
    result.sample_count = sample_count;
    for (std::size_t a = 0; a < 3; ++a) {
        std::vector<double> x(sample_count);
        std::vector<double> y(sample_count);
        for (std::size_t i = 0; i < sample_count; ++i) {
            x[i] = direct[i][a];
            y[i] = layered[i][a];
        }
        result.ks[a] = ks_two_sample(x, y);
        result.max_ks = std::max(result.max_ks, result.ks[a]);
    }
    result.critical_value = ks_two_sample_critical(result.alpha, sample_count, sample_count);
    return result;
}

} // namespace ergolab

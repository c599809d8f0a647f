#pragma once

#include "ergolab/measures.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ergolab {

/// Empirical histogram on a regular grid over `box`. Only occupied cells
/// are stored, sorted by row-major flat index.
struct HistogramDensity {
    std::size_t dim = 0;
    Box box;
    int cells_per_axis = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> cells;
    std::uint64_t total = 0;

    std::vector<int> cell_indices(std::uint64_t flat) const;
    double max_cell_fraction() const;
};

/// Histogram over the tight bounding box of `samples` widened by 1%.
HistogramDensity estimate_density(const PointSet& samples, int cells_per_axis);

/// Histogram of samples [begin, end) on a given box.
HistogramDensity histogram_on_box(const PointSet& samples, std::size_t begin, std::size_t end, const Box& box,
                                  int cells_per_axis);

/// Comma-separated export: one row per occupied cell, columns i0..i{d-1},count.
std::string histogram_csv(const HistogramDensity& histogram);

struct AtomSuspect {
    std::vector<int> cell;
    double fraction = 0.0;
    /// Largest child fraction after halving the cell width.
    double refined_fraction = 0.0;
};

struct AcDiagnosticReport {
    double max_cell_fraction = 0.0;
    double max_cell_fraction_refined = 0.0;
    double split_half_tv = 0.0;
    std::vector<AtomSuspect> atom_suspects;
    std::size_t sample_count = 0;
    int cells_per_axis = 0;
    /// False when the measure was not a convolution power; the diagnostic
    /// is still computed.
    bool conv_power_input = true;
};

/// Diagnostics for absolute continuity computed on a fixed sample set:
/// coarse and refined maximum cell mass, split-half total variation and
/// cells whose mass does not shrink by 1.5x under refinement while holding
/// at least 100/sqrt(N) of the mass.
AcDiagnosticReport ac_diagnostic(const PointSet& samples, int cells_per_axis);

/// Samples the measure and runs the diagnostic. Requires sample_count >= 10^4.
AcDiagnosticReport ac_diagnostic(const WeightMeasure& measure, std::size_t sample_count, int cells_per_axis,
                                 Seed seed);

struct GeneralPositionReport {
    std::size_t trials = 0;
    std::size_t failures = 0;
    double min_abs_det = 0.0;
    double threshold = 0.0;
    std::vector<double> abs_dets;
};

/// Signed determinant of the d x d matrix whose columns are the curve
/// tangents at the given parameters. For d = 1 returns the tangent length.
double tangent_determinant(const CurveMeasure& curve, std::span<const double> params);

/// Draws d curve parameters per trial from the curve's parameter law and
/// records |det| of the tangent matrix.
GeneralPositionReport general_position_check(const WeightMeasure& curve, std::size_t trials, double threshold,
                                             Seed seed);

using Vec3 = std::array<double, 3>;

/// Sphere point in the chart polar about +x:
/// center + R (cos phi, sin phi cos psi, sin phi sin psi).
Vec3 sphere_chart_point(const SphereMeasure& sphere, double phi, double psi);

/// Inverse of sphere_chart_point for a point on the sphere.
std::pair<double, double> sphere_chart_angles(const SphereMeasure& sphere, const Vec3& point);

struct SumMapJacobian {
    double det = 0.0;
    /// Columns d/dtheta, d/dphi, d/dpsi of m(theta) + p(phi, psi).
    std::array<Vec3, 3> columns{};
    /// The sphere chart degenerates (sin phi ~ 0).
    bool coordinate_singular = false;
};

/// Jacobian of (theta, phi, psi) -> m(theta) + p(phi, psi), where m is the
/// semimeridian point at `longitude` and p the sphere point in the chart above.
SumMapJacobian sum_map_jacobian(double longitude, double theta, double phi, double psi,
                                const SphereMeasure& sphere);

/// Same determinant from central differences with step h.
double sum_map_jacobian_numeric(double longitude, double theta, double phi, double psi,
                                const SphereMeasure& sphere, double h = 1e-6);

/// Default degeneracy threshold 1e-6 R^3.
double default_degeneracy_threshold(const SphereMeasure& sphere);

struct JacobianScanResult {
    std::size_t trials = 0;
    std::size_t degenerate = 0;
    double threshold = 0.0;
    double min_abs_det = 0.0;

    double fraction() const { return trials == 0 ? 0.0 : static_cast<double>(degenerate) / trials; }
};

/// Fraction of (longitude, theta, phi, psi) draws from the product law
/// (uniform longitude, uniform semimeridian parameter, uniform sphere point)
/// with |det| below the threshold. Requires trials >= 1000.
JacobianScanResult jacobian_scan(const SphereMeasure& sphere, std::size_t trials, double degeneracy_threshold,
                                 Seed seed);

enum class ColatitudeLaw {
    /// sin(theta)/2, the conditional law of the sphere measure.
    Sine,
    /// Uniform on [0, pi]; a deliberately wrong law.
    Uniform,
};

struct DisintegrationResult {
    std::array<double, 3> ks{};
    double max_ks = 0.0;
    double critical_value = 0.0;
    double alpha = 0.01;
    std::size_t sample_count = 0;

    bool passes() const { return max_ks < critical_value; }
};

/// Compares uniform sphere draws with draws built as (uniform longitude,
/// colatitude from `law` along that semimeridian) by a two-sample KS test on
/// each coordinate. Requires sample_count >= 10^4 and a sphere in R^3.
DisintegrationResult disintegration_test(const SphereMeasure& sphere, std::size_t sample_count, Seed seed,
                                         ColatitudeLaw law = ColatitudeLaw::Sine);

} // namespace ergolab

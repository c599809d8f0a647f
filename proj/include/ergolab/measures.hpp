#pragma once

#include "ergolab/rng.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ergolab {

using Complex = std::complex<double>;
using Point = std::vector<double>;

/// Axis-aligned box. An axis with lo == hi is degenerate.
struct Box {
    Point lo;
    Point hi;

    std::size_t dim() const { return lo.size(); }
};

/// Points stored row-major, `dim` coordinates each.
struct PointSet {
    std::size_t dim = 0;
    std::vector<double> coords;

    std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
    std::span<const double> operator[](std::size_t i) const { return {coords.data() + i * dim, dim}; }
    std::span<double> operator[](std::size_t i) { return {coords.data() + i * dim, dim}; }
};

/// Nodes and weights for integrating against a measure. Weights are
/// nonnegative and sum to one.
struct QuadratureRule {
    PointSet points;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
};

using DensityFn = std::function<double(std::span<const double>)>;
using FourierFn = std::function<Complex(std::span<const double>)>;

/// Independent per-axis inverse CDFs (u in (0,1) -> coordinate).
struct InverseCdfSampler {
    std::vector<std::function<double(double)>> per_axis;
};

/// Uniform proposals over the support box, accepted with probability
/// density / density_bound.
struct RejectionSampler {
    double density_bound = 0.0;
};

/// Measure with a density against Lebesgue measure on the nondegenerate
/// axes of `support`. Degenerate axes (lo == hi) carry a Dirac factor.
struct AcDensity {
    std::string name;
    Box support;
    DensityFn density;
    std::variant<InverseCdfSampler, RejectionSampler> sampler;
    /// Optional exact transform; when empty the transform is computed by
    /// quadrature.
    FourierFn closed_form_fourier;
};

/// Measure carried by a smooth curve, with density `weight` against the
/// curve parameter on [param_lo, param_hi].
struct CurveMeasure {
    std::string name;
    std::size_t dim = 0;
    double param_lo = 0.0;
    double param_hi = 1.0;
    std::function<Point(double)> curve;
    /// Optional analytic tangent; central differences are used otherwise.
    std::function<Point(double)> tangent;
    std::function<double(double)> weight;
    /// Optional inverse CDF of the parameter law; rejection sampling
    /// against weight_bound otherwise.
    std::function<double(double)> param_inverse_cdf;
    double weight_bound = 0.0;
};

/// Normalized surface measure on the sphere |x - center| = radius.
struct SphereMeasure {
    Point center;
    double radius = 1.0;

    std::size_t ambient_dim() const { return center.size(); }
};

class WeightMeasure;

/// n-fold convolution power of `base`.
struct ConvPower {
    std::shared_ptr<const WeightMeasure> base;
    int n = 1;
};

/// Normalized Borel measure on R^d. Construction validates the variant's
/// invariants (positivity, unit mass, nondegenerate parameter ranges) and
/// throws ConfigError on violation.
class WeightMeasure {
public:
    using Variant = std::variant<AcDensity, CurveMeasure, SphereMeasure, ConvPower>;

    explicit WeightMeasure(AcDensity density);
    explicit WeightMeasure(CurveMeasure curve);
    explicit WeightMeasure(SphereMeasure sphere);
    explicit WeightMeasure(ConvPower power);

    std::size_t dim() const { return dim_; }
    const Variant& variant() const { return variant_; }
    std::string describe() const;

    template <class T>
    const T* as() const {
        return std::get_if<T>(&variant_);
    }

private:
    Variant variant_;
    std::size_t dim_ = 0;
};

// Built-in measures ---------------------------------------------------------

/// Uniform probability density on [lo, hi]; degenerate axes become Dirac.
WeightMeasure uniform_box(Point lo, Point hi);
/// chi_[0,1] on the line.
WeightMeasure interval_density();
/// delta_a realized as a degenerate AcDensity.
WeightMeasure point_mass(Point a);
/// Moment curve r -> (r, r^2, ..., r^d), r uniform on (0, 1).
WeightMeasure make_moment_curve(std::size_t d);
/// Straight line r -> (r, r, ..., r) in R^d, r uniform on (0, 1).
WeightMeasure make_straight_line(std::size_t d);
WeightMeasure make_sphere(Point center, double radius);
WeightMeasure make_conv_power(const WeightMeasure& base, int n);

/// Semimeridian through the equator point at the given longitude, as a
/// CurveMeasure over colatitude theta in [0, pi] with uniform parameter
/// weight 1/pi. Requires an ambient dimension of 3.
WeightMeasure make_semimeridian(double longitude, const SphereMeasure& sphere);

/// Same curve with the colatitude density sin(theta)/2, the conditional
/// law of the uniform sphere measure given the longitude.
WeightMeasure make_semimeridian_conditional(double longitude, const SphereMeasure& sphere);

// Operations ----------------------------------------------------------------

/// `count` i.i.d. draws. Sample i uses its own counter-keyed stream, so the
/// output is bitwise identical for any thread count.
PointSet sample(const WeightMeasure& measure, Seed seed, std::size_t count);

/// One draw written to `out` (size dim()).
void sample_one(const WeightMeasure& measure, CounterRng& rng, std::span<double> out);

/// Draw of the curve parameter from its parameter law.
double sample_curve_parameter(const CurveMeasure& curve, CounterRng& rng);

/// Tangent of a curve at parameter r (analytic when available).
Point curve_tangent(const CurveMeasure& curve, double r);

/// Deterministic rule; `resolution` is the number of 8-point Gauss panels
/// per integration axis. Rejects ConvPower with n >= 2.
QuadratureRule quadrature_nodes(const WeightMeasure& measure, int resolution);

/// Panels per axis that keep the phase of exp(2 pi i xi.r) below one turn
/// per panel for |xi| <= cycles_per_unit.
int resolution_for_bandwidth(const WeightMeasure& measure, double cycles_per_unit);

/// Fourier transform nu^(xi) = integral of exp(2 pi i xi.r) d nu(r).
Complex fourier(const WeightMeasure& measure, std::span<const double> xi);

struct FourierEstimate {
    Complex value;
    std::size_t nodes = 0;
    /// False when the node cap was reached before two successive
    /// refinements agreed to the tolerance.
    bool converged = true;
};

/// Quadrature evaluation of the transform with resolution doubling until
/// successive values agree to `tolerance` or the rule exceeds 2^20 nodes.
FourierEstimate fourier_by_quadrature(const WeightMeasure& measure, std::span<const double> xi,
                                      double tolerance = 1e-8);

/// Quadrature of g against the measure.
Complex integrate(const QuadratureRule& rule, const std::function<Complex(std::span<const double>)>& g);

inline constexpr std::size_t kQuadratureNodeCap = std::size_t{1} << 20;

} // namespace ergolab

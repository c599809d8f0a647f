#include "ergolab/measures.hpp"

#include "ergolab/error.hpp"
#include "ergolab/numerics.hpp"
#include "ergolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ergolab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMassTolerance = 1e-9;
constexpr std::size_t kRuleSizeLimit = std::size_t{1} << 26;

bool is_degenerate_axis(const Box& box, std::size_t axis) { return box.lo[axis] == box.hi[axis]; }

std::size_t checked_pow(std::size_t base, std::size_t exponent) {
    std::size_t result = 1;
    for (std::size_t i = 0; i < exponent; ++i) {
        if (result > kRuleSizeLimit * 64 / std::max<std::size_t>(base, 1)) {
            return kRuleSizeLimit * 64;
        }
        result *= base;
    }
    return result;
}

std::size_t nondegenerate_axes(const Box& box) {
    std::size_t count = 0;
    for (std::size_t a = 0; a < box.dim(); ++a) {
        count += is_degenerate_axis(box, a) ? 0 : 1;
    }
    return count;
}

// Unnormalized tensor rule for an AcDensity; weights include the density.
QuadratureRule raw_box_rule(const AcDensity& density, int panels) {
    const std::size_t d = density.support.dim();
    std::vector<Rule1d> axes(d);
    for (std::size_t a = 0; a < d; ++a) {
        if (is_degenerate_axis(density.support, a)) {
            axes[a] = Rule1d{{density.support.lo[a]}, {1.0}};
        } else {
            axes[a] = composite_gauss(density.support.lo[a], density.support.hi[a], panels);
        }
    }
    std::size_t total = 1;
    for (const auto& axis : axes) {
        total *= axis.nodes.size();
    }
    QuadratureRule rule;
    rule.points.dim = d;
    rule.points.coords.resize(total * d);
    rule.weights.resize(total);
    parallel_for(total, 4096, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> digit(d);
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t rest = i;
            for (std::size_t a = d; a-- > 0;) {
                digit[a] = rest % axes[a].nodes.size();
                rest /= axes[a].nodes.size();
            }
            auto point = rule.points[i];
            double w = 1.0;
            for (std::size_t a = 0; a < d; ++a) {
                point[a] = axes[a].nodes[digit[a]];
                w *= axes[a].weights[digit[a]];
            }
            rule.weights[i] = w * density.density(point);
        }
    });
    return rule;
}

QuadratureRule raw_curve_rule(const CurveMeasure& curve, int panels) {
    const Rule1d param = composite_gauss(curve.param_lo, curve.param_hi, panels);
    QuadratureRule rule;
    rule.points.dim = curve.dim;
    rule.points.coords.resize(param.nodes.size() * curve.dim);
    rule.weights.resize(param.nodes.size());
    for (std::size_t i = 0; i < param.nodes.size(); ++i) {
        const Point p = curve.curve(param.nodes[i]);
        std::copy(p.begin(), p.end(), rule.points[i].begin());
        rule.weights[i] = param.weights[i] * curve.weight(param.nodes[i]);
    }
    return rule;
}

double sum_of(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    return total;
}

// Mass by tensor Gauss rules of increasing size, stopping when successive
// values agree to 1e-12 or the rule would exceed the node cap.
template <class RawRule, class Count>
double converged_mass(RawRule&& raw, Count&& node_count) {
    int panels = 1;
    double previous = sum_of(raw(panels).weights);
    while (node_count(2 * panels) <= kQuadratureNodeCap) {
        panels *= 2;
        const double current = sum_of(raw(panels).weights);
        if (std::abs(current - previous) <= 1e-12) {
            return current;
        }
        previous = current;
    }
    return previous;
}

void normalize(QuadratureRule& rule) {
    const double total = sum_of(rule.weights);
    if (!(total > 0.0)) {
        throw ConfigError("quadrature: measure has zero mass on its support");
    }
    for (double& w : rule.weights) {
        w /= total;
    }
}

std::size_t node_count(const WeightMeasure& measure, int panels) {
    const std::size_t per_axis = 8 * static_cast<std::size_t>(panels);
    if (const auto* density = measure.as<AcDensity>()) {
        return checked_pow(per_axis, nondegenerate_axes(density->support));
    }
    if (measure.as<CurveMeasure>() != nullptr) {
        return per_axis;
    }
    if (const auto* sphere = measure.as<SphereMeasure>()) {
        return checked_pow(per_axis, sphere->ambient_dim() - 1);
    }
    return node_count(*measure.as<ConvPower>()->base, panels);
}

// Point of the unit sphere S^{n-1} from polar angles theta_1..theta_{n-2}
// and azimuth phi; for n = 3 this is (sin t cos p, sin t sin p, cos t).
void unit_sphere_point(std::span<const double> polar, double azimuth, std::span<double> out) {
    const std::size_t n = out.size();
    if (n == 2) {
        out[0] = std::cos(azimuth);
        out[1] = std::sin(azimuth);
        return;
    }
    out[n - 1] = std::cos(polar[0]);
    const double s = std::sin(polar[0]);
    unit_sphere_point(polar.subspan(1), azimuth, out.first(n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        out[i] *= s;
    }
}

QuadratureRule sphere_rule(const SphereMeasure& sphere, int panels) {
    const std::size_t n = sphere.ambient_dim();
    const std::size_t polar_count = n - 2;
    const std::size_t azimuth_nodes = 8 * static_cast<std::size_t>(panels);

    std::vector<Rule1d> polar(polar_count);
    for (std::size_t j = 0; j < polar_count; ++j) {
        // Angle j carries the weight sin^{n-2-j}.
        Rule1d rule = composite_gauss(0.0, std::numbers::pi, panels);
        const double power = static_cast<double>(n - 2 - j);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            rule.weights[i] *= std::pow(std::sin(rule.nodes[i]), power);
        }
        const double total = sum_of(rule.weights);
        for (double& w : rule.weights) {
            w /= total;
        }
        polar[j] = std::move(rule);
    }

    std::size_t total = azimuth_nodes;
    for (const auto& rule : polar) {
        total *= rule.nodes.size();
    }
    QuadratureRule rule;
    rule.points.dim = n;
    rule.points.coords.resize(total * n);
    rule.weights.resize(total);
    parallel_for(total, 4096, [&](std::size_t begin, std::size_t end) {
        std::vector<double> angles(polar_count);
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t rest = i;
            const std::size_t a = rest % azimuth_nodes;
            rest /= azimuth_nodes;
            double w = 1.0 / static_cast<double>(azimuth_nodes);
            for (std::size_t j = polar_count; j-- > 0;) {
                const std::size_t k = rest % polar[j].nodes.size();
                rest /= polar[j].nodes.size();
                angles[j] = polar[j].nodes[k];
                w *= polar[j].weights[k];
            }
            auto point = rule.points[i];
            unit_sphere_point(angles, kTwoPi * static_cast<double>(a) / static_cast<double>(azimuth_nodes),
                              point);
            for (std::size_t c = 0; c < n; ++c) {
                point[c] = sphere.center[c] + sphere.radius * point[c];
            }
            rule.weights[i] = w;
        }
    });
    return rule;
}

double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// sin(x)/x with the removable singularity filled in.
double sinc(double x) {
    if (std::abs(x) < 1e-8) {
        return 1.0 - x * x / 6.0;
    }
    return std::sin(x) / x;
}

Complex sphere_fourier(const SphereMeasure& sphere, std::span<const double> xi) {
    const double rho = kTwoPi * sphere.radius * euclidean_norm(xi);
    const std::size_t n = sphere.ambient_dim();
    double radial = 1.0;
    if (n == 3) {
        radial = sinc(rho);
    } else if (rho > 1e-8) {
        const double nu = 0.5 * static_cast<double>(n) - 1.0;
        radial = std::tgamma(0.5 * static_cast<double>(n)) * std::pow(2.0 / rho, nu) *
                 std::cyl_bessel_j(nu, rho);
    }
    const double phase = kTwoPi * dot(xi, sphere.center);
    return radial * Complex(std::cos(phase), std::sin(phase));
}

void validate(const AcDensity& density) {
    const Box& box = density.support;
    if (box.dim() == 0 || box.hi.size() != box.dim()) {
        throw ConfigError("AcDensity: support box must have matching nonempty lo/hi");
    }
    for (std::size_t a = 0; a < box.dim(); ++a) {
        if (!std::isfinite(box.lo[a]) || !std::isfinite(box.hi[a]) || box.hi[a] < box.lo[a]) {
            throw ConfigError("AcDensity: support box must be finite with lo <= hi (zero-measure support)");
        }
    }
    if (!density.density) {
        throw ConfigError("AcDensity: density function missing");
    }
    if (const auto* icdf = std::get_if<InverseCdfSampler>(&density.sampler)) {
        if (icdf->per_axis.size() != box.dim()) {
            throw ConfigError("AcDensity: inverse-CDF sampler needs one function per axis");
        }
    } else if (!(std::get<RejectionSampler>(density.sampler).density_bound > 0.0)) {
        throw ConfigError("AcDensity: rejection sampler needs a positive density bound");
    }
    const std::size_t free_axes = nondegenerate_axes(box);
    const double mass = converged_mass([&](int p) { return raw_box_rule(density, p); },
                                       [&](int p) { return checked_pow(8 * std::size_t(p), free_axes); });
    if (mass == 0.0) {
        throw ConfigError("AcDensity '" + density.name + "': zero-measure support");
    }
    if (!(std::abs(mass - 1.0) <= kMassTolerance)) {
        std::ostringstream msg;
        msg << "AcDensity '" << density.name << "': non-normalizable weight, quadrature mass " << mass;
        throw ConfigError(msg.str());
    }
}

void validate(const CurveMeasure& curve) {
    if (curve.dim == 0) {
        throw ConfigError("CurveMeasure: dimension must be positive");
    }
    if (!std::isfinite(curve.param_lo) || !std::isfinite(curve.param_hi) || !(curve.param_lo < curve.param_hi)) {
        throw ConfigError("CurveMeasure: parameter range must be a finite interval of positive length");
    }
    if (!curve.curve || !curve.weight) {
        throw ConfigError("CurveMeasure: curve and weight functions are required");
    }
    if (curve.curve(curve.param_lo).size() != curve.dim) {
        throw ConfigError("CurveMeasure: curve returns the wrong number of coordinates");
    }
    if (!curve.param_inverse_cdf && !(curve.weight_bound > 0.0)) {
        throw ConfigError("CurveMeasure: needs an inverse CDF or a positive weight bound");
    }
    const QuadratureRule probe = raw_curve_rule(curve, 16);
    for (double w : probe.weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw ConfigError("CurveMeasure '" + curve.name + "': weight must be finite and nonnegative");
        }
    }
    const double mass = converged_mass([&](int p) { return raw_curve_rule(curve, p); },
                                       [](int p) { return 8 * std::size_t(p); });
    if (mass == 0.0) {
        throw ConfigError("CurveMeasure '" + curve.name + "': zero-measure support");
    }
    if (!(std::abs(mass - 1.0) <= kMassTolerance)) {
        std::ostringstream msg;
        msg << "CurveMeasure '" << curve.name << "': non-normalizable weight, quadrature mass " << mass;
        throw ConfigError(msg.str());
    }
}

void validate(const SphereMeasure& sphere) {
    if (sphere.ambient_dim() < 2) {
        throw ConfigError("SphereMeasure: ambient dimension must be at least 2");
    }
    if (!(sphere.radius > 0.0) || !std::isfinite(sphere.radius)) {
        throw ConfigError("SphereMeasure: radius must be positive and finite");
    }
    for (double c : sphere.center) {
        if (!std::isfinite(c)) {
            throw ConfigError("SphereMeasure: center must be finite");
        }
    }
}

} // namespace

WeightMeasure::WeightMeasure(AcDensity density) {
    validate(density);
    dim_ = density.support.dim();
    variant_ = std::move(density);
}

WeightMeasure::WeightMeasure(CurveMeasure curve) {
    validate(curve);
    dim_ = curve.dim;
    variant_ = std::move(curve);
}

WeightMeasure::WeightMeasure(SphereMeasure sphere) {
    validate(sphere);
    dim_ = sphere.ambient_dim();
    variant_ = std::move(sphere);
}

WeightMeasure::WeightMeasure(ConvPower power) {
    if (!power.base) {
        throw ConfigError("ConvPower: base measure missing");
    }
    if (power.n < 1) {
        throw ConfigError("ConvPower: n must be at least 1");
    }
    dim_ = power.base->dim();
    variant_ = std::move(power);
}

std::string WeightMeasure::describe() const {
    std::ostringstream out;
    if (const auto* density = as<AcDensity>()) {
        out << "AcDensity(" << density->name << ", d=" << dim_ << ")";
    } else if (const auto* curve = as<CurveMeasure>()) {
        out << "CurveMeasure(" << curve->name << ", d=" << dim_ << ")";
    } else if (const auto* sphere = as<SphereMeasure>()) {
        out << "SphereMeasure(ambient=" << dim_ << ", radius=" << sphere->radius << ")";
    } else {
        const auto& power = *as<ConvPower>();
        out << "ConvPower(" << power.base->describe() << ", n=" << power.n << ")";
    }
    return out.str();
}

// Built-ins -----------------------------------------------------------------

WeightMeasure uniform_box(Point lo, Point hi) {
    if (lo.size() != hi.size() || lo.empty()) {
        throw ConfigError("uniform_box: lo and hi must have equal nonzero length");
    }
    for (std::size_t a = 0; a < lo.size(); ++a) {
        if (!(hi[a] >= lo[a])) {
            throw ConfigError("uniform_box: zero-measure support (hi < lo)");
        }
    }
    double volume = 1.0;
    for (std::size_t a = 0; a < lo.size(); ++a) {
        if (hi[a] > lo[a]) {
            volume *= hi[a] - lo[a];
        }
    }
    AcDensity density;
    density.name = "uniform-box";
    density.support = Box{lo, hi};
    density.density = [lo, hi, value = 1.0 / volume](std::span<const double> x) {
        for (std::size_t a = 0; a < x.size(); ++a) {
            if (x[a] < lo[a] || x[a] > hi[a]) {
                return 0.0;
            }
        }
        return value;
    };
    InverseCdfSampler sampler;
    for (std::size_t a = 0; a < lo.size(); ++a) {
        sampler.per_axis.emplace_back([l = lo[a], h = hi[a]](double u) { return l + u * (h - l); });
    }
    density.sampler = std::move(sampler);
    density.closed_form_fourier = [lo, hi](std::span<const double> xi) {
        Complex value{1.0, 0.0};
        for (std::size_t a = 0; a < xi.size(); ++a) {
            const double width = hi[a] - lo[a];
            const double phase = std::numbers::pi * xi[a] * (lo[a] + hi[a]);
            value *= sinc(std::numbers::pi * xi[a] * width) * Complex(std::cos(phase), std::sin(phase));
        }
        return value;
    };
    return WeightMeasure(std::move(density));
}

WeightMeasure interval_density() { return uniform_box({0.0}, {1.0}); }

WeightMeasure point_mass(Point a) {
    Point hi = a;
    return uniform_box(std::move(a), std::move(hi));
}

WeightMeasure make_moment_curve(std::size_t d) {
    if (d == 0) {
        throw ConfigError("make_moment_curve: d must be at least 1");
    }
    CurveMeasure curve;
    curve.name = "moment-curve";
    curve.dim = d;
    curve.param_lo = 0.0;
    curve.param_hi = 1.0;
    curve.curve = [d](double r) {
        Point p(d);
        double power = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            power *= r;
            p[i] = power;
        }
        return p;
    };
    curve.tangent = [d](double r) {
        Point v(d);
        double power = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            v[i] = static_cast<double>(i + 1) * power;
            power *= r;
        }
        return v;
    };
    curve.weight = [](double) { return 1.0; };
    curve.param_inverse_cdf = [](double u) { return u; };
    curve.weight_bound = 1.0;
    return WeightMeasure(std::move(curve));
}

WeightMeasure make_straight_line(std::size_t d) {
    if (d == 0) {
        throw ConfigError("make_straight_line: d must be at least 1");
    }
    CurveMeasure curve;
    curve.name = "line";
    curve.dim = d;
    curve.curve = [d](double r) { return Point(d, r); };
    curve.tangent = [d](double) { return Point(d, 1.0); };
    curve.weight = [](double) { return 1.0; };
    curve.param_inverse_cdf = [](double u) { return u; };
    curve.weight_bound = 1.0;
    return WeightMeasure(std::move(curve));
}

WeightMeasure make_sphere(Point center, double radius) {
    return WeightMeasure(SphereMeasure{std::move(center), radius});
}

WeightMeasure make_conv_power(const WeightMeasure& base, int n) {
    return WeightMeasure(ConvPower{std::make_shared<const WeightMeasure>(base), n});
}

namespace {

CurveMeasure semimeridian_curve(double longitude, const SphereMeasure& sphere) {
    if (sphere.ambient_dim() != 3) {
        throw UnsupportedError("semimeridian: only spheres in R^3 are supported");
    }
    validate(sphere);
    CurveMeasure curve;
    curve.name = "semimeridian";
    curve.dim = 3;
    curve.param_lo = 0.0;
    curve.param_hi = std::numbers::pi;
    const double cg = std::cos(longitude);
    const double sg = std::sin(longitude);
    curve.curve = [c = sphere.center, r = sphere.radius, cg, sg](double theta) {
        const double st = std::sin(theta);
        return Point{c[0] + r * st * cg, c[1] + r * st * sg, c[2] + r * std::cos(theta)};
    };
    curve.tangent = [r = sphere.radius, cg, sg](double theta) {
        const double ct = std::cos(theta);
        return Point{r * ct * cg, r * ct * sg, -r * std::sin(theta)};
    };
    return curve;
}

} // namespace

WeightMeasure make_semimeridian(double longitude, const SphereMeasure& sphere) {
    CurveMeasure curve = semimeridian_curve(longitude, sphere);
    curve.weight = [](double) { return 1.0 / std::numbers::pi; };
    curve.param_inverse_cdf = [](double u) { return std::numbers::pi * u; };
    curve.weight_bound = 1.0 / std::numbers::pi;
    return WeightMeasure(std::move(curve));
}

WeightMeasure make_semimeridian_conditional(double longitude, const SphereMeasure& sphere) {
    CurveMeasure curve = semimeridian_curve(longitude, sphere);
    curve.name = "semimeridian-conditional";
    curve.weight = [](double theta) { return 0.5 * std::sin(theta); };
    curve.param_inverse_cdf = [](double u) { return std::acos(1.0 - 2.0 * u); };
    curve.weight_bound = 0.5;
    return WeightMeasure(std::move(curve));
}

// Sampling ------------------------------------------------------------------

double sample_curve_parameter(const CurveMeasure& curve, CounterRng& rng) {
    if (curve.param_inverse_cdf) {
        return curve.param_inverse_cdf(rng.uniform());
    }
    for (int attempt = 0; attempt < 10'000'000; ++attempt) {
        const double r = curve.param_lo + rng.uniform() * (curve.param_hi - curve.param_lo);
        if (rng.uniform() * curve.weight_bound < curve.weight(r)) {
            return r;
        }
    }
    throw ConfigError("CurveMeasure '" + curve.name + "': rejection sampler failed to accept");
}

void sample_one(const WeightMeasure& measure, CounterRng& rng, std::span<double> out) {
    if (const auto* density = measure.as<AcDensity>()) {
        const Box& box = density->support;
        if (const auto* icdf = std::get_if<InverseCdfSampler>(&density->sampler)) {
            for (std::size_t a = 0; a < out.size(); ++a) {
                out[a] = is_degenerate_axis(box, a) ? box.lo[a] : icdf->per_axis[a](rng.uniform());
            }
            return;
        }
        const double bound = std::get<RejectionSampler>(density->sampler).density_bound;
        for (int attempt = 0; attempt < 10'000'000; ++attempt) {
            for (std::size_t a = 0; a < out.size(); ++a) {
                out[a] = box.lo[a] + rng.uniform() * (box.hi[a] - box.lo[a]);
            }
            if (rng.uniform() * bound < density->density(out)) {
                return;
            }
        }
        throw ConfigError("AcDensity '" + density->name + "': rejection sampler failed to accept");
    }
    if (const auto* curve = measure.as<CurveMeasure>()) {
        const Point p = curve->curve(sample_curve_parameter(*curve, rng));
        std::copy(p.begin(), p.end(), out.begin());
        return;
    }
    if (const auto* sphere = measure.as<SphereMeasure>()) {
        double norm = 0.0;
        do {
            for (double& x : out) {
                x = rng.normal();
            }
            norm = euclidean_norm(out);
        } while (norm == 0.0);
        for (std::size_t a = 0; a < out.size(); ++a) {
            out[a] = sphere->center[a] + sphere->radius * (out[a] / norm);
        }
        return;
    }
    const auto& power = *measure.as<ConvPower>();
    std::vector<double> draw(out.size());
    std::fill(out.begin(), out.end(), 0.0);
    for (int j = 0; j < power.n; ++j) {
        sample_one(*power.base, rng, draw);
        for (std::size_t a = 0; a < out.size(); ++a) {
            out[a] += draw[a];
        }
    }
}

PointSet sample(const WeightMeasure& measure, Seed seed, std::size_t count) {
    if (count == 0) {
        throw UsageError("sample: count must be at least 1");
    }
    PointSet points;
    points.dim = measure.dim();
    points.coords.resize(count * points.dim);
    parallel_for(count, 2048, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterRng rng(seed, 0, i);
            sample_one(measure, rng, points[i]);
        }
    });
    return points;
}

Point curve_tangent(const CurveMeasure& curve, double r) {
    if (curve.tangent) {
        return curve.tangent(r);
    }
    constexpr double h = 1e-6;
    const Point plus = curve.curve(r + h);
    const Point minus = curve.curve(r - h);
    Point v(curve.dim);
    for (std::size_t i = 0; i < curve.dim; ++i) {
        v[i] = (plus[i] - minus[i]) / (2.0 * h);
    }
    return v;
}

// Quadrature ----------------------------------------------------------------

QuadratureRule quadrature_nodes(const WeightMeasure& measure, int resolution) {
    if (resolution < 2) {
        throw ConfigError("quadrature_nodes: resolution must be at least 2");
    }
    if (const auto* power = measure.as<ConvPower>()) {
        if (power->n == 1) {
            return quadrature_nodes(*power->base, resolution);
        }
        throw UnsupportedError("quadrature_nodes: ConvPower with n >= 2 has no quadrature rule; "
                               "use sampling or the Fourier factorization");
    }
    if (node_count(measure, resolution) > kRuleSizeLimit) {
        throw ConfigError("quadrature_nodes: rule would exceed 2^26 nodes");
    }
    QuadratureRule rule;
    if (const auto* density = measure.as<AcDensity>()) {
        rule = raw_box_rule(*density, resolution);
    } else if (const auto* curve = measure.as<CurveMeasure>()) {
        rule = raw_curve_rule(*curve, resolution);
    } else {
        return sphere_rule(*measure.as<SphereMeasure>(), resolution);
    }
    normalize(rule);
    return rule;
}

int resolution_for_bandwidth(const WeightMeasure& measure, double cycles_per_unit) {
    double length = 0.0;
    if (const auto* density = measure.as<AcDensity>()) {
        for (std::size_t a = 0; a < density->support.dim(); ++a) {
            length = std::max(length, density->support.hi[a] - density->support.lo[a]);
        }
    } else if (const auto* curve = measure.as<CurveMeasure>()) {
        constexpr int kSegments = 256;
        Point previous = curve->curve(curve->param_lo);
        for (int s = 1; s <= kSegments; ++s) {
            const double r = curve->param_lo + (curve->param_hi - curve->param_lo) * s / kSegments;
            Point current = curve->curve(r);
            double step = 0.0;
            for (std::size_t i = 0; i < current.size(); ++i) {
                step += (current[i] - previous[i]) * (current[i] - previous[i]);
            }
            length += std::sqrt(step);
            previous = std::move(current);
        }
        // Polyline underestimates arc length; keep a margin.
        length *= 1.05;
    } else if (const auto* sphere = measure.as<SphereMeasure>()) {
        length = std::numbers::pi * sphere->radius;
    } else {
        const auto& power = *measure.as<ConvPower>();
        return resolution_for_bandwidth(*power.base, cycles_per_unit * power.n);
    }
    const double panels = std::ceil(std::abs(cycles_per_unit) * length) + 2.0;
    return static_cast<int>(std::min(panels, 1e6));
}

Complex integrate(const QuadratureRule& rule, const std::function<Complex(std::span<const double>)>& g) {
    return deterministic_sum<Complex>(rule.size(), [&](std::size_t i) { return rule.weights[i] * g(rule.points[i]); });
}

namespace {

Complex transform_on_rule(const QuadratureRule& rule, std::span<const double> xi) {
    Complex total{0.0, 0.0};
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double phase = kTwoPi * dot(xi, rule.points[i]);
        total += rule.weights[i] * Complex(std::cos(phase), std::sin(phase));
    }
    return total;
}

Complex power_of(Complex base, int n) {
    Complex result = base;
    for (int j = 1; j < n; ++j) {
        result *= base;
    }
    return result;
}

} // namespace

FourierEstimate fourier_by_quadrature(const WeightMeasure& measure, std::span<const double> xi, double tolerance) {
    if (xi.size() != measure.dim()) {
        throw ConfigError("fourier: frequency dimension does not match the measure");
    }
    if (const auto* power = measure.as<ConvPower>()) {
        FourierEstimate base = fourier_by_quadrature(*power->base, xi, tolerance);
        base.value = power_of(base.value, power->n);
        return base;
    }
    int panels = resolution_for_bandwidth(measure, euclidean_norm(xi));
    bool capped = false;
    while (panels > 2 && node_count(measure, panels) > kQuadratureNodeCap) {
        panels /= 2;
        capped = true;
    }
    panels = std::max(panels, 2);
    FourierEstimate estimate;
    estimate.value = transform_on_rule(quadrature_nodes(measure, panels), xi);
    estimate.nodes = node_count(measure, panels);
    estimate.converged = false;
    if (capped) {
        return estimate;
    }
    while (node_count(measure, 2 * panels) <= kQuadratureNodeCap) {
        panels *= 2;
        const Complex refined = transform_on_rule(quadrature_nodes(measure, panels), xi);
        const bool agree = std::abs(refined - estimate.value) <= tolerance;
        estimate.value = refined;
        estimate.nodes = node_count(measure, panels);
        if (agree) {
            estimate.converged = true;
            break;
        }
    }
    return estimate;
}

Complex fourier(const WeightMeasure& measure, std::span<const double> xi) {
    if (xi.size() != measure.dim()) {
        throw ConfigError("fourier: frequency dimension does not match the measure");
    }
    if (std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; })) {
        return {1.0, 0.0};
    }
    if (const auto* density = measure.as<AcDensity>()) {
        if (density->closed_form_fourier) {
            return density->closed_form_fourier(xi);
        }
        return fourier_by_quadrature(measure, xi).value;
    }
    if (measure.as<CurveMeasure>() != nullptr) {
        return fourier_by_quadrature(measure, xi).value;
    }
    if (const auto* sphere = measure.as<SphereMeasure>()) {
        return sphere_fourier(*sphere, xi);
    }
    const auto& power = *measure.as<ConvPower>();
    return power_of(fourier(*power.base, xi), power.n);
}

} // namespace ergolab

#include "doctest.h"

#include "ergolab/error.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/numerics.hpp"
#include "ergolab/parallel.hpp"

#include <cmath>
#include <numbers>

using namespace ergolab;

namespace {

constexpr double kPi = std::numbers::pi;

// Uniform density on the box without its closed-form transform, so the
// quadrature path is exercised.
WeightMeasure generic_uniform_box(Point lo, Point hi) {
    WeightMeasure reference = uniform_box(lo, hi);
    AcDensity density = *reference.as<AcDensity>();
    density.name = "generic-box";
    density.closed_form_fourier = nullptr;
    return WeightMeasure(std::move(density));
}

// Triangular density 2x on [0, 1], sampled by rejection.
WeightMeasure triangular_density() {
    AcDensity density;
    density.name = "triangular";
    density.support = Box{{0.0}, {1.0}};
    density.density = [](std::span<const double> x) { return 2.0 * x[0]; };
    density.sampler = RejectionSampler{2.0};
    return WeightMeasure(std::move(density));
}

std::vector<WeightMeasure> quadrature_family() {
    return {interval_density(),
            uniform_box({-1.0, 0.0}, {1.0, 0.5}),
            triangular_density(),
            make_moment_curve(2),
            make_moment_curve(3),
            make_semimeridian(0.7, SphereMeasure{{0.0, 0.0, 0.0}, 1.0}),
            make_semimeridian_conditional(1.9, SphereMeasure{{0.5, 0.0, -1.0}, 2.0}),
            make_sphere({0.0, 0.0}, 1.5),
            make_sphere({0.0, 0.0, 0.0}, 1.0),
            make_sphere({1.0, -2.0, 0.5}, 0.75),
            make_sphere({0.0, 0.0, 0.0, 0.0}, 1.0)};
}

double smooth_test_function(std::span<const double> x) {
    double s = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += (0.7 + 0.3 * static_cast<double>(i)) * x[i];
        sq += x[i] * x[i];
    }
    return std::cos(s) + 0.25 * sq;
}

} // namespace

TEST_CASE("sample: sphere draws lie on the sphere") {
    const WeightMeasure sphere = make_sphere({0.0, 0.0, 0.0}, 2.0);
    const PointSet points = sample(sphere, Seed{11}, 1000);
    REQUIRE(points.size() == 1000);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto p = points[i];
        CHECK(std::hypot(p[0], p[1], p[2]) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("sample: uniform sphere in R^3 has uniform height (Archimedes)") {
    const PointSet points = sample(make_sphere({0.0, 0.0, 0.0}, 1.0), Seed{5}, 100'000);
    std::vector<double> z(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        z[i] = points[i][2];
    }
    const double d = ks_one_sample(z, [](double v) { return 0.5 * (v + 1.0); });
    CHECK(d < ks_one_sample_critical(0.01, z.size()));
}

TEST_CASE("sample: convolution of point-like masses concentrates at the sum") {
    const Point a{0.3, -0.2};
    const WeightMeasure narrow = uniform_box({a[0] - 1e-6, a[1] - 1e-6}, {a[0] + 1e-6, a[1] + 1e-6});
    const PointSet points = sample(make_conv_power(narrow, 2), Seed{3}, 500);
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(std::abs(points[i][0] - 2 * a[0]) <= 2e-6);
        CHECK(std::abs(points[i][1] - 2 * a[1]) <= 2e-6);
    }
    const PointSet atom = sample(make_conv_power(point_mass({0.25}), 3), Seed{3}, 10);
    for (double x : atom.coords) {
        CHECK(x == 0.75);
    }
}

TEST_CASE("sample: first coordinate of the moment curve is uniform") {
    const PointSet points = sample(make_moment_curve(2), Seed{2024}, 100'000);
    std::vector<double> first(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        first[i] = points[i][0];
        CHECK(points[i][1] == doctest::Approx(first[i] * first[i]).epsilon(1e-15));
    }
    const double d = ks_one_sample(first, [](double v) { return v; });
    CHECK(d < ks_one_sample_critical(0.01, first.size()));
}

TEST_CASE("sample: rejection sampler follows its density") {
    const PointSet points = sample(triangular_density(), Seed{9}, 50'000);
    std::vector<double> x(points.coords);
    const double d = ks_one_sample(x, [](double v) { return v * v; });
    CHECK(d < ks_one_sample_critical(0.01, x.size()));
}

TEST_CASE("sample: bitwise reproducible across thread counts") {
    const WeightMeasure measure = make_conv_power(make_sphere({0.0, 0.0, 1.0}, 1.0), 3);
    set_thread_count(1);
    const PointSet serial = sample(measure, Seed{77}, 20'000);
    set_thread_count(6);
    const PointSet parallel = sample(measure, Seed{77}, 20'000);
    set_thread_count(1);
    CHECK(serial.coords == parallel.coords);
    CHECK(sample(measure, Seed{78}, 20'000).coords != serial.coords);
}

TEST_CASE("ConvPower with n = 1 behaves like its base") {
    const WeightMeasure base = make_moment_curve(3);
    const WeightMeasure power = make_conv_power(base, 1);
    CHECK(sample(base, Seed{1}, 100).coords == sample(power, Seed{1}, 100).coords);
    const std::vector<double> xi{0.3, -1.2, 2.0};
    CHECK(fourier(base, xi) == fourier(power, xi));
    const QuadratureRule a = quadrature_nodes(base, 4);
    const QuadratureRule b = quadrature_nodes(power, 4);
    CHECK(a.weights == b.weights);
    CHECK(a.points.coords == b.points.coords);
}

TEST_CASE("quadrature_nodes: normalization and closed-form integrals") {
    for (const auto& measure : quadrature_family()) {
        CAPTURE(measure.describe());
        const QuadratureRule rule = quadrature_nodes(measure, 4);
        double total = 0.0;
        for (double w : rule.weights) {
            CHECK(w >= 0.0);
            total += w;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    const QuadratureRule sphere = quadrature_nodes(make_sphere({0.0, 0.0, 0.0}, 1.0), 16);
    double sphere_total = 0.0;
    double z_squared = 0.0;
    for (std::size_t i = 0; i < sphere.size(); ++i) {
        sphere_total += sphere.weights[i];
        z_squared += sphere.weights[i] * sphere.points[i][2] * sphere.points[i][2];
    }
    CHECK(std::abs(sphere_total - 1.0) <= 1e-12);
    CHECK(z_squared == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    auto integral = [](const WeightMeasure& m, auto&& g) {
        const QuadratureRule rule = quadrature_nodes(m, 4);
        double total = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            total += rule.weights[i] * g(rule.points[i]);
        }
        return total;
    };
    CHECK(std::abs(integral(make_moment_curve(2), [](auto x) { return x[0]; }) - 0.5) <= 1e-10);
    CHECK(std::abs(integral(uniform_box({0, 0}, {1, 1}), [](auto x) { return x[0] * x[1]; }) - 0.25) <= 1e-10);
    // Moment curve d=3: E[x1 x2 x3] = E[r^6] = 1/7.
    CHECK(integral(make_moment_curve(3), [](auto x) { return x[0] * x[1] * x[2]; }) ==
          doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    // Semimeridian at longitude 0 on the unit sphere: E[x] = (1/pi) int_0^pi sin = 2/pi.
    CHECK(integral(make_semimeridian(0.0, SphereMeasure{{0, 0, 0}, 1.0}), [](auto x) { return x[0]; }) ==
          doctest::Approx(2.0 / kPi).epsilon(1e-12));
}

TEST_CASE("quadrature_nodes: error paths") {
    CHECK_THROWS_AS(quadrature_nodes(make_conv_power(interval_density(), 2), 4), UnsupportedError);
    CHECK_THROWS_AS(quadrature_nodes(interval_density(), 1), ConfigError);
}

TEST_CASE("fourier: normalization and closed forms") {
    for (const auto& measure : quadrature_family()) {
        const std::vector<double> zero(measure.dim(), 0.0);
        CHECK(fourier(measure, zero) == Complex(1.0, 0.0));
    }
    CHECK(fourier(make_conv_power(make_moment_curve(2), 3), std::vector<double>{0.0, 0.0}) == Complex(1.0, 0.0));

    const std::vector<double> one{1.0};
    CHECK(std::abs(fourier(interval_density(), one)) < 1e-15);
    CHECK(std::abs(fourier_by_quadrature(interval_density(), one).value) < 1e-10);

    const WeightMeasure unit = make_sphere({0.0, 0.0, 0.0}, 1.0);
    const std::vector<double> half{0.3, 0.0, 0.4};
    CHECK(std::abs(fourier(unit, half)) < 1e-15);
    const QuadratureRule rule = quadrature_nodes(unit, 64);
    Complex by_rule{0.0, 0.0};
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double phase = 2 * kPi * (half[0] * rule.points[i][0] + half[2] * rule.points[i][2]);
        by_rule += rule.weights[i] * Complex(std::cos(phase), std::sin(phase));
    }
    CHECK(std::abs(by_rule) < 1e-12);

    // Circle: J0(2 pi R |xi|).
    const WeightMeasure circle = make_sphere({0.0, 0.0}, 1.0);
    const std::vector<double> xi2{0.6, 0.0};
    CHECK(fourier(circle, xi2).real() == doctest::Approx(std::cyl_bessel_j(0.0, 2 * kPi * 0.6)).epsilon(1e-14));
    CHECK(std::abs(fourier_by_quadrature(circle, xi2).value - fourier(circle, xi2)) < 1e-9);
}

TEST_CASE("fourier: convolution power is the power of the transform") {
    const WeightMeasure base = make_moment_curve(2);
    const std::vector<double> xi{0.8, -0.35};
    const Complex b = fourier(base, xi);
    CHECK(fourier(make_conv_power(base, 2), xi) == b * b);
    CHECK(std::abs(fourier(make_conv_power(base, 3), xi) - b * b * b) < 1e-16);
}

TEST_CASE("fourier: closed forms agree with quadrature at random frequencies") {
    const WeightMeasure interval = interval_density();
    const WeightMeasure box = uniform_box({-0.5, 0.25}, {1.0, 0.75});
    const WeightMeasure sphere3 = make_sphere({0.25, -0.5, 1.0}, 1.0);
    const WeightMeasure sphere4 = make_sphere({0.0, 0.0, 0.0, 0.0}, 0.5);
    for (int trial = 0; trial < 100; ++trial) {
        CounterRng rng(Seed{606}, 0, trial);
        const double radius = 10.0 * rng.uniform();
        std::vector<double> xi3(3);
        double norm = 0.0;
        for (double& v : xi3) {
            v = rng.normal();
            norm += v * v;
        }
        for (double& v : xi3) {
            v *= radius / std::sqrt(norm);
        }
        const std::vector<double> xi1{xi3[0]};
        const std::vector<double> xi2{xi3[0], xi3[1]};
        CHECK(std::abs(fourier(interval, xi1) - fourier_by_quadrature(interval, xi1).value) <= 1e-6);
        CHECK(std::abs(fourier(box, xi2) - fourier_by_quadrature(box, xi2).value) <= 1e-6);
        CHECK(std::abs(fourier(sphere3, xi3) - fourier_by_quadrature(sphere3, xi3).value) <= 1e-6);
        if (trial % 10 == 0) {
            const std::vector<double> xi4{xi3[0] * 0.3, xi3[1] * 0.3, xi3[2] * 0.3, 0.2};
            CHECK(std::abs(fourier(sphere4, xi4) - fourier_by_quadrature(sphere4, xi4).value) <= 1e-6);
        }
        CHECK(std::abs(fourier(sphere3, xi3)) <= 1.0 + 1e-15);
    }
}

TEST_CASE("fourier_by_quadrature reports the node cap") {
    const WeightMeasure generic = generic_uniform_box({0, 0, 0}, {1, 1, 1});
    const std::vector<double> far{40.0, 40.0, 40.0};
    const FourierEstimate estimate = fourier_by_quadrature(generic, far);
    CHECK_FALSE(estimate.converged);
    CHECK(estimate.nodes <= kQuadratureNodeCap);

    const std::vector<double> near{0.4, 0.0, 0.0};
    const FourierEstimate good = fourier_by_quadrature(generic, near);
    CHECK(good.converged);
    CHECK(std::abs(good.value - fourier(uniform_box({0, 0, 0}, {1, 1, 1}), near)) < 1e-10);
}

TEST_CASE("sampler and quadrature agree on smooth integrands") {
    std::vector<WeightMeasure> family = quadrature_family();
    family.push_back(generic_uniform_box({0.0, -1.0}, {2.0, 1.0}));
    for (const auto& measure : family) {
        CAPTURE(measure.describe());
        const QuadratureRule rule = quadrature_nodes(measure, 8);
        double quad = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            quad += rule.weights[i] * smooth_test_function(rule.points[i]);
        }
        const PointSet points = sample(measure, Seed{31}, 20'000);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double g = smooth_test_function(points[i]);
            sum += g;
            sum_sq += g * g;
        }
        const double n = static_cast<double>(points.size());
        const double mean = sum / n;
        const double stderr_ = std::sqrt((sum_sq / n - mean * mean) / (n - 1.0));
        CHECK(std::abs(mean - quad) <= 4.0 * stderr_);
    }
}

TEST_CASE("empirical characteristic function of convolution powers") {
    const WeightMeasure base = make_moment_curve(2);
    const WeightMeasure power = make_conv_power(base, 2);
    constexpr std::size_t n = 40'000;
    const PointSet points = sample(power, Seed{4}, n);
    for (int j = 0; j < 20; ++j) {
        CounterRng rng(Seed{8}, 0, j);
        const std::vector<double> xi{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
        Complex ecf{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = 2 * kPi * (xi[0] * points[i][0] + xi[1] * points[i][1]);
            ecf += Complex(std::cos(phase), std::sin(phase));
        }
        ecf /= static_cast<double>(n);
        const Complex b = fourier(base, xi);
        CHECK(std::abs(ecf - b * b) <= 4.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("moment curve") {
    CHECK_THROWS_AS(make_moment_curve(0), ConfigError);
    const WeightMeasure m2 = make_moment_curve(2);
    const WeightMeasure m3 = make_moment_curve(3);
    const auto& c2 = *m2.as<CurveMeasure>();
    CHECK(c2.curve(0.5) == Point{0.5, 0.25});
    const auto& c3 = *m3.as<CurveMeasure>();
    CHECK(curve_tangent(c3, 1.0) == Point{1.0, 2.0, 3.0});
    CHECK(curve_tangent(c3, 0.5) == Point{1.0, 1.0, 0.75});

    // d = 1 is the uniform law on (0, 1): same transform as the interval.
    const std::vector<double> xi{0.37};
    CHECK(std::abs(fourier(make_moment_curve(1), xi) - fourier(interval_density(), xi)) < 1e-12);
}

TEST_CASE("semimeridian") {
    const SphereMeasure unit{{0.0, 0.0, 0.0}, 1.0};
    const WeightMeasure m = make_semimeridian(0.0, unit);
    const auto& curve = *m.as<CurveMeasure>();
    const Point equator = curve.curve(kPi / 2);
    CHECK(equator[0] == doctest::Approx(1.0));
    CHECK(std::abs(equator[1]) < 1e-15);
    CHECK(std::abs(equator[2]) < 1e-15);
    CHECK(curve.curve(0.0) == Point{0.0, 0.0, 1.0});

    double total = 0.0;
    for (double w : quadrature_nodes(m, 4).weights) {
        total += w;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);

    CHECK_THROWS_AS(make_semimeridian(0.0, SphereMeasure{{0, 0, 0, 0}, 1.0}), UnsupportedError);
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(make_sphere({0.0, 0.0, 0.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(make_sphere({0.0, 0.0, 0.0}, -1.0), ConfigError);
    CHECK_THROWS_AS(uniform_box({1.0}, {0.0}), ConfigError);
    CHECK_THROWS_AS(make_conv_power(interval_density(), 0), ConfigError);

    CurveMeasure zero_length;
    zero_length.name = "flat";
    zero_length.dim = 1;
    zero_length.param_lo = 0.5;
    zero_length.param_hi = 0.5;
    zero_length.curve = [](double r) { return Point{r}; };
    zero_length.weight = [](double) { return 1.0; };
    zero_length.weight_bound = 1.0;
    CHECK_THROWS_AS(WeightMeasure{zero_length}, ConfigError);

    CurveMeasure heavy = zero_length;
    heavy.param_hi = 1.0;
    heavy.param_lo = 0.0;
    heavy.weight = [](double) { return 1.5; };
    heavy.weight_bound = 1.5;
    CHECK_THROWS_WITH_AS(WeightMeasure{heavy}, doctest::Contains("non-normalizable"), ConfigError);

    CurveMeasure negative = heavy;
    negative.weight = [](double r) { return 4.0 * r - 1.0; };
    CHECK_THROWS_AS(WeightMeasure{negative}, ConfigError);

    AcDensity empty;
    empty.name = "empty";
    empty.support = Box{{0.0}, {1.0}};
    empty.density = [](std::span<const double>) { return 0.0; };
    empty.sampler = RejectionSampler{1.0};
    CHECK_THROWS_WITH_AS(WeightMeasure{empty}, doctest::Contains("zero-measure"), ConfigError);

    CHECK_THROWS_AS(sample(interval_density(), Seed{1}, 0), UsageError);
}

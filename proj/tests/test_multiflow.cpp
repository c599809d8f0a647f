#include "doctest.h"

#include "ergolab/error.hpp"
#include "ergolab/multiflow.hpp"
#include "ergolab/rng.hpp"

#include <cmath>
#include <numbers>

using namespace ergolab;

namespace {

constexpr double kPi = std::numbers::pi;

double torus_distance(double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
}

TorusMultiflow random_flow(std::size_t D, std::size_t d, CounterRng& rng) {
    std::vector<double> a(D * d);
    for (double& v : a) {
        v = 6.0 * rng.uniform() - 3.0;
    }
    return TorusMultiflow(D, d, a);
}

} // namespace

TEST_CASE("act: examples") {
    const TorusMultiflow flow(2, 1, {1.0, std::sqrt(2.0)});
    const std::vector<double> origin{0.0, 0.0};
    const std::vector<double> half{0.5};
    const Point y = act(flow, half, origin);
    CHECK(y[0] == 0.5);
    CHECK(y[1] == doctest::Approx(0.70710678118654752).epsilon(1e-15));

    const std::vector<double> x{0.3, 0.9};
    const std::vector<double> zero{0.0};
    CHECK(act(flow, zero, x) == Point{0.3, 0.9});

    const std::vector<double> big{1e6 + 0.25};
    const Point far = act(flow, big, x);
    for (double v : far) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }

    std::vector<double> w{-0.25, 3.0, 1.0 - 1e-18};
    wrap_unit(w);
    CHECK(w[0] == 0.75);
    CHECK(w[1] == 0.0);
    CHECK(w[2] < 1.0);

    CHECK_THROWS_AS(TorusMultiflow(2, 1, {1.0}), ConfigError);
    CHECK_THROWS_AS(TorusMultiflow(1, 1, {std::nan("")}), ConfigError);
}

TEST_CASE("act: group law on random triples") {
    for (int trial = 0; trial < 1000; ++trial) {
        CounterRng rng(Seed{314}, 0, trial);
        const std::size_t D = 1 + trial % 3;
        const std::size_t d = 1 + (trial / 3) % 3;
        const TorusMultiflow flow = random_flow(D, d, rng);
        std::vector<double> s1(d), s2(d), sum(d), neg(d), x(D);
        for (std::size_t i = 0; i < d; ++i) {
            s1[i] = 20.0 * rng.uniform() - 10.0;
            s2[i] = 20.0 * rng.uniform() - 10.0;
            sum[i] = s1[i] + s2[i];
            neg[i] = -s1[i];
        }
        for (double& v : x) {
            v = rng.uniform();
        }
        const Point composed = act(flow, s1, act(flow, s2, x));
        const Point direct = act(flow, sum, x);
        const Point back = act(flow, s1, act(flow, neg, x));
        for (std::size_t i = 0; i < D; ++i) {
            CHECK(torus_distance(composed[i], direct[i]) <= 1e-12);
            CHECK(torus_distance(back[i], x[i]) <= 1e-12);
        }
    }
}

TEST_CASE("ergodicity_certificate: examples") {
    const TorusMultiflow irrational(2, 1, {1.0, std::sqrt(2.0)});
    const ErgodicityCertificate ok = ergodicity_certificate(irrational, 50);
    CHECK(ok.passed());
    CHECK(ok.search_radius == 50);
    // Exhaustive high-precision scan: |41 - 29 sqrt 2|.
    CHECK(ok.min_frequency_norm == doctest::Approx(0.012193308819756415).epsilon(1e-9));
    CHECK(ok.minimizer == std::vector<int>{41, -29});
    CHECK(ok.vectors_checked == (101 * 101 - 1) / 2);

    const TorusMultiflow rational(2, 1, {1.0, 1.0});
    const ErgodicityCertificate bad = ergodicity_certificate(rational, 2);
    CHECK_FALSE(bad.passed());
    CHECK(*bad.offending_k == std::vector<int>{1, -1});
    CHECK(bad.min_frequency_norm == 0.0);

    const TorusMultiflow identity(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    for (int k : {1, 3, 7}) {
        const ErgodicityCertificate c = ergodicity_certificate(identity, k);
        CHECK(c.passed());
        CHECK(c.min_frequency_norm == 1.0);
    }

    const TorusMultiflow three(3, 1, {std::sqrt(2.0), std::sqrt(3.0), 1.0});
    const ErgodicityCertificate c3 = ergodicity_certificate(three, 10);
    CHECK(c3.passed());
    CHECK(c3.min_frequency_norm == doctest::Approx(0.0033997883520062724).epsilon(1e-9));
    CHECK(c3.minimizer == std::vector<int>{4, -5, 3});

    CHECK_THROWS_AS(ergodicity_certificate(irrational, 0), ConfigError);
}

TEST_CASE("ergodicity_certificate: budget error carries the partial scan") {
    const TorusMultiflow flow(4, 1, {1.0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0)});
    try {
        ergodicity_certificate(flow, 30, 1e-12, 1000);
        FAIL("expected a budget error");
    } catch (const BudgetError& error) {
        CHECK(error.partial().vectors_checked <= 1000);
        CHECK(error.partial().search_radius < 30);
    }
}

TEST_CASE("ergodicity_certificate: minimum is nonincreasing in K") {
    const TorusMultiflow flow(3, 2, {std::sqrt(2.0), 0.5, std::sqrt(3.0), std::sqrt(7.0), 1.0, -std::sqrt(11.0)});
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 12; ++k) {
        const double value = ergodicity_certificate(flow, k).min_frequency_norm;
        CHECK(value <= previous);
        previous = value;
    }
}

TEST_CASE("evaluate and mean: examples") {
    const TrigObservable constant(2, {{{0, 0}, {3.0, 0.0}}}, true);
    const std::vector<double> x{0.25, 0.7};
    CHECK(evaluate(constant, x) == Complex(3.0, 0.0));

    const TrigObservable single = single_mode_observable({1, 0});
    const Complex v = evaluate(single, x);
    CHECK(std::abs(v.real()) < 1e-15);
    CHECK(v.imag() == doctest::Approx(1.0));

    const TrigObservable cosine(2, {{{1, 0}, {0.5, 0.0}}, {{-1, 0}, {0.5, 0.0}}}, true);
    const Complex c = evaluate(cosine, x);
    CHECK(std::abs(c.real()) < 1e-15);
    CHECK(c.imag() == 0.0);

    CHECK(mean(single) == Complex(0.0, 0.0));
    const TrigObservable shifted(1, {{{0}, {2.0, 1.0}}, {{3}, {0.5, -0.5}}}, false);
    CHECK(mean(shifted) == Complex(2.0, 1.0));

    const TrigObservable five = five_mode_observable(2);
    CHECK(five.modes().size() == 5);
    CHECK(five.real_valued());
    CHECK(mean(five) == Complex(1.0, 0.0));
    const std::vector<double> y{0.1, 0.35};
    const double expected = 1.0 + std::cos(2 * kPi * 0.1) + 0.5 * std::sin(2 * kPi * (0.1 - 0.35));
    CHECK(evaluate(five, y).real() == doctest::Approx(expected).epsilon(1e-14));
    CHECK(evaluate(five, y).imag() == 0.0);

    const std::vector<double> t{0.2};
    const double circle = 1.0 + std::cos(2 * kPi * 0.2) + 0.5 * std::sin(2 * kPi * 0.4);
    CHECK(evaluate(five_mode_observable(1), t).real() == doctest::Approx(circle).epsilon(1e-14));
}

TEST_CASE("TrigObservable validation") {
    CHECK_THROWS_AS(TrigObservable(1, {{{1}, {1.0, 0.0}}, {{1}, {2.0, 0.0}}}, false), ConfigError);
    CHECK_THROWS_AS(TrigObservable(2, {{{1}, {1.0, 0.0}}}, false), ConfigError);
    CHECK_THROWS_AS(TrigObservable(1, {{{1}, {1.0, 0.0}}}, true), ConfigError);
    CHECK_THROWS_AS(TrigObservable(1, {{{1}, {1.0, 1.0}}, {{-1}, {1.0, 1.0}}}, true), ConfigError);
    CHECK_THROWS_AS(TrigObservable(1, {{{0}, {1.0, 1.0}}}, true), ConfigError);
    CHECK_NOTHROW(TrigObservable(1, {{{1}, {1.0, 1.0}}, {{-1}, {1.0, -1.0}}}, true));
}

TEST_CASE("lattice mean is exact for bandlimited observables") {
    for (std::size_t D = 1; D <= 3; ++D) {
        std::vector<TrigMode> modes;
        CounterRng rng(Seed{D}, 0, 0);
        for (int j = 0; j < 6; ++j) {
            std::vector<int> k(D);
            for (int& v : k) {
                v = static_cast<int>(rng.next_u32() % 63) - 31;
            }
            bool duplicate = false;
            for (const auto& m : modes) {
                duplicate = duplicate || m.k == k;
            }
            if (!duplicate) {
                modes.push_back({k, {rng.normal(), rng.normal()}});
            }
        }
        bool has_zero = false;
        for (const auto& m : modes) {
            has_zero = has_zero || std::all_of(m.k.begin(), m.k.end(), [](int v) { return v == 0; });
        }
        if (!has_zero) {
            modes.push_back({std::vector<int>(D, 0), {0.75, -0.5}});
        }
        const TrigObservable obs(D, modes, false);
        CHECK(std::abs(lattice_mean(obs, 64) - mean(obs)) <= 1e-10);
    }
}

TEST_CASE("character equivariance") {
    for (int trial = 0; trial < 200; ++trial) {
        CounterRng rng(Seed{27}, 0, trial);
        const std::size_t D = 1 + trial % 3;
        const std::size_t d = 1 + (trial / 3) % 2;
        const TorusMultiflow flow = random_flow(D, d, rng);
        std::vector<int> k(D);
        for (int& v : k) {
            v = static_cast<int>(rng.next_u32() % 11) - 5;
        }
        std::vector<double> s(d), x(D);
        for (double& v : s) {
            v = 4.0 * rng.uniform() - 2.0;
        }
        for (double& v : x) {
            v = rng.uniform();
        }
        const TrigObservable mode = single_mode_observable(k);
        const std::vector<double> freq = flow.frequency(k);
        double phase = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            phase += freq[i] * s[i];
        }
        const Complex factor(std::cos(2 * kPi * phase), std::sin(2 * kPi * phase));
        CHECK(std::abs(evaluate(mode, act(flow, s, x)) - factor * evaluate(mode, x)) <= 1e-12);
    }
}

#include "ergolab/presets.hpp"

#include "ergolab/error.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace ergolab {

namespace {

std::vector<double> sqrt_of(std::initializer_list<int> primes) {
    std::vector<double> out;
    for (int p : primes) {
        out.push_back(std::sqrt(static_cast<double>(p)));
    }
    return out;
}

FlowSpec identity_flow(std::size_t d) {
    FlowSpec flow{d, d, std::vector<double>(d * d, 0.0)};
    for (std::size_t i = 0; i < d; ++i) {
        flow.matrix[i * d + i] = 1.0;
    }
    return flow;
}

ExperimentConfig base(const std::string& name, const std::string& command, std::uint64_t seed,
                      const std::string& justification) {
    ExperimentConfig config;
    config.preset = name;
    config.command = command;
    config.seed = seed;
    config.justification = justification;
    return config;
}

ObservableSpec five_mode() { return ObservableSpec{"five-mode", {}, true}; }

ObservableSpec single_mode(std::vector<int> k, Complex c) { return ObservableSpec{"", {{std::move(k), c}}, false}; }

ScheduleSpec schedule(ScheduleKind kind, ScheduleForm form, std::vector<double> params) {
    ScheduleSpec spec{kind, form, params, expand_schedule(form, params)};
    return spec;
}

using Builder = std::function<ExperimentConfig()>;

const std::vector<std::pair<std::string, Builder>>& registry() {
    static const std::vector<std::pair<std::string, Builder>> presets = {
        {"theorem1-interval",
         [] {
             auto c = base("theorem1-interval", "run-sweep", 1001,
                           "Uniform density on [0,1] has transform exp(i pi xi) sin(pi xi)/(pi xi); every mode of "
                           "the 5-mode observable is damped by this factor at xi = t A^T k, so errors fall like "
                           "1/t. Flow entries are square roots of distinct primes (rationally independent).");
             c.flow = FlowSpec{2, 1, sqrt_of({2, 3})};
             c.measure = MeasureSpec{.kind = "interval"};
             c.observable = five_mode();
             c.schedule = schedule(ScheduleKind::Time, ScheduleForm::Geometric, {1.0, 1000.0, 31.0});
             return c;
         }},
        {"theorem1-moment-curve",
         [] {
             auto c = base("theorem1-moment-curve", "run-sweep", 1002,
                           "Uniform parameter law on the moment curve (r, r^2); its transform is computed by "
                           "converged Gauss-Legendre quadrature. The phase w1 r + w2 r^2 decays like t^{-1/2} "
                           "when its stationary point lies in (0,1) and like 1/t otherwise; for this flow and "
                           "observable every stationary point lies outside, so 1/t is expected. The rate is "
                           "measured, not asserted. Flow entries are square roots of distinct primes.");
             c.flow = FlowSpec{3, 2, sqrt_of({2, 3, 5, 7, 11, 13})};
             c.measure = MeasureSpec{.kind = "moment-curve", .dim = 2};
             c.observable = five_mode();
             c.schedule = schedule(ScheduleKind::Time, ScheduleForm::Geometric, {1.0, 1000.0, 31.0});
             return c;
         }},
        {"theorem5-spheres",
         [] {
             auto c = base("theorem5-spheres", "run-sweep", 1005,
                           "Uniform measure on the origin-centered sphere of radius R in R^3 has transform "
                           "sin(2 pi R |xi|)/(2 pi R |xi|); with A = I and the single mode k = (1,0,0) the L1 "
                           "error is exactly |sin(2 pi R)/(2 pi R)|, envelope 1/(2 pi R).");
             c.flow = identity_flow(3);
             c.measure = MeasureSpec{.kind = "sphere", .center = {0.0, 0.0, 0.0}, .radius = 1.0};
             c.observable = single_mode({1, 0, 0}, {1.0, 0.0});
             c.schedule = schedule(ScheduleKind::Radius, ScheduleForm::Linear, {1.0, 100.0, 9901.0});
             c.budget.lattice_points = 256;
             c.budget.mc_samples = 256;
             return c;
         }},
        {"nonergodic-control",
         [] {
             auto c = base("nonergodic-control", "run-sweep", 1008,
                           "A = (1,1)^T is not ergodic: k = (1,-1) has A^T k = 0, so the multiplier of that mode "
                           "is the transform at 0, which is 1. The error stays |c_k| = 1 for every t.");
             c.flow = FlowSpec{2, 1, {1.0, 1.0}};
             c.measure = MeasureSpec{.kind = "interval"};
             c.observable = single_mode({1, -1}, {1.0, 0.0});
             c.schedule = schedule(ScheduleKind::Time, ScheduleForm::Geometric, {1.0, 1000.0, 7.0});
             c.waive_ergodicity = true;
             return c;
         }},
        {"irrational-line-certificate",
         [] {
             auto c = base("irrational-line-certificate", "check-ergodicity", 1010,
                           "k1 + sqrt(2) k2 = 0 has no nonzero integer solution since sqrt(2) is irrational; "
                           "the scan reports the smallest |A^T k| for 0 < |k|_inf <= 50.");
             c.flow = FlowSpec{2, 1, {1.0, std::sqrt(2.0)}};
             c.check.search_radius = 50;
             return c;
         }},
        {"rational-line-certificate",
         [] {
             auto c = base("rational-line-certificate", "check-ergodicity", 1011,
                           "A = (1,1)^T: the frequency k = (1,-1) satisfies A^T k = 0, so the flow is not ergodic.");
             c.flow = FlowSpec{2, 1, {1.0, 1.0}};
             c.check.search_radius = 2;
             return c;
         }},
        {"moment-curve-d4",
         [] {
             auto c = base("moment-curve-d4", "check-general-position", 1004,
                           "Tangents of (r, r^2, r^3, r^4) at r_1..r_4 have determinant 4! prod_{i<j}(r_j - r_i), "
                           "nonzero for distinct parameters; uniform draws are distinct almost surely.");
             c.measure = MeasureSpec{.kind = "moment-curve", .dim = 4};
             c.budget.trials = 1000;
             c.check.threshold = 1e-12;
             return c;
         }},
        {"moment-curve-conv-d",
         [] {
             auto c = base("moment-curve-conv-d", "conv-density", 1012,
                           "The d-fold self-convolution of the moment-curve measure in R^d is absolutely "
                           "continuous (general position of tangents); d = 2 here. Expect no atom suspects and "
                           "small split-half total variation.");
             c.measure = MeasureSpec{.kind = "moment-curve", .dim = 2, .conv_power = 2};
             c.budget.sample_count = 1'000'000;
             c.budget.cells_per_axis = 40;
             return c;
         }},
        {"sphere-conv-2",
         [] {
             auto c = base("sphere-conv-2", "conv-density", 1013,
                           "The self-convolution of the uniform measure on the unit sphere in R^3 is absolutely "
                           "continuous (nonvanishing sum-map Jacobian); expect no atom suspects.");
             c.measure = MeasureSpec{.kind = "sphere", .center = {0.0, 0.0, 0.0}, .radius = 1.0, .conv_power = 2};
             c.budget.sample_count = 1'000'000;
             c.budget.cells_per_axis = 30;
             return c;
         }},
        {"delta-control",
         [] {
             auto c = base("delta-control", "conv-density", 1014,
                           "A point mass at a convolved three times is the point mass at 3a: one cell holds all "
                           "mass and is flagged as an atom suspect.");
             c.measure = MeasureSpec{.kind = "point", .at = {0.2, -0.4}, .conv_power = 3};
             c.budget.sample_count = 10'000;
             c.budget.cells_per_axis = 10;
             return c;
         }},
        {"unit-sphere-jacobian",
         [] {
             auto c = base("unit-sphere-jacobian", "jacobian-scan", 1015,
                           "The sum map (semimeridian point, sphere point) -> sum has determinant proportional to "
                           "(dm/dtheta) . p_hat, which vanishes only on a null set; the degenerate fraction at "
                           "threshold 1e-6 should be below 1e-3.");
             c.measure = MeasureSpec{.kind = "sphere", .center = {0.0, 0.0, 0.0}, .radius = 1.0};
             c.budget.trials = 100'000;
             c.check.degeneracy_threshold = 1e-6;
             return c;
         }},
        {"unit-sphere-disintegration",
         [] {
             auto c = base("unit-sphere-disintegration", "disintegration-test", 1016,
                           "Uniform sphere measure equals the longitude average of semimeridian measures with "
                           "colatitude density sin(theta)/2; the two-sample KS test should not reject at 0.01.");
             c.measure = MeasureSpec{.kind = "sphere", .center = {0.0, 0.0, 0.0}, .radius = 1.0};
             c.budget.sample_count = 100'000;
             return c;
         }},
        {"moment-curve-iterate",
         [] {
             auto c = base("moment-curve-iterate", "iterate-check", 1017,
                           "Applying P_t n times multiplies mode k by nu^(t A^T k)^n, the transform of the n-fold "
                           "convolution; the analytic paths agree to rounding and Monte Carlo over convolution "
                           "draws agrees within 4 standard errors.");
             c.flow = FlowSpec{3, 2, sqrt_of({2, 3, 5, 7, 11, 13})};
             c.measure = MeasureSpec{.kind = "moment-curve", .dim = 2};
             c.observable = five_mode();
             c.budget.mc_samples = 100'000;
             c.check.t = 0.7;
             c.check.powers = {2, 3};
             c.check.point = {0.1, 0.2, 0.3};
             return c;
         }},
    };
    return presets;
}

} // namespace

std::vector<PresetInfo> list_presets() {
    std::vector<PresetInfo> out;
    for (const auto& [name, build] : registry()) {
        out.push_back({name, build().command});
    }
    return out;
}

ExperimentConfig preset_config(const std::string& name) {
    for (const auto& [preset, build] : registry()) {
        if (preset == name) {
            return build();
        }
    }
    throw ConfigError("unknown preset '" + name + "'");
}

} // namespace ergolab

#include "doctest.h"

#include "ergolab/config.hpp"
#include "ergolab/error.hpp"
#include "ergolab/presets.hpp"
#include "ergolab/runner.hpp"

#include <cmath>

using namespace ergolab;

namespace {

const char* kSweep = R"([run]
command = run-sweep
seed = 7

[flow]
matrix = 1.4142135623730951; 1.7320508075688772

[measure]
kind = interval

[observable]
modes = 1 0 : 1 0; 0 1 : 0.5 -0.25

[schedule]
geometric = 1 100 5
)";

} // namespace

TEST_CASE("parse reads every section") {
    const ExperimentConfig c = parse_config(kSweep);
    CHECK(c.command == "run-sweep");
    REQUIRE(c.seed);
    CHECK(*c.seed == 7);
    REQUIRE(c.flow);
    CHECK(c.flow->torus_dim == 2);
    CHECK(c.flow->time_dim == 1);
    CHECK(c.flow->matrix[0] == std::sqrt(2.0));
    REQUIRE(c.observable);
    REQUIRE(c.observable->modes.size() == 2);
    CHECK(c.observable->modes[1].k == std::vector<int>{0, 1});
    CHECK(c.observable->modes[1].coefficient == Complex{0.5, -0.25});
    REQUIRE(c.schedule);
    CHECK(c.schedule->values.size() == 5);
    CHECK(c.schedule->values.front() == 1.0);
    CHECK(c.schedule->values.back() == 100.0);
    CHECK(c.schedule->values[2] == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(c.budget == BudgetSpec{});
}

TEST_CASE("echo round-trips every preset") {
    for (const auto& info : list_presets()) {
        CAPTURE(info.name);
        const ExperimentConfig original = preset_config(info.name);
        CHECK(original.command == info.command);
        REQUIRE(original.seed);
        const std::string text = echo_config(original);
        const ExperimentConfig parsed = parse_config(text);
        CHECK(parsed == original);
        CHECK(echo_config(parsed) == text);
    }
}

TEST_CASE("echo round-trips awkward doubles") {
    ExperimentConfig c = parse_config(kSweep);
    c.flow->matrix = {0.1 + 0.2, 1e-300};
    c.check.t = std::nextafter(1.0, 2.0);
    c.check.point = {-0.0, 5e-324};
    const ExperimentConfig back = parse_config(echo_config(c));
    CHECK(back.flow->matrix == c.flow->matrix);
    CHECK(back.check.t == c.check.t);
    CHECK(back.check.point == c.check.point);
}

TEST_CASE("unknown presets, sections and keys are errors") {
    CHECK_THROWS_AS(preset_config("no-such-preset"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nseeed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nseed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nseed = 1\n[run]\ncommand = run-sweep\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[observable]\npreset = seven-mode\n"), ConfigError);
}

TEST_CASE("malformed values are errors") {
    CHECK_THROWS_AS(parse_config("[run]\nseed = -3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nseed = 12abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nwaive_ergodicity = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[flow]\nmatrix = 1 2; 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[flow]\nmatrix = 1 x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[observable]\nmodes = 1 0 : 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[budget]\ntrials = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[check]\ncolatitude = flat\n"), ConfigError);
}

TEST_CASE("schedule forms") {
    CHECK_THROWS_AS(parse_config("[schedule]\nvalues =\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[schedule]\nvalues = 1 2\nlinear = 1 2 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[schedule]\nlinear = 1 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[schedule]\nlinear = 2 1 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[schedule]\ngeometric = 0 1 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[schedule]\ngeometric = 1 10 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[schedule]\nkind = speed\nvalues = 1\n"), ConfigError);

    const auto linear = expand_schedule(ScheduleForm::Linear, {1.0, 100.0, 9901.0});
    CHECK(linear.size() == 9901);
    CHECK(linear[1] == doctest::Approx(1.01).epsilon(1e-14));
    CHECK(linear.back() == 100.0);
    const auto list = parse_config("[schedule]\nkind = radius\nvalues = 0.5 2 3\n").schedule;
    REQUIRE(list);
    CHECK(list->kind == ScheduleKind::Radius);
    CHECK(list->values == std::vector<double>{0.5, 2.0, 3.0});
}

TEST_CASE("non-increasing list schedule is rejected before output") {
    std::string text = kSweep;
    text.replace(text.find("geometric = 1 100 5"), 19, "values = 1 3 2");
    CHECK_THROWS_AS(run_command("run-sweep", parse_config(text)), Error);
}

TEST_CASE("missing seed and wrong command are rejected") {
    ExperimentConfig c = parse_config(kSweep);
    c.seed.reset();
    CHECK_THROWS_AS(run_command("run-sweep", c), ConfigError);
    CHECK_THROWS_AS(run_command("conv-density", parse_config(kSweep)), ConfigError);
    CHECK_THROWS_AS(run_command("frobnicate", parse_config(kSweep)), UsageError);
}

TEST_CASE("build_measure covers every kind") {
    CHECK(build_measure(MeasureSpec{.kind = "interval"}).dim() == 1);
    CHECK(build_measure(MeasureSpec{.kind = "box", .lo = {0, 0, 0}, .hi = {1, 2, 3}}).dim() == 3);
    CHECK(build_measure(MeasureSpec{.kind = "point", .at = {0.2, -0.4}}).dim() == 2);
    CHECK(build_measure(MeasureSpec{.kind = "moment-curve", .dim = 3}).dim() == 3);
    CHECK(build_measure(MeasureSpec{.kind = "sphere", .center = {0, 0, 0}, .radius = 2.0}).dim() == 3);
    CHECK(build_measure(MeasureSpec{.kind = "semimeridian", .center = {0, 0, 0}}).dim() == 3);
    CHECK(build_measure(MeasureSpec{.kind = "moment-curve", .dim = 2, .conv_power = 2}).dim() == 2);

    CHECK_THROWS_AS(build_measure(MeasureSpec{.kind = "blob"}), ConfigError);
    CHECK_THROWS_AS(build_measure(MeasureSpec{.kind = "box", .lo = {0, 0}, .hi = {1}}), Error);
    CHECK_THROWS_AS(build_measure(MeasureSpec{.kind = "sphere", .center = {0, 0, 0}, .radius = -1.0}), Error);
    CHECK_THROWS_AS(build_measure(MeasureSpec{.kind = "interval", .conv_power = 0}), Error);
}

TEST_CASE("build_observable") {
    const TrigObservable five = build_observable(ObservableSpec{"five-mode", {}, true}, 3);
    CHECK(five.modes().size() == 5);
    CHECK(five.real_valued());
    CHECK_THROWS_AS(build_observable(ObservableSpec{"", {{{1, 0}, {1.0, 0.0}}}, false}, 3), Error);
}

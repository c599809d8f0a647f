#pragma once

#include "ergolab/averaging.hpp"
#include "ergolab/convolution.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/multiflow.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ergolab {

struct FlowSpec {
    std::size_t torus_dim = 0;
    std::size_t time_dim = 0;
    /// Row-major torus_dim x time_dim.
    std::vector<double> matrix;

    bool operator==(const FlowSpec&) const = default;
};

struct MeasureSpec {
    /// interval, box, point, moment-curve, line, sphere, semimeridian.
    std::string kind;
    std::size_t dim = 0;
    std::vector<double> lo{};
    std::vector<double> hi{};
    std::vector<double> at{};
    std::vector<double> center{};
    double radius = 1.0;
    double longitude = 0.0;
    int conv_power = 1;

    bool operator==(const MeasureSpec&) const = default;
};

struct ObservableSpec {
    /// "five-mode" or empty for an explicit mode list.
    std::string preset;
    std::vector<TrigMode> modes;
    bool real_valued = false;

    bool operator==(const ObservableSpec& other) const;
};

enum class ScheduleForm { List, Linear, Geometric };

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::Time;
    ScheduleForm form = ScheduleForm::List;
    /// The explicit list, or (start, stop, count) for linear and geometric.
    std::vector<double> params;
    std::vector<double> values;

    bool operator==(const ScheduleSpec&) const = default;
};

struct BudgetSpec {
    std::size_t mc_samples = 4096;
    std::size_t lattice_points = 4096;
    std::size_t sample_count = 1'000'000;
    std::size_t trials = 1000;
    int cells_per_axis = 40;

    bool operator==(const BudgetSpec&) const = default;
};

struct CheckSpec {
    int search_radius = 50;
    /// General-position |det| threshold.
    double threshold = 1e-12;
    /// Jacobian-scan threshold; 1e-6 R^3 when absent.
    std::optional<double> degeneracy_threshold;
    double t = 1.0;
    std::vector<int> powers{2, 3};
    std::vector<double> point;
    ColatitudeLaw colatitude = ColatitudeLaw::Sine;

    bool operator==(const CheckSpec&) const = default;
};

struct ExperimentConfig {
    std::string command;
    std::string preset;
    std::string justification;
    std::optional<std::uint64_t> seed;
    bool waive_ergodicity = false;
    std::optional<FlowSpec> flow;
    std::optional<MeasureSpec> measure;
    std::optional<ObservableSpec> observable;
    std::optional<ScheduleSpec> schedule;
    BudgetSpec budget;
    CheckSpec check;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the sectioned key = value format. Unknown sections or keys,
/// duplicate keys and malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text of a config; parse_config(echo_config(c)) == c.
std::string echo_config(const ExperimentConfig& config);

std::vector<double> expand_schedule(ScheduleForm form, const std::vector<double>& params);

TorusMultiflow build_flow(const FlowSpec& spec);
WeightMeasure build_measure(const MeasureSpec& spec);
TrigObservable build_observable(const ObservableSpec& spec, std::size_t torus_dim);

} // namespace ergolab

#include "ergolab/averaging.hpp"

#include "ergolab/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace ergolab {

namespace {

// Extensible base-2 rank-1 lattice generating vector (Nuyens, exew_base2_m20),
// good for every N = 2^m with m <= 20.
constexpr std::array<std::uint64_t, 10> kLatticeGenerator = {1,      364981, 245389, 97823, 488939,
                                                             62609,  400749, 385317, 21281, 223487};

void validate_dimensions(const TorusMultiflow& flow, const TrigObservable& obs, const WeightMeasure& measure,
                         double t) {
    if (flow.time_dim() != measure.dim()) {
        throw ConfigError("averaging: flow time dimension does not match the measure dimension");
    }
    if (obs.torus_dim() != flow.torus_dim()) {
        throw ConfigError("averaging: observable and flow live on tori of different dimension");
    }
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw ConfigError("averaging: t must be positive and finite");
    }
}

bool is_zero(const std::vector<int>& k) {
    return std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
}

bool is_canonical(const std::vector<int>& k) {
    for (int v : k) {
        if (v != 0) {
            return v > 0;
        }
    }
    return true;
}

// f(T_{t r} x) written into the caller's scratch buffer.
Complex moved_value(const TorusMultiflow& flow, const TrigObservable& obs, double t, std::span<const double> r,
                    std::span<const double> x, std::vector<double>& scratch_s) {
    for (std::size_t a = 0; a < r.size(); ++a) {
        scratch_s[a] = t * r[a];
    }
    const Point y = act(flow, scratch_s, x);
    return evaluate(obs, y);
}

struct MomentSums {
    Complex sum;
    double sum_sq = 0.0;

    MomentSums& operator+=(const MomentSums& other) {
        sum += other.sum;
        sum_sq += other.sum_sq;
        return *this;
    }
};

struct RealSums {
    double sum = 0.0;
    double sum_sq = 0.0;

    RealSums& operator+=(const RealSums& other) {
        sum += other.sum;
        sum_sq += other.sum_sq;
        return *this;
    }
};

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

} // namespace

PointwiseAverage average_pointwise(const TorusMultiflow& flow, const TrigObservable& obs,
                                   const WeightMeasure& measure, double t, std::span<const double> x,
                                   const AveragingMode& mode) {
    validate_dimensions(flow, obs, measure, t);
    if (x.size() != flow.torus_dim()) {
        throw ConfigError("average_pointwise: point has the wrong dimension");
    }
    const std::size_t d = measure.dim();
    PointwiseAverage result;

    if (const auto* mc = std::get_if<MonteCarlo>(&mode)) {
        if (mc->count < 2) {
            throw ConfigError("average_pointwise: Monte-Carlo count must be at least 2");
        }
        const MomentSums sums = deterministic_sum<MomentSums>(mc->count, [&](std::size_t i) {
            thread_local std::vector<double> r;
            thread_local std::vector<double> s;
            r.resize(d);
            s.resize(d);
            CounterRng rng(mc->seed, mc->stream, i);
            sample_one(measure, rng, r);
            const Complex f = moved_value(flow, obs, t, r, x, s);
            return MomentSums{f, std::norm(f)};
        });
        const double n = static_cast<double>(mc->count);
        result.value = sums.sum / n;
        const double variance = std::max(0.0, (sums.sum_sq - n * std::norm(result.value)) / (n - 1.0));
        result.standard_error = std::sqrt(variance / n);
        result.evaluations = mc->count;
        return result;
    }

    const auto& quad = std::get<Quadrature>(mode);
    const QuadratureRule rule = quadrature_nodes(measure, quad.resolution);
    result.value = deterministic_sum<Complex>(
        rule.size(),
        [&](std::size_t i) {
            thread_local std::vector<double> s;
            s.resize(d);
            return rule.weights[i] * moved_value(flow, obs, t, rule.points[i], x, s);
        },
        4096);
    result.evaluations = rule.size();
    return result;
}

int quadrature_resolution_for(const TorusMultiflow& flow, const TrigObservable& obs, const WeightMeasure& measure,
                              double t) {
    validate_dimensions(flow, obs, measure, t);
    double bandwidth = 0.0;
    for (const auto& mode : obs.modes()) {
        const std::vector<double> omega = flow.frequency(mode.k);
        double norm = 0.0;
        for (double w : omega) {
            norm += w * w;
        }
        bandwidth = std::max(bandwidth, t * std::sqrt(norm));
    }
    return resolution_for_bandwidth(measure, bandwidth);
}

TrigObservable multiplier_oracle(const TorusMultiflow& flow, const TrigObservable& obs,
                                 const WeightMeasure& measure, double t) {
    validate_dimensions(flow, obs, measure, t);
    // Transform at the canonical member of each +-k pair; the partner gets
    // the conjugate, which is exact for real measures.
    std::map<std::vector<int>, Complex> canonical;
    auto transform_at = [&](const std::vector<int>& k) {
        auto [it, inserted] = canonical.try_emplace(k);
        if (inserted) {
            std::vector<double> xi = flow.frequency(k);
            for (double& v : xi) {
                v *= t;
            }
            it->second = fourier(measure, xi);
        }
        return it->second;
    };

    std::vector<TrigMode> modes = obs.modes();
    for (auto& mode : modes) {
        if (is_zero(mode.k) || !is_canonical(mode.k)) {
            continue;
        }
        mode.coefficient *= transform_at(mode.k);
    }
    for (auto& mode : modes) {
        if (is_zero(mode.k) || is_canonical(mode.k)) {
            continue;
        }
        std::vector<int> partner(mode.k.size());
        std::transform(mode.k.begin(), mode.k.end(), partner.begin(), [](int v) { return -v; });
        if (obs.real_valued()) {
            const auto it = std::find_if(modes.begin(), modes.end(), [&](const TrigMode& m) { return m.k == partner; });
            mode.coefficient = std::conj(it->coefficient);
        } else {
            mode.coefficient *= std::conj(transform_at(partner));
        }
    }
    return TrigObservable(obs.torus_dim(), std::move(modes), obs.real_valued());
}

void lattice_point(std::size_t i, std::size_t n, std::span<double> out) {
    if (out.size() > kLatticeGenerator.size()) {
        throw UnsupportedError("lattice_point: at most 10 torus dimensions are supported");
    }
    for (std::size_t a = 0; a < out.size(); ++a) {
        const std::uint64_t numerator = (static_cast<std::uint64_t>(i) * kLatticeGenerator[a]) % n;
        out[a] = static_cast<double>(numerator) / static_cast<double>(n);
    }
}

L1Error l1_error(const TorusMultiflow& flow, const TrigObservable& obs, const WeightMeasure& measure, double t,
                 const TorusGrid& grid, Seed seed, std::uint32_t stream) {
    const std::size_t n = grid.lattice_points;
    if (n < 2 || n > (std::size_t{1} << 20) || (n & (n - 1)) != 0) {
        throw ConfigError("l1_error: lattice_points must be a power of two between 2 and 2^20");
    }
    if (grid.mc_samples < 2) {
        throw ConfigError("l1_error: mc_samples must be at least 2");
    }
    const TrigObservable averaged = multiplier_oracle(flow, obs, measure, t);
    std::vector<TrigMode> fluctuation;
    for (const auto& mode : averaged.modes()) {
        if (!is_zero(mode.k)) {
            fluctuation.push_back(mode);
        }
    }
    const std::size_t dim = flow.torus_dim();
    const TrigObservable g(dim, fluctuation, false);

    L1Error result;
    std::size_t nonzero = 0;
    double single = 0.0;
    for (const auto& mode : fluctuation) {
        result.oracle_bound += std::abs(mode.coefficient);
        if (mode.coefficient != Complex{0.0, 0.0}) {
            ++nonzero;
            single = std::abs(mode.coefficient);
        }
    }

    result.lattice_points = n;
    result.lattice = deterministic_sum<double>(n, [&](std::size_t i) {
                         thread_local std::vector<double> x;
                         x.resize(dim);
                         lattice_point(i, n, x);
                         return std::abs(evaluate(g, x));
                     }) /
                     static_cast<double>(n);

    result.mc_samples = grid.mc_samples;
    const RealSums sums = deterministic_sum<RealSums>(grid.mc_samples, [&](std::size_t i) {
        thread_local std::vector<double> x;
        x.resize(dim);
        CounterRng rng(seed, stream, i);
        for (double& v : x) {
            v = rng.uniform();
        }
        const double value = std::abs(evaluate(g, x));
        return RealSums{value, value * value};
    });
    const double m = static_cast<double>(grid.mc_samples);
    result.mc = sums.sum / m;
    result.mc_stderr = std::sqrt(std::max(0.0, (sums.sum_sq - m * result.mc * result.mc) / (m - 1.0)) / m);

    if (nonzero <= 1) {
        result.closed_form = true;
        result.exact = nonzero == 0 ? 0.0 : single;
    } else {
        result.exact = result.lattice;
    }
    return result;
}

DecayStatistics decay_statistics(const std::vector<double>& at, const std::vector<double>& errors) {
    DecayStatistics stats;
    if (at.empty()) {
        return stats;
    }
    stats.last_over_first = errors.back() / errors.front();
    const double origin = at.front();
    for (std::size_t i = 0; i < at.size(); ++i) {
        const int window = static_cast<int>(std::floor(std::log2(at[i] / origin) + 1e-12));
        if (stats.windows.empty() || stats.windows.back().window != window) {
            stats.windows.push_back({window, at[i], errors[i]});
        } else if (errors[i] > stats.windows.back().max_error) {
            stats.windows.back().at = at[i];
            stats.windows.back().max_error = errors[i];
        }
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (const auto& w : stats.windows) {
        if (w.max_error > 0.0) {
            const double lx = std::log(w.at);
            const double ly = std::log(w.max_error);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++count;
        }
    }
    const double denominator = count * sxx - sx * sx;
    stats.envelope_slope =
        count >= 2 && denominator > 0.0 ? (count * sxy - sx * sy) / denominator : std::numeric_limits<double>::quiet_NaN();
    return stats;
}

AveragingReport convergence_sweep(const TorusMultiflow& flow, const TrigObservable& obs,
                                  const WeightMeasure& measure, const Schedule& schedule, const TorusGrid& grid,
                                  Seed seed, const SweepOptions& options) {
    const auto& values = schedule.values;
    if (values.size() < 3) {
        throw ConfigError("convergence_sweep: schedule needs at least 3 entries");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]) || (i > 0 && !(values[i] > values[i - 1]))) {
            throw ConfigError("convergence_sweep: schedule must be positive and strictly increasing");
        }
    }
    const SphereMeasure* sphere = measure.as<SphereMeasure>();
    if (schedule.kind == ScheduleKind::Radius && sphere == nullptr) {
        throw ConfigError("convergence_sweep: a radius schedule needs a sphere measure");
    }
    validate_dimensions(flow, obs, measure, 1.0);

    AveragingReport report;
    report.schedule = schedule;
    report.seed = seed;
    report.certificate = ergodicity_certificate(flow, options.certificate_radius);
    report.nonergodic = !report.certificate.passed();
    if (report.nonergodic && !options.waive_ergodicity) {
        throw CertificateRefused("convergence_sweep: flow fails the ergodicity certificate", report.certificate);
    }

    report.entries.resize(values.size());
    parallel_for(values.size(), 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e) {
            const auto stream = static_cast<std::uint32_t>(e + 1);
            report.entries[e].t_or_radius = values[e];
            if (schedule.kind == ScheduleKind::Radius) {
                const WeightMeasure scaled = make_sphere(sphere->center, values[e]);
                report.entries[e].error = l1_error(flow, obs, scaled, 1.0, grid, seed, stream);
            } else {
                report.entries[e].error = l1_error(flow, obs, measure, values[e], grid, seed, stream);
            }
        }
    });

    std::vector<double> errors;
    errors.reserve(values.size());
    for (const auto& entry : report.entries) {
        errors.push_back(entry.error.exact);
    }
    report.decay = decay_statistics(values, errors);
    return report;
}

double envelope_max(const AveragingReport& report, double lo, double hi) {
    double best = 0.0;
    for (const auto& entry : report.entries) {
        if (entry.t_or_radius >= lo && entry.t_or_radius < hi) {
            best = std::max(best, entry.error.exact);
        }
    }
    return best;
}

std::string sweep_csv(const AveragingReport& report) {
    std::ostringstream out;
    out << "t_or_radius,l1_exact,l1_mc,l1_mc_stderr,oracle_bound,samples,seed\n";
    for (const auto& entry : report.entries) {
        out << format_double(entry.t_or_radius) << ',' << format_double(entry.error.exact) << ','
            << format_double(entry.error.mc) << ',' << format_double(entry.error.mc_stderr) << ','
            << format_double(entry.error.oracle_bound) << ',' << entry.error.mc_samples << ',' << report.seed.value
            << '\n';
    }
    return out.str();
}

IterationCheck iterated_vs_convolution(const TorusMultiflow& flow, const TrigObservable& obs,
                                       const WeightMeasure& measure, double t, int n, std::span<const double> x,
                                       const MonteCarlo& mc) {
    if (n < 1) {
        throw ConfigError("iterated_vs_convolution: n must be at least 1");
    }
    TrigObservable iterated = obs;
    for (int j = 0; j < n; ++j) {
        iterated = multiplier_oracle(flow, iterated, measure, t);
    }
    const WeightMeasure power = make_conv_power(measure, n);
    const TrigObservable convolved = multiplier_oracle(flow, obs, power, t);

    IterationCheck check;
    for (std::size_t m = 0; m < obs.modes().size(); ++m) {
        const Complex a = iterated.modes()[m].coefficient;
        const Complex b = convolved.modes()[m].coefficient;
        check.modes.push_back({obs.modes()[m].k, a, b});
        check.analytic_deviation = std::max(check.analytic_deviation, std::abs(a - b));
    }
    check.analytic_value = evaluate(convolved, x);
    check.mc = average_pointwise(flow, obs, power, t, x, mc);
    check.mc_deviation = std::abs(check.mc.value - check.analytic_value);
    return check;
}

} // namespace ergolab

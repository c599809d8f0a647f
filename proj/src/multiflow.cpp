#include "ergolab/multiflow.hpp"

#include "ergolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace ergolab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<int> negated(const std::vector<int>& k) {
    std::vector<int> out(k.size());
    std::transform(k.begin(), k.end(), out.begin(), [](int v) { return -v; });
    return out;
}

bool is_zero(const std::vector<int>& k) {
    return std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
}

} // namespace

TorusMultiflow::TorusMultiflow(std::size_t torus_dim, std::size_t time_dim, std::vector<double> matrix)
    : torus_dim_(torus_dim), time_dim_(time_dim), matrix_(std::move(matrix)) {
    if (torus_dim_ == 0 || time_dim_ == 0) {
        throw ConfigError("TorusMultiflow: dimensions must be positive");
    }
    if (matrix_.size() != torus_dim_ * time_dim_) {
        throw ConfigError("TorusMultiflow: matrix must have torus_dim x time_dim entries");
    }
    for (double a : matrix_) {
        if (!std::isfinite(a)) {
            throw ConfigError("TorusMultiflow: matrix entries must be finite");
        }
    }
}

std::vector<double> TorusMultiflow::frequency(std::span<const int> k) const {
    std::vector<double> omega(time_dim_, 0.0);
    for (std::size_t row = 0; row < torus_dim_; ++row) {
        if (k[row] == 0) {
            continue;
        }
        for (std::size_t col = 0; col < time_dim_; ++col) {
            omega[col] += entry(row, col) * k[row];
        }
    }
    return omega;
}

void wrap_unit(std::span<double> x) {
    for (double& v : x) {
        v -= std::floor(v);
        if (v >= 1.0) {
            v = 0.0;
        }
    }
}

Point act(const TorusMultiflow& flow, std::span<const double> s, std::span<const double> x) {
    if (s.size() != flow.time_dim() || x.size() != flow.torus_dim()) {
        throw ConfigError("act: dimension mismatch");
    }
    Point y(x.begin(), x.end());
    for (std::size_t row = 0; row < flow.torus_dim(); ++row) {
        double shift = 0.0;
        for (std::size_t col = 0; col < flow.time_dim(); ++col) {
            shift += flow.entry(row, col) * s[col];
        }
        // Reduce the shift first so large |A s| does not swamp x.
        y[row] += shift - std::floor(shift);
    }
    wrap_unit(y);
    return y;
}

ErgodicityCertificate ergodicity_certificate(const TorusMultiflow& flow, int search_radius, double threshold,
                                             std::size_t budget) {
    if (search_radius < 1) {
        throw ConfigError("ergodicity_certificate: K must be at least 1");
    }
    const std::size_t dim = flow.torus_dim();
    ErgodicityCertificate cert;
    cert.threshold = threshold;
    cert.min_frequency_norm = std::numeric_limits<double>::infinity();

    std::vector<int> k(dim);
    for (int shell = 1; shell <= search_radius; ++shell) {
        std::fill(k.begin(), k.end(), -shell);
        while (true) {
            // Shell membership and canonical sign.
            int max_abs = 0;
            int first_nonzero = 0;
            for (int v : k) {
                max_abs = std::max(max_abs, std::abs(v));
                if (first_nonzero == 0) {
                    first_nonzero = v;
                }
            }
            if (max_abs == shell && first_nonzero > 0) {
                if (cert.vectors_checked >= budget) {
                    cert.search_radius = shell - 1;
                    throw BudgetError("ergodicity_certificate: scan exceeds budget", cert);
                }
                ++cert.vectors_checked;
                const std::vector<double> omega = flow.frequency(k);
                double norm = 0.0;
                for (double w : omega) {
                    norm += w * w;
                }
                norm = std::sqrt(norm);
                if (norm < cert.min_frequency_norm) {
                    cert.min_frequency_norm = norm;
                    cert.minimizer = k;
                }
                if (norm < threshold && !cert.offending_k) {
                    cert.offending_k = k;
                }
            }
            std::size_t pos = dim;
            while (pos-- > 0) {
                if (k[pos] < shell) {
                    ++k[pos];
                    break;
                }
                k[pos] = -shell;
            }
            if (pos == static_cast<std::size_t>(-1)) {
                break;
            }
        }
        cert.search_radius = shell;
    }
    return cert;
}

TrigObservable::TrigObservable(std::size_t torus_dim, std::vector<TrigMode> modes, bool real_valued)
    : torus_dim_(torus_dim), modes_(std::move(modes)), real_valued_(real_valued) {
    if (torus_dim_ == 0) {
        throw ConfigError("TrigObservable: torus dimension must be positive");
    }
    std::set<std::vector<int>> seen;
    for (const auto& mode : modes_) {
        if (mode.k.size() != torus_dim_) {
            throw ConfigError("TrigObservable: frequency vector has the wrong dimension");
        }
        if (!std::isfinite(mode.coefficient.real()) || !std::isfinite(mode.coefficient.imag())) {
            throw ConfigError("TrigObservable: coefficients must be finite");
        }
        if (!seen.insert(mode.k).second) {
            throw ConfigError("TrigObservable: frequencies must be distinct");
        }
    }
    if (!real_valued_) {
        return;
    }
    for (const auto& mode : modes_) {
        const std::vector<int> partner = negated(mode.k);
        const auto it = std::find_if(modes_.begin(), modes_.end(), [&](const TrigMode& m) { return m.k == partner; });
        if (it == modes_.end() || it->coefficient != std::conj(mode.coefficient)) {
            throw ConfigError("TrigObservable: real_valued requires c_{-k} = conj(c_k) for every mode");
        }
    }
}

Complex evaluate(const TrigObservable& obs, std::span<const double> x) {
    if (x.size() != obs.torus_dim()) {
        throw ConfigError("evaluate: point dimension does not match the observable");
    }
    Complex total{0.0, 0.0};
    for (const auto& mode : obs.modes()) {
        double phase = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) {
            phase += mode.k[a] * x[a];
        }
        // exp(2 pi i phase) only depends on phase mod 1.
        phase = kTwoPi * (phase - std::floor(phase));
        total += mode.coefficient * Complex(std::cos(phase), std::sin(phase));
    }
    if (obs.real_valued()) {
        return {total.real(), 0.0};
    }
    return total;
}

Complex mean(const TrigObservable& obs) {
    for (const auto& mode : obs.modes()) {
        if (is_zero(mode.k)) {
            return mode.coefficient;
        }
    }
    return {0.0, 0.0};
}

Complex lattice_mean(const TrigObservable& obs, std::size_t per_axis) {
    const std::size_t dim = obs.torus_dim();
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) {
        total *= per_axis;
    }
    const Complex sum = deterministic_sum<Complex>(total, [&](std::size_t i) {
        std::vector<double> x(dim);
        for (std::size_t a = dim; a-- > 0;) {
            x[a] = static_cast<double>(i % per_axis) / static_cast<double>(per_axis);
            i /= per_axis;
        }
        return evaluate(obs, x);
    });
    return sum / static_cast<double>(total);
}

TrigObservable five_mode_observable(std::size_t torus_dim) {
    std::vector<int> k1(torus_dim, 0);
    std::vector<int> k2(torus_dim, 0);
    k1[0] = 1;
    if (torus_dim == 1) {
        k2[0] = 2;
    } else {
        k2[0] = 1;
        k2[1] = -1;
    }
    // 0.5 sin(2 pi k2.x) = (-0.25 i) e_{k2} + (0.25 i) e_{-k2}.
    std::vector<TrigMode> modes{
        {std::vector<int>(torus_dim, 0), {1.0, 0.0}},
        {k1, {0.5, 0.0}},
        {negated(k1), {0.5, 0.0}},
        {k2, {0.0, -0.25}},
        {negated(k2), {0.0, 0.25}},
    };
    return TrigObservable(torus_dim, std::move(modes), true);
}

TrigObservable single_mode_observable(std::vector<int> k, Complex coefficient) {
    const std::size_t dim = k.size();
    return TrigObservable(dim, {TrigMode{std::move(k), coefficient}}, false);
}

} // namespace ergolab

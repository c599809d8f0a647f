#pragma once

#include "ergolab/error.hpp"
#include "ergolab/measures.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ergolab {

/// Translation action T_s x = x + A s (mod 1) of R^d on the D-torus.
class TorusMultiflow {
public:
    /// `matrix` is row-major D x d.
    TorusMultiflow(std::size_t torus_dim, std::size_t time_dim, std::vector<double> matrix);

    std::size_t torus_dim() const { return torus_dim_; }
    std::size_t time_dim() const { return time_dim_; }
    const std::vector<double>& matrix() const { return matrix_; }
    double entry(std::size_t row, std::size_t col) const { return matrix_[row * time_dim_ + col]; }

    /// A^T k for an integer frequency vector k.
    std::vector<double> frequency(std::span<const int> k) const;

private:
    std::size_t torus_dim_;
    std::size_t time_dim_;
    std::vector<double> matrix_;
};

/// Reduces each coordinate into [0, 1).
void wrap_unit(std::span<double> x);

/// T_s x.
Point act(const TorusMultiflow& flow, std::span<const double> s, std::span<const double> x);

/// Integer-frequency character criterion checked up to radius K: the action
/// is ergodic iff A^T k != 0 for every nonzero k. A passing certificate is
/// finite evidence, not a proof.
struct ErgodicityCertificate {
    int search_radius = 0;
    double min_frequency_norm = 0.0;
    std::vector<int> minimizer;
    std::optional<std::vector<int>> offending_k;
    double threshold = 1e-12;
    std::size_t vectors_checked = 0;

    bool passed() const { return !offending_k.has_value(); }
};

/// Thrown when the scan would exceed its budget; carries the partial scan.
class BudgetError : public Error {
public:
    BudgetError(const std::string& message, ErgodicityCertificate partial)
        : Error(message), partial_(std::move(partial)) {}

    const ErgodicityCertificate& partial() const { return partial_; }

private:
    ErgodicityCertificate partial_;
};

/// Scans 0 < ||k||_inf <= K shell by shell, one representative of each
/// +-k pair (first nonzero coordinate positive), lexicographically within a
/// shell. Reports the minimum |A^T k| and the first k below `threshold`.
ErgodicityCertificate ergodicity_certificate(const TorusMultiflow& flow, int search_radius,
                                             double threshold = 1e-12, std::size_t budget = 200'000'000);

struct TrigMode {
    std::vector<int> k;
    Complex coefficient;
};

/// Trigonometric polynomial f(x) = sum c_k exp(2 pi i k.x) on the torus.
class TrigObservable {
public:
    /// Throws ConfigError on repeated frequencies, mixed dimensions, or (when
    /// real_valued) a missing or non-conjugate partner c_{-k} = conj(c_k).
    TrigObservable(std::size_t torus_dim, std::vector<TrigMode> modes, bool real_valued);

    std::size_t torus_dim() const { return torus_dim_; }
    const std::vector<TrigMode>& modes() const { return modes_; }
    bool real_valued() const { return real_valued_; }

private:
    std::size_t torus_dim_;
    std::vector<TrigMode> modes_;
    bool real_valued_;
};

Complex evaluate(const TrigObservable& obs, std::span<const double> x);

/// Space mean under Haar measure: the zero-mode coefficient.
Complex mean(const TrigObservable& obs);

/// Average of evaluate over the regular lattice with `per_axis` points per axis.
Complex lattice_mean(const TrigObservable& obs, std::size_t per_axis);

/// The real 5-mode observable 1 + cos(2 pi k1.x) + 0.5 sin(2 pi k2.x), with
/// k1 = e_1 and k2 = e_1 - e_2 (k2 = 2 on the circle).
TrigObservable five_mode_observable(std::size_t torus_dim);

/// Single complex mode c exp(2 pi i k.x).
TrigObservable single_mode_observable(std::vector<int> k, Complex coefficient = {1.0, 0.0});

} // namespace ergolab

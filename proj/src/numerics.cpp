#include "ergolab/numerics.hpp"

#include "ergolab/error.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace ergolab {

Rule1d gauss_legendre(int n) {
    if (n < 1) {
        throw ConfigError("gauss_legendre: n must be positive");
    }
    Rule1d rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

Rule1d composite_gauss(double a, double b, int panels) {
    static const Rule1d base = gauss_legendre(8);
    if (panels < 1) {
        throw ConfigError("composite_gauss: panels must be positive");
    }
    Rule1d rule;
    rule.nodes.reserve(8 * static_cast<std::size_t>(panels));
    rule.weights.reserve(rule.nodes.capacity());
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t j = 0; j < base.nodes.size(); ++j) {
            rule.nodes.push_back(mid + 0.5 * h * base.nodes[j]);
            rule.weights.push_back(0.5 * h * base.weights[j]);
        }
    }
    return rule;
}

long double determinant(std::span<const double> matrix, std::size_t n) {
    if (matrix.size() != n * n) {
        throw ConfigError("determinant: matrix size does not match n*n");
    }
    std::vector<long double> a(matrix.begin(), matrix.end());
    long double det = 1.0L;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) {
                pivot = r;
            }
        }
        if (a[pivot * n + col] == 0.0L) {
            return 0.0L;
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[pivot * n + c], a[col * n + c]);
            }
            det = -det;
        }
        const long double diag = a[col * n + col];
        det *= diag;
        for (std::size_t r = col + 1; r < n; ++r) {
            const long double factor = a[r * n + col] / diag;
            for (std::size_t c = col + 1; c < n; ++c) {
                a[r * n + c] -= factor * a[col * n + c];
            }
        }
    }
    return det;
}

double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw UsageError("ks_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) {
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            ++j;
        }
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double ks_two_sample_critical(double alpha, std::size_t n, std::size_t m) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

double ks_one_sample_critical(double alpha, std::size_t n) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) {
        return 1.0;
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-18) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace ergolab

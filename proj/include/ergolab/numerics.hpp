#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ergolab {

struct Rule1d {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
Rule1d gauss_legendre(int n);

/// Composite 8-point Gauss-Legendre rule on [a, b] with `panels` equal
/// panels. Weights sum to b - a.
Rule1d composite_gauss(double a, double b, int panels);

/// Determinant of a row-major n x n matrix by partial-pivot LU in
/// extended precision.
long double determinant(std::span<const double> matrix, std::size_t n);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F| for a continuous
/// reference CDF. `values` is sorted in place.
template <class Cdf>
double ks_one_sample(std::vector<double>& values, Cdf&& cdf);

/// Two-sample Kolmogorov-Smirnov statistic. Inputs are sorted in place.
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);

/// Asymptotic critical value of the two-sample KS statistic at level alpha:
/// sqrt(-ln(alpha/2)/2) * sqrt((n+m)/(n m)).
double ks_two_sample_critical(double alpha, std::size_t n, std::size_t m);

/// Asymptotic one-sample critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_one_sample_critical(double alpha, std::size_t n);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_survival(double lambda);

} // namespace ergolab

#include <algorithm>
#include <cmath>

namespace ergolab {

template <class Cdf>
double ks_one_sample(std::vector<double>& values, Cdf&& cdf) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = cdf(values[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

} // namespace ergolab

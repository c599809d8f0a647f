#pragma once

#include "ergolab/measures.hpp"
#include "ergolab/multiflow.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ergolab {

struct MonteCarlo {
    std::size_t count = 0;
    Seed seed;
    /// Counter stream for the draws; sweeps use one stream per entry.
    std::uint32_t stream = 0;
};

struct Quadrature {
    int resolution = 0;
};

using AveragingMode = std::variant<MonteCarlo, Quadrature>;

struct PointwiseAverage {
    Complex value;
    /// Standard error of the Monte-Carlo mean (zero for quadrature).
    double standard_error = 0.0;
    std::size_t evaluations = 0;
};

/// P_t f(x) = integral of f(T_{t r} x) d nu(r), by Monte Carlo over draws of nu
/// or by quadrature against quadrature_nodes(nu). Does not re-certify the
/// flow; callers certify or waive ergodicity.
PointwiseAverage average_pointwise(const TorusMultiflow& flow, const TrigObservable& obs,
                                   const WeightMeasure& measure, double t, std::span<const double> x,
                                   const AveragingMode& mode);

/// Quadrature resolution that resolves every mode of obs at time t.
int quadrature_resolution_for(const TorusMultiflow& flow, const TrigObservable& obs, const WeightMeasure& measure,
                              double t);

/// P_t applied to obs exactly: coefficient c_k becomes c_k * nu^(t A^T k).
/// Conjugate pairs stay exactly conjugate.
TrigObservable multiplier_oracle(const TorusMultiflow& flow, const TrigObservable& obs,
                                 const WeightMeasure& measure, double t);

struct TorusGrid {
    /// Rank-1 lattice size, a power of two up to 2^20.
    std::size_t lattice_points = 4096;
    std::size_t mc_samples = 4096;
};

struct L1Error {
    /// Closed form when a single nonzero mode remains, the lattice value otherwise.
    double exact = 0.0;
    bool closed_form = false;
    double lattice = 0.0;
    double mc = 0.0;
    double mc_stderr = 0.0;
    /// Sum over nonzero modes of |c_k| |nu^(t A^T k)|.
    double oracle_bound = 0.0;
    std::size_t lattice_points = 0;
    std::size_t mc_samples = 0;
};

/// || P_t f - mean(f) ||_1 on the torus.
L1Error l1_error(const TorusMultiflow& flow, const TrigObservable& obs, const WeightMeasure& measure, double t,
                 const TorusGrid& grid, Seed seed, std::uint32_t stream = 0);

/// Rank-1 lattice point i of n (n a power of two, up to 10 dimensions).
void lattice_point(std::size_t i, std::size_t n, std::span<double> out);

enum class ScheduleKind {
    /// Scale the measure by t (T_{t r}).
    Time,
    /// Replace a sphere by the sphere of radius R with the same center, t = 1.
    Radius,
};

struct Schedule {
    ScheduleKind kind = ScheduleKind::Time;
    std::vector<double> values;
};

struct SweepEntry {
    double t_or_radius = 0.0;
    L1Error error;
};

struct EnvelopeWindow {
    int window = 0;
    double at = 0.0;
    double max_error = 0.0;
};

struct DecayStatistics {
    double last_over_first = 0.0;
    /// Least-squares slope of log(window max) against log(argmax) over
    /// dyadic windows [v0 2^j, v0 2^{j+1}); NaN with fewer than two windows.
    double envelope_slope = 0.0;
    std::vector<EnvelopeWindow> windows;
};

struct AveragingReport {
    Schedule schedule;
    std::vector<SweepEntry> entries;
    DecayStatistics decay;
    ErgodicityCertificate certificate;
    bool nonergodic = false;
    Seed seed;
};

struct SweepOptions {
    bool waive_ergodicity = false;
    int certificate_radius = 50;
};

/// Raised when the flow fails its ergodicity certificate and no waiver is given.
class CertificateRefused : public Error {
public:
    CertificateRefused(const std::string& message, ErgodicityCertificate certificate)
        : Error(message), certificate_(std::move(certificate)) {}

    const ErgodicityCertificate& certificate() const { return certificate_; }

private:
    ErgodicityCertificate certificate_;
};

AveragingReport convergence_sweep(const TorusMultiflow& flow, const TrigObservable& obs,
                                  const WeightMeasure& measure, const Schedule& schedule, const TorusGrid& grid,
                                  Seed seed, const SweepOptions& options = {});

DecayStatistics decay_statistics(const std::vector<double>& at, const std::vector<double>& errors);

/// Largest error among entries with lo <= t_or_radius < hi (0 if none).
double envelope_max(const AveragingReport& report, double lo, double hi);

/// CSV with columns t_or_radius,l1_exact,l1_mc,l1_mc_stderr,oracle_bound,samples,seed.
std::string sweep_csv(const AveragingReport& report);

struct ModeComparison {
    std::vector<int> k;
    Complex iterated;
    Complex convolved;
};

struct IterationCheck {
    double analytic_deviation = 0.0;
    std::vector<ModeComparison> modes;
    Complex analytic_value;
    PointwiseAverage mc;
    double mc_deviation = 0.0;

    bool mc_within(double standard_errors) const { return mc_deviation <= standard_errors * mc.standard_error; }
};

/// Applies multiplier_oracle n times with nu and once with nu^{*n} and
/// compares coefficients; also compares a Monte-Carlo average over nu^{*n}
/// draws at x with the analytic value there.
IterationCheck iterated_vs_convolution(const TorusMultiflow& flow, const TrigObservable& obs,
                                       const WeightMeasure& measure, double t, int n, std::span<const double> x,
                                       const MonteCarlo& mc);

} // namespace ergolab

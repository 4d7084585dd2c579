#pragma once

#include "ulam/control.hpp"
#include "ulam/mappings.hpp"
#include "ulam/report.hpp"
#include "ulam/samples.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ulam {

/// Scaled dyadic iterates s_k:
///   P_div: 2^k f(x/2^k, z)     Q_div: 4^k f(x, z/2^k)
///   P_mul: 2^-k f(2^k x, z)    Q_mul: 4^-k f(x, 2^k z)
enum class Route { P_div, Q_div, P_mul, Q_mul };

std::string_view to_string(Route r);
Route route_from_string(std::string_view s);

/// The two route families: halving (P_div, Q_div) and doubling (P_mul, Q_mul).
enum class Family { halving, doubling };

std::string_view to_string(Family f);
Route p_route(Family f);
Route q_route(Family f);

enum class Verdict { converged, diverged, undecided };

std::string_view to_string(Verdict v);

struct ExtractionOptions {
    double tol = 1e-10;
    int k_max = 60;
    SeriesOptions series;
};

struct ExtractionTrace {
    Route route = Route::P_div;
    SpaceSpec target;
    Vector x, z;
    std::vector<Vector> iterates;
    /// gaps[k] = ||s_{k+1} - s_k||
    std::vector<double> gaps;
    /// tail_bounds[k] = Cauchy estimate of ||s_k - lim s||, i.e. the tail
    /// from k to infinity (+inf when that series diverges).
    std::vector<double> tail_bounds;
    Verdict verdict = Verdict::undecided;
    /// Last iterate when converged.
    std::optional<Vector> limit;
    int k_stop = 0;
    /// Step at which the scaled evaluation overflowed.
    std::optional<int> overflow_k;

    double last_gap() const { return gaps.empty() ? 0.0 : gaps.back(); }
    double last_tail() const;
};

/// Runs the iterates until the verdict is reached or k_max.
///
/// converged: gaps ||s_{k} - s_{k-1}|| <= tol * max(1, ||s_k||) for three
/// consecutive k and the Cauchy tail at k is <= tol. diverged: ||s_k|| grows
/// with non-shrinking gaps for 5 consecutive k, or the scaled evaluation
/// overflows. Otherwise undecided at k_max.
ExtractionTrace extract(Route route, const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                        const Vector& z, const ExtractionOptions& opts = {});

ExtractionTrace extract_P_div(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts = {});
ExtractionTrace extract_Q_div(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts = {});
ExtractionTrace extract_P_mul(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts = {});
ExtractionTrace extract_Q_mul(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts = {});

/// Term j of the Cauchy estimate for the route:
///   P_div: 2^{j beta} phi(x/2^{j+1}, x/2^{j+1}) phi(z, 0)
///   Q_div: 4^{j beta} phi(x, 0) phi(z/2^{j+1}, z/2^{j+1})
///   P_mul: 2^{-(j+1) beta} phi(2^j x, 2^j x) phi(z, 0)
///   Q_mul: 4^{-(j+1) beta} phi(x, 0) phi(2^j z, 2^j z)
double cauchy_term(const ControlFunction& phi, double beta, int j, Route route, const Vector& x, const Vector& z);

/// Sum of cauchy_term over j in [l, m), or over j >= l when m is empty.
/// The infinite tail is the rescaled stability series, e.g. for P_div
/// 2^{l beta} Psi(x/2^l, x/2^l) phi(z, 0); +inf when that series diverges.
double cauchy_tail_bound(const ControlFunction& phi, double beta, int l, std::optional<int> m, Route route,
                         const Vector& x, const Vector& z, const SeriesOptions& opts = {});

/// Checks ||s_l - s_m|| <= cauchy_tail_bound(l, m) for every recorded pair
/// l < m, with relative slack rel_slop for rounding.
AuditReport check_cauchy_domination(const ExtractionTrace& trace, const ControlFunction& phi, double beta,
                                    double rel_slop = 1e-12);

struct Reconciliation {
    std::vector<ExtractionTrace> p_traces, q_traces;
    /// F = P at each sample; empty unless the check passed.
    std::vector<Vector> F;
    AuditReport report;
};

/// Extracts P and Q at every sample and checks ||P - Q|| <= tol. Refused
/// when any trace did not converge.
Reconciliation reconcile_F(const Mapping& f, const ControlFunction& phi, double beta,
                           std::span<const PairSample> points, Family family, const ExtractionOptions& opts = {});

/// Lazily evaluated mapping whose value at (x, z) is the P-route limit.
/// Throws NumericError where the extraction does not converge.
Mapping extracted_mapping(const Mapping& f, const ControlFunction& phi, double beta, Family family,
                          const ExtractionOptions& opts = {});

/// Bound 2 eps / (2 - 2^p) * |x|^p of the single-variable calibration case.
double rassias_bound(double p, double eps, double x_abs);

struct RassiasResult {
    std::vector<double> T;
    /// |g(x) - T(x)| / (eps |x|^p), NaN at x = 0.
    std::vector<double> measured_ratio;
    AuditReport report;
};

/// T(x) = lim 2^-n g(2^n x), extracted at each sample, then
/// |g(x) - T(x)| <= 2 eps / (2 - 2^p) |x|^p is checked. The stopping rule
/// uses the analytic tail eps |x|^p 2^{n(p-1)} / (1 - 2^{p-1}).
RassiasResult rassias_calibration(const std::function<double(double)>& g, double p, double eps,
                                  std::span<const double> x_samples, double tol, int n_max = 200);

}  // namespace ulam

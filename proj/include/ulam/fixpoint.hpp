#pragma once

#include "ulam/control.hpp"
#include "ulam/direct.hpp"
#include "ulam/mappings.hpp"
#include "ulam/report.hpp"
#include "ulam/samples.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ulam {

/// Scaling operators on mappings:
///   J:           2 g(x/2, z)      J_prime:     4 g(x, z/2)
///   J_mul:     1/2 g(2x, z)       J_prime_mul: 1/4 g(x, 2z)
enum class JVariant { J, J_prime, J_mul, J_prime_mul };

std::string_view to_string(JVariant v);
JVariant jvariant_from_string(std::string_view s);

/// first: phi(x, x) phi(z, 0);  second: phi(x, 0) phi(z, z).
enum class WeightKind { first, second };

std::string_view to_string(WeightKind w);

double metric_weight(const ControlFunction& phi, WeightKind kind, const Vector& x, const Vector& z);

/// Lazy J g.
Mapping apply_J(const Mapping& g, JVariant v);
/// Lazy J^n g as one closure (no nested chain).
Mapping iterate_J(const Mapping& g, JVariant v, int n);

struct GeneralizedDistance {
    double value = 0.0;  // may be +inf
    std::optional<PairSample> witness;
    WeightKind weight_kind = WeightKind::first;
    std::size_t samples = 0;

    bool infinite() const noexcept;
};

/// sup over samples of ||g - h|| / weight. Zero-weight points are skipped
/// when g = h there and give +inf otherwise.
GeneralizedDistance gen_metric(const Mapping& g, const Mapping& h, const ControlFunction& phi, WeightKind kind,
                               std::span<const PairSample> samples);

/// max over probe pairs of d(Jg, Jh) / d(g, h). Probes with d(g, h) zero or
/// infinite are skipped; InputError when none remain.
double contraction_factor(JVariant v, const ControlFunction& phi, WeightKind kind,
                          std::span<const std::pair<Mapping, Mapping>> probes, std::span<const PairSample> samples);

enum class Alternative { converged, infinite_distance, diverging, max_iterations };

std::string_view to_string(Alternative a);

struct FixpointRun {
    JVariant op = JVariant::J;
    WeightKind weight = WeightKind::first;
    int n = 0;
    /// distances[k] = d(J^k f, J^{k+1} f)
    std::vector<double> distances;
    /// ratios[k] = distances[k+1] / distances[k] (NaN when undefined)
    std::vector<double> ratios;
    double alpha_measured = 0.0;
    Alternative alternative = Alternative::max_iterations;
    /// J^n f, evaluated lazily.
    std::optional<Mapping> limit;
    /// J^n f on the samples.
    std::vector<Vector> limit_values;
    /// max ||J F - F|| over the samples.
    double fixed_point_residual = 0.0;
    /// a-posteriori check d(f, F) <= d(f, J f) / (1 - alpha_measured)
    double d_f_limit = 0.0;
    double posterior_bound = 0.0;
    bool posterior_holds = false;
    std::size_t samples = 0;
};

/// Iterates J from f until d(J^n f, J^{n+1} f) <= tol and ||J^{n+1} f - J^n f||
/// <= tol on every sample, an infinite distance, 5 consecutive growing
/// distances, or n_max.
FixpointRun dm_iterate(JVariant v, const Mapping& f, const ControlFunction& phi, WeightKind kind,
                       std::span<const PairSample> samples, int n_max, double tol);

/// halving: min{L/(2^b (1-L)) phi(x,x)phi(z,0), L/(4^b (1-L)) phi(x,0)phi(z,z)}
/// doubling: min{1/(2^b (1-L)) phi(x,x)phi(z,0), 1/(4^b (1-L)) phi(x,0)phi(z,z)}
/// InputError unless 0 < L < 1.
double stability_bound_fp(double L, double beta, const ControlFunction& phi, const Vector& x, const Vector& z,
                          Family family);

struct FixpointOutcome {
    AuditReport report;
    std::vector<FixpointRun> runs;  // empty when refused
    std::vector<Vector> F;
};

/// Checks the Lipschitz condition for (phi, L), runs both operators of the
/// family, reconciles their limits, verifies the stability bound on the
/// samples and compares with direct_F when given. tol stops the iteration;
/// agree_tol bounds the deviation between limits from different routes.
FixpointOutcome fp_extract_and_verify(const Mapping& f, const ControlFunction& phi, double beta, double L,
                                      Family family, std::span<const PairSample> samples, double tol,
                                      int n_max = 200, const std::vector<Vector>* direct_F = nullptr,
                                      double agree_tol = 1e-10);

}  // namespace ulam

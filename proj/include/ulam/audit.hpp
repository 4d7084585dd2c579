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

/// Residuals on sampled tuples (x, y, z, w):
///   structure.full_equation:   F(x+y, z+w) + F(x-y, z-w) - 2F(x, z) - 2F(x, w)
///   structure.first_slot:      F(x+y, z) - F(x, z) - F(y, z)
///   structure.second_slot:     F(x, z+w) + F(x, z-w) - 2F(x, z) - 2F(x, w)
/// Each entry passes when the worst residual norm is <= tol. The witness is
/// the first tuple (in sample order) attaining the worst residual.
AuditReport check_structure(const Mapping& F, std::span<const TupleSample> samples, double tol);

/// Pointwise ||f(x, z) - F(x, z)|| <= min{Psi(x,x) phi(z,0), phi(x,0) Phi(z,z)}
/// with the series of the family. F_values are F at the samples. Refused
/// when a series diverges at some sample.
AuditReport verify_direct_bound(const Mapping& f, std::span<const Vector> F_values, const ControlFunction& phi,
                                double beta, Family family, std::span<const PairSample> samples,
                                const SeriesOptions& opts = {});

/// Power-control corollaries, by the method and regime they follow from:
///   direct_halving_power      r > 2, constant 2 theta / (2^{beta r} - 2^beta)
///   direct_halving_quasi      quasi-normed target, p = beta, bound taken to the power 1/p
///   direct_doubling_power     r < 1, constant 2 theta / (4^beta - 2^{beta r})
///   direct_doubling_quasi     quasi-normed target, doubling series
///   fixpoint_halving_power    r > 1, L = (2^{r beta} - 2^beta) / (2^{r beta} - 2^beta + 1)
///   fixpoint_doubling_power   r < 1, L = 2^{beta (r - 2)}
enum class CorollaryId {
    direct_halving_power,
    direct_halving_quasi,
    direct_doubling_power,
    direct_doubling_quasi,
    fixpoint_halving_power,
    fixpoint_doubling_power,
};

std::string_view to_string(CorollaryId id);
CorollaryId corollary_from_string(std::string_view s);

/// Recomputes the printed constant from the bound formula it is derived
/// from, checks the printed min{} identity on the samples and checks the
/// stated hypothesis (series convergence, or the Lipschitz condition with
/// the stated L). Disagreements are reported as flagged entries carrying
/// both values. Throws InputError when r is outside the stated range.
AuditReport audit_corollary(CorollaryId id, double theta, double r, double beta,
                            std::span<const PairSample> samples);

/// Pairwise max deviation between the three route values on common
/// samples. Refused when a route is missing.
AuditReport route_consistency(const std::optional<std::vector<Vector>>& direct,
                              const std::optional<std::vector<Vector>>& fixpoint_J,
                              const std::optional<std::vector<Vector>>& fixpoint_J_prime,
                              std::span<const PairSample> samples, const SpaceSpec& Y, double tol);

}  // namespace ulam

#pragma once

#include "ulam/report.hpp"
#include "ulam/vector.hpp"

#include <nlohmann/json_fwd.hpp>

#include <span>
#include <string_view>
#include <vector>

namespace ulam {

enum class NormKind { beta_homogeneous, quasi, p_norm };

std::string_view to_string(NormKind kind);
NormKind norm_kind_from_string(std::string_view s);

/// A finite-dimensional real vector space together with its norm law.
///
/// Every norm is built on a degree-1 homogeneous "base magnitude" of the
/// coordinate vector: the Euclidean length (base_exponent == 2) or the
/// l_q functional (sum |v_i|^q)^(1/q) for other q. In dimension 1 the base
/// magnitude is |v| for every q.
///
///  - beta_homogeneous: ||v|| = base(v)^beta, an F-norm with
///    ||t v|| = |t|^beta ||v||.
///  - quasi: the l_q quasi-norm with q = 1/(1 + log2 C). In dimension >= 2 its
///    quasi-norm constant is exactly C.
///  - p_norm: the p-subadditive l_p quasi-norm.
///
/// Scalars are real.
struct SpaceSpec {
    int dimension = 1;
    NormKind kind = NormKind::beta_homogeneous;
    double beta = 1.0;
    double quasi_constant = 1.0;
    double p_exponent = 1.0;
    double base_exponent = 2.0;

    static SpaceSpec beta_homogeneous(int dim, double beta);
    static SpaceSpec quasi(int dim, double C);
    static SpaceSpec p_norm(int dim, double p);

    /// Throws InputError when a parameter is outside its admissible range.
    void validate() const;

    /// Homogeneity degree of the norm: beta, or 1 for quasi and p-norms.
    double homogeneity() const noexcept;

    friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;
};

void to_json(nlohmann::json& j, const SpaceSpec& s);
void from_json(const nlohmann::json& j, SpaceSpec& s);

double norm_eval(const SpaceSpec& space, const Vector& v);

/// Default null sequences used for the limit axioms.
std::vector<std::vector<double>> default_null_sequences();

/// Empirical check of the six F-norm axioms. Definiteness, symmetry and the triangle inequality are tested
/// exactly on the samples and sample pairs; the limit axioms on finite
/// prefixes of the null sequences with a decreasing-trend test (last value
/// below first value times 1e-3).
AuditReport check_fnorm_axioms(const SpaceSpec& space,
                               std::span<const Vector> samples,
                               std::span<const std::vector<double>> null_sequences,
                               double tol = 1e-12);

AuditReport check_beta_homogeneity(const SpaceSpec& space,
                                   std::span<const Vector> samples,
                                   std::span<const double> scalars,
                                   double tol = 1e-12);

/// sup over ordered sample pairs (diagonal included) of
/// ||x+y|| / (||x|| + ||y||). A lower estimate of the quasi-norm constant;
/// may be below 1 for F-norms that are not quasi-norms.
double quasi_constant_estimate(const SpaceSpec& space, std::span<const Vector> samples);

/// p = 1/(1 + log2 C).
double aoki_rolewicz_exponent(double C);

/// The p-th power of a p-norm, as a p-homogeneous F-norm.
SpaceSpec induce_fnorm_from_pnorm(const SpaceSpec& space);

}  // namespace ulam

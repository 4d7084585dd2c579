#pragma once

#include "ulam/report.hpp"
#include "ulam/spaces.hpp"
#include "ulam/vector.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace ulam {

enum class ControlKind { power, custom };

/// Upper bounds on how a custom control function scales under argument
/// halving and doubling:
///   phi(x/2, y/2) <= halving * phi(x, y),  phi(2x, 2y) <= doubling * phi(x, y).
/// Series over custom functions use these for their tail estimate; without a
/// claim the evaluator relies on the observed term ratios only.
struct ScalingClaim {
    std::optional<double> halving;
    std::optional<double> doubling;
};

/// The control function phi: X^2 -> [0, inf).
///
/// Power kind: phi(x, y) = sqrt(theta) * (||x||^r + ||y||^r), with ||.|| the
/// norm of the attached space.
class ControlFunction {
public:
    using Fn = std::function<double(const Vector&, const Vector&)>;

    static ControlFunction power(SpaceSpec space, double theta, double r);
    static ControlFunction custom(SpaceSpec space, Fn fn, ScalingClaim claim = {});

    /// phi(x, y). Throws ContractError when a custom function returns a
    /// negative or non-finite value.
    double operator()(const Vector& x, const Vector& y) const;

    ControlKind kind() const noexcept { return kind_; }
    double theta() const noexcept { return theta_; }
    double r() const noexcept { return r_; }
    const SpaceSpec& space() const noexcept { return space_; }
    const ScalingClaim& claim() const noexcept { return claim_; }

    /// True when phi vanishes everywhere (power kind with theta == 0).
    bool identically_zero() const noexcept { return kind_ == ControlKind::power && theta_ == 0.0; }

private:
    ControlKind kind_ = ControlKind::power;
    SpaceSpec space_;
    double theta_ = 0.0;
    double r_ = 1.0;
    Fn fn_;
    ScalingClaim claim_;
};

double phi_eval(const ControlFunction& phi, const Vector& x, const Vector& y);

struct SeriesResult {
    double value = 0.0;
    int terms_used = 0;
    /// Geometric extrapolation of the neglected tail; +inf when not converged.
    double tail_bound = 0.0;
    bool converged = false;
    /// Last observed (or claimed) term ratio.
    double ratio = 0.0;

    /// value + tail_bound: an upper estimate of the full sum.
    double upper() const noexcept { return value + tail_bound; }
};

struct SeriesOptions {
    double tol = 1e-12;
    int max_terms = 20000;
};

/// Divergence margin: a term ratio >= 1 - kRatioMargin counts as non-contracting.
inline constexpr double kRatioMargin = 1e-9;
/// Consecutive non-contracting ratios needed for a divergence verdict.
inline constexpr int kDivergenceRun = 8;

/// Sums term(first), term(first+1), ... left to right.
///
/// Stops when the geometric tail estimate last_term * rho / (1 - rho) is at
/// most tol * max(1, partial sum), where rho is the claimed ratio or else the
/// largest of the last three observed ratios between consecutive nonzero
/// terms. A ratio >= 1 - 1e-9 over 8 consecutive terms is a divergence
/// verdict. Exhausting max_terms is a non-convergence verdict.
SeriesResult sum_series(const std::function<double(int)>& term, int first, const SeriesOptions& opts,
                        std::optional<double> claimed_ratio = std::nullopt);

enum class SeriesId { halving_additive, halving_quadratic, doubling_additive, doubling_quadratic };

std::string_view to_string(SeriesId id);
SeriesId series_id_from_string(std::string_view s);

/// Phi(x,y) = sum_{j>=1} 4^{(j-1)beta} phi(x/2^j, y/2^j)
SeriesResult halving_quadratic_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                      const SeriesOptions& opts = {});
/// Psi(x,y) = sum_{j>=1} 2^{(j-1)beta} phi(x/2^j, y/2^j)
SeriesResult halving_additive_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                     const SeriesOptions& opts = {});
/// Psi(x,y) = sum_{j>=0} 2^{-(j+1)beta} phi(2^j x, 2^j y)
SeriesResult doubling_additive_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                      const SeriesOptions& opts = {});
/// Phi(x,y) = sum_{j>=0} 4^{-(j+1)beta} phi(2^j x, 2^j y)
SeriesResult doubling_quadratic_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                       const SeriesOptions& opts = {});

SeriesResult evaluate_series(SeriesId id, const ControlFunction& phi, const Vector& x, const Vector& y,
                             double beta, const SeriesOptions& opts = {});

/// Coefficient c with series(x, y) = c * phi(x, y) for power-type phi,
/// or nullopt when the series diverges:
///   halving_additive:    1/(2^{beta r} - 2^beta)  (r > 1)
///   halving_quadratic:   1/(2^{beta r} - 4^beta)  (r > 2)
///   doubling_additive:   1/(2^beta - 2^{beta r})  (r < 1)
///   doubling_quadratic:  1/(4^beta - 2^{beta r})  (r < 2)
std::optional<double> closed_form_power(double theta, double r, double beta, SeriesId which);

/// Analytic term ratio of the series for power-type phi.
double power_term_ratio(double r, double beta, SeriesId which);

/// Condition phi(x/2, y/2) <= (L/4^beta) phi(x, y) <= (L/2^beta) phi(x, y).
/// Reports the worst ratio 4^beta phi(x/2,y/2)/phi(x,y) against L.
/// Pairs with phi(x, y) = 0 are skipped.
AuditReport check_halving_condition(const ControlFunction& phi, double L, double beta,
                                    std::span<const std::pair<Vector, Vector>> samples);

/// Condition phi(x, y) <= 2^beta L phi(x/2, y/2) <= 4^beta L phi(x/2, y/2).
/// Reports the worst ratio phi(x,y) / (2^beta phi(x/2,y/2)) against L.
AuditReport check_doubling_condition(const ControlFunction& phi, double L, double beta,
                                     std::span<const std::pair<Vector, Vector>> samples);

enum class LipschitzCondition { halving, doubling };

struct RequiredL {
    double value = 0.0;
    std::pair<Vector, Vector> witness;
    /// False reads as "none < 1": no admissible L exists on the samples.
    bool below_one() const noexcept { return value < 1.0; }
};

/// Tightest L satisfying the chosen condition on the samples.
RequiredL smallest_L(const ControlFunction& phi, double beta,
                     std::span<const std::pair<Vector, Vector>> samples, LipschitzCondition condition);

}  // namespace ulam

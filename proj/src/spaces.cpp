#include "ulam/spaces.hpp"

#include "ulam/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ulam {

std::string_view to_string(NormKind kind)
{
    switch (kind) {
    case NormKind::beta_homogeneous: return "beta_homogeneous";
    case NormKind::quasi: return "quasi";
    case NormKind::p_norm: return "p_norm";
    }
    return "?";
}

NormKind norm_kind_from_string(std::string_view s)
{
    if (s == "beta_homogeneous") return NormKind::beta_homogeneous;
    if (s == "quasi") return NormKind::quasi;
    if (s == "p_norm") return NormKind::p_norm;
    throw InputError("unknown norm kind '" + std::string(s) + "'");
}

SpaceSpec SpaceSpec::beta_homogeneous(int dim, double beta)
{
    SpaceSpec s;
    s.dimension = dim;
    s.kind = NormKind::beta_homogeneous;
    s.beta = beta;
    s.validate();
    return s;
}

SpaceSpec SpaceSpec::quasi(int dim, double C)
{
    SpaceSpec s;
    s.dimension = dim;
    s.kind = NormKind::quasi;
    s.quasi_constant = C;
    s.validate();
    return s;
}

SpaceSpec SpaceSpec::p_norm(int dim, double p)
{
    SpaceSpec s;
    s.dimension = dim;
    s.kind = NormKind::p_norm;
    s.p_exponent = p;
    s.validate();
    return s;
}

void SpaceSpec::validate() const
{
    if (dimension < 1) throw InputError("space dimension must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw InputError("beta must lie in (0, 1]");
    if (!(quasi_constant >= 1.0) || !std::isfinite(quasi_constant))
        throw InputError("quasi-norm constant C must be >= 1");
    if (!(p_exponent > 0.0 && p_exponent <= 1.0)) throw InputError("p must lie in (0, 1]");
    if (!(base_exponent > 0.0) || !std::isfinite(base_exponent))
        throw InputError("base exponent must be positive");
}

double SpaceSpec::homogeneity() const noexcept
{
    return kind == NormKind::beta_homogeneous ? beta : 1.0;
}

namespace {

// (sum |v_i|^q)^(1/q); Euclidean for q == 2; exactly |v| in dimension one.
double base_magnitude(std::span<const double> v, double q)
{
    if (v.size() == 1) return std::fabs(v[0]);
    if (q == 2.0) {
        double s = 0.0;
        for (double c : v) s += c * c;
        return std::sqrt(s);
    }
    double s = 0.0;
    for (double c : v) s += std::pow(std::fabs(c), q);
    return std::pow(s, 1.0 / q);
}

void check_vector(const SpaceSpec& space, const Vector& v)
{
    if (v.size() != static_cast<std::size_t>(space.dimension))
        throw StructuralError("vector of dimension " + std::to_string(v.size()) +
                              " used in a space of dimension " + std::to_string(space.dimension));
    if (!v.is_finite()) throw InputError("non-finite coordinate in " + v.to_string());
}

}  // namespace

double norm_eval(const SpaceSpec& space, const Vector& v)
{
    check_vector(space, v);
    switch (space.kind) {
    case NormKind::beta_homogeneous: {
        double m = base_magnitude(v.coords(), space.base_exponent);
        return space.beta == 1.0 ? m : std::pow(m, space.beta);
    }
    case NormKind::quasi:
        return base_magnitude(v.coords(), aoki_rolewicz_exponent(space.quasi_constant));
    case NormKind::p_norm:
        return base_magnitude(v.coords(), space.p_exponent);
    }
    return 0.0;
}

void to_json(nlohmann::json& j, const SpaceSpec& s)
{
    j = nlohmann::json{{"dimension", s.dimension}, {"kind", std::string(to_string(s.kind))}};
    switch (s.kind) {
    case NormKind::beta_homogeneous: j["beta"] = s.beta; break;
    case NormKind::quasi: j["C"] = s.quasi_constant; break;
    case NormKind::p_norm: j["p"] = s.p_exponent; break;
    }
    if (s.base_exponent != 2.0) j["base_exponent"] = s.base_exponent;
}

void from_json(const nlohmann::json& j, SpaceSpec& s)
{
    if (!j.is_object()) throw ConfigError("space must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "dimension" && key != "kind" && key != "beta" && key != "C" && key != "p" &&
            key != "base_exponent")
            throw ConfigError("unknown space key '" + key + "'");
    }
    try {
        SpaceSpec out;
        out.dimension = j.at("dimension").get<int>();
        out.kind = norm_kind_from_string(j.at("kind").get<std::string>());
        switch (out.kind) {
        case NormKind::beta_homogeneous: out.beta = j.at("beta").get<double>(); break;
        case NormKind::quasi: out.quasi_constant = j.at("C").get<double>(); break;
        case NormKind::p_norm: out.p_exponent = j.at("p").get<double>(); break;
        }
        if (j.contains("base_exponent")) out.base_exponent = j.at("base_exponent").get<double>();
        out.validate();
        s = out;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("space: ") + e.what());
    } catch (const InputError& e) {
        throw ConfigError(std::string("space: ") + e.what());
    }
}

std::vector<std::vector<double>> default_null_sequences()
{
    std::vector<double> halving(1001), alternating(700);
    for (int n = 0; n <= 1000; ++n) halving[n] = std::ldexp(1.0, -n);
    for (int n = 0; n < 700; ++n) alternating[n] = (n % 2 ? -1.0 : 1.0) * std::pow(3.0, -n);
    return {std::move(halving), std::move(alternating)};
}

namespace {

struct TrendResult {
    double worst_violation = 0.0;
    double margin = std::numeric_limits<double>::infinity();
    std::optional<Witness> witness;
};

// Decreasing-trend surrogate for a limit statement: last <= first * 1e-3.
void record_trend(TrendResult& r, double first, double last, const Vector& v, double scalar)
{
    double target = first * 1e-3;
    double violation = std::max(0.0, last - target);
    double margin = target - last;
    if (margin < r.margin) {
        r.margin = margin;
        r.witness = Witness{{v}, {{"first", first}, {"last", last}, {"scalar", scalar}}};
    }
    r.worst_violation = std::max(r.worst_violation, violation);
}

AuditEntry trend_entry(std::string id, const TrendResult& r, std::string notes)
{
    AuditEntry e;
    e.check_id = std::move(id);
    e.status = r.worst_violation > 0.0 ? Status::fail : Status::pass;
    e.margin = std::isfinite(r.margin) ? r.margin : 0.0;
    e.witness = r.witness;
    e.values["worst_violation"] = r.worst_violation;
    e.notes = std::move(notes);
    return e;
}

}  // namespace

AuditReport check_fnorm_axioms(const SpaceSpec& space,
                               std::span<const Vector> samples,
                               std::span<const std::vector<double>> null_sequences,
                               double tol)
{
    if (samples.empty()) throw InputError("check_fnorm_axioms needs at least one sample");
    space.validate();
    AuditReport report;
    const auto dim = static_cast<std::size_t>(space.dimension);
    const std::string n_samples = "sampled on " + std::to_string(samples.size()) + " vectors";

    std::vector<double> norms;
    norms.reserve(samples.size());
    for (const auto& v : samples) norms.push_back(norm_eval(space, v));

    // definiteness: ||x|| = 0 iff x = 0
    {
        double at_zero = norm_eval(space, Vector::zeros(dim));
        AuditEntry e{.check_id = "axiom.definiteness"};
        e.values["norm_of_zero"] = at_zero;
        std::size_t bad = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!samples[i].is_zero() && !(norms[i] > 0.0)) {
                ++bad;
                if (!e.witness) e.witness = Witness{{samples[i]}, {{"norm", norms[i]}}};
            }
        }
        e.values["zero_norm_nonzero_vectors"] = static_cast<double>(bad);
        if (at_zero != 0.0 && !e.witness)
            e.witness = Witness{{Vector::zeros(dim)}, {{"norm", at_zero}}};
        e.status = (at_zero == 0.0 && bad == 0) ? Status::pass : Status::fail;
        e.margin = e.status == Status::pass ? 0.0 : -std::max(at_zero, 1.0);
        e.notes = n_samples;
        report.add(std::move(e));
    }

    // symmetry: ||lambda x|| = ||x|| for |lambda| = 1 (real scalars: lambda = -1)
    {
        AuditEntry e{.check_id = "axiom.symmetry"};
        double worst = 0.0;
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double diff = std::fabs(norm_eval(space, -samples[i]) - norms[i]);
            double m = tol * (1.0 + norms[i]) - diff;
            if (m < margin) {
                margin = m;
                e.witness = Witness{{samples[i]}, {{"abs_difference", diff}}};
            }
            worst = std::max(worst, diff);
        }
        e.values["worst_violation"] = worst;
        e.status = margin >= 0.0 ? Status::pass : Status::fail;
        e.margin = margin;
        e.notes = n_samples;
        report.add(std::move(e));
    }

    // triangle inequality over ordered pairs
    {
        AuditEntry e{.check_id = "axiom.triangle"};
        double worst = -std::numeric_limits<double>::infinity();
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            for (std::size_t k = 0; k < samples.size(); ++k) {
                double lhs = norm_eval(space, samples[i] + samples[k]);
                double excess = lhs - norms[i] - norms[k];
                double m = tol * (1.0 + norms[i] + norms[k]) - excess;
                if (excess > worst) worst = excess;
                if (m < margin) {
                    margin = m;
                    e.witness = Witness{{samples[i], samples[k]},
                                        {{"norm_sum", lhs}, {"sum_of_norms", norms[i] + norms[k]},
                                         {"excess", excess}}};
                }
            }
        }
        e.values["worst_violation"] = std::max(0.0, worst);
        e.status = margin >= 0.0 ? Status::pass : Status::fail;
        e.margin = margin;
        e.notes = n_samples;
        report.add(std::move(e));
    }

    // limit axioms on finite prefixes
    static constexpr double kFixedScalars[] = {-2.5, 0.5, 3.0};
    TrendResult ax_scalar, ax_vector, ax_joint;
    for (const auto& seq : null_sequences) {
        if (seq.size() < 2) throw InputError("null sequences need at least two terms");
        for (const auto& v : samples) {
            if (v.is_zero()) continue;
            record_trend(ax_scalar, norm_eval(space, seq.front() * v), norm_eval(space, seq.back() * v), v,
                         seq.back());
            for (double lambda : kFixedScalars) {
                record_trend(ax_vector, norm_eval(space, lambda * (seq.front() * v)),
                             norm_eval(space, lambda * (seq.back() * v)), v, lambda);
            }
            record_trend(ax_joint, norm_eval(space, seq.front() * (seq.front() * v)),
                         norm_eval(space, seq.back() * (seq.back() * v)), v, seq.back());
        }
    }
    const std::string trend_note = "finite-prefix trend test over " + std::to_string(null_sequences.size()) +
                                   " null sequences; " + n_samples;
    report.add(trend_entry("axiom.scalar_null_sequence", ax_scalar, trend_note));
    report.add(trend_entry("axiom.vector_null_sequence", ax_vector, trend_note));
    report.add(trend_entry("axiom.joint_null_sequence", ax_joint, trend_note));
    return report;
}

AuditReport check_beta_homogeneity(const SpaceSpec& space,
                                   std::span<const Vector> samples,
                                   std::span<const double> scalars,
                                   double tol)
{
    if (space.kind != NormKind::beta_homogeneous)
        throw ContractError("beta-homogeneity check requires a beta_homogeneous space, got " +
                            std::string(to_string(space.kind)));
    AuditEntry e{.check_id = "beta_homogeneity"};
    double worst = 0.0;
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& v : samples) {
        double nv = norm_eval(space, v);
        for (double t : scalars) {
            double lhs = norm_eval(space, t * v);
            double rhs = std::pow(std::fabs(t), space.beta) * nv;
            double diff = std::fabs(lhs - rhs);
            double m = tol * (1.0 + nv) - diff;
            worst = std::max(worst, diff);
            if (m < margin) {
                margin = m;
                e.witness = Witness{{v}, {{"scalar", t}, {"norm_scaled", lhs}, {"expected", rhs}}};
            }
        }
    }
    e.values["worst_violation"] = worst;
    e.values["beta"] = space.beta;
    e.margin = std::isfinite(margin) ? margin : 0.0;
    e.status = e.margin >= 0.0 ? Status::pass : Status::fail;
    AuditReport r;
    r.add(std::move(e));
    return r;
}

double quasi_constant_estimate(const SpaceSpec& space, std::span<const Vector> samples)
{
    std::vector<double> norms;
    norms.reserve(samples.size());
    for (const auto& v : samples) norms.push_back(norm_eval(space, v));
    double best = -1.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t k = 0; k < samples.size(); ++k) {
            double denom = norms[i] + norms[k];
            if (denom <= 0.0) continue;
            best = std::max(best, norm_eval(space, samples[i] + samples[k]) / denom);
        }
    }
    if (best < 0.0) throw InputError("quasi-constant estimate needs a sample pair with positive norm sum");
    return best;
}

double aoki_rolewicz_exponent(double C)
{
    if (!(C >= 1.0) || !std::isfinite(C)) throw InputError("Aoki-Rolewicz exponent needs C >= 1");
    return 1.0 / (1.0 + std::log2(C));
}

SpaceSpec induce_fnorm_from_pnorm(const SpaceSpec& space)
{
    if (space.kind != NormKind::p_norm)
        throw ContractError("induce_fnorm_from_pnorm needs a p_norm space, got " +
                            std::string(to_string(space.kind)));
    space.validate();
    SpaceSpec out = space;
    out.kind = NormKind::beta_homogeneous;
    out.beta = space.p_exponent;
    out.base_exponent = space.p_exponent;
    return out;
}

}  // namespace ulam

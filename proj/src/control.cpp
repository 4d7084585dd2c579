#include "ulam/control.hpp"

#include "ulam/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace ulam {

ControlFunction ControlFunction::power(SpaceSpec space, double theta, double r)
{
    space.validate();
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw InputError("theta must be a finite nonnegative number");
    if (!(r > 0.0) || !std::isfinite(r)) throw InputError("exponent r must be positive");
    ControlFunction c;
    c.kind_ = ControlKind::power;
    c.space_ = space;
    c.theta_ = theta;
    c.r_ = r;
    return c;
}

ControlFunction ControlFunction::custom(SpaceSpec space, Fn fn, ScalingClaim claim)
{
    space.validate();
    if (!fn) throw InputError("custom control function is empty");
    for (auto v : {claim.halving, claim.doubling})
        if (v && (!(*v >= 0.0) || !std::isfinite(*v))) throw InputError("scaling claims must be finite and >= 0");
    ControlFunction c;
    c.kind_ = ControlKind::custom;
    c.space_ = space;
    c.fn_ = std::move(fn);
    c.claim_ = claim;
    return c;
}

double ControlFunction::operator()(const Vector& x, const Vector& y) const
{
    if (kind_ == ControlKind::power) {
        double nx = norm_eval(space_, x);
        double ny = norm_eval(space_, y);
        return std::sqrt(theta_) * (std::pow(nx, r_) + std::pow(ny, r_));
    }
    double v = fn_(x, y);
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ContractError("custom control function returned " + std::to_string(v) + " at x=" +
                            x.to_string() + ", y=" + y.to_string());
    return v;
}

double phi_eval(const ControlFunction& phi, const Vector& x, const Vector& y) { return phi(x, y); }

SeriesResult sum_series(const std::function<double(int)>& term, int first, const SeriesOptions& opts,
                        std::optional<double> claimed_ratio)
{
    if (!(opts.tol > 0.0)) throw InputError("series tolerance must be positive");
    if (opts.max_terms < 1) throw InputError("max_terms must be positive");

    SeriesResult res;
    double partial = 0.0;
    double prev_nonzero = 0.0;
    std::array<double, 3> recent{};
    int n_recent = 0;
    int flat_run = 0;

    auto diverged = [&](double rho) {
        res.value = partial;
        res.tail_bound = std::numeric_limits<double>::infinity();
        res.converged = false;
        res.ratio = rho;
        return res;
    };

    for (int n = 0; n < opts.max_terms; ++n) {
        double t = term(first + n);
        res.terms_used = n + 1;
        if (!std::isfinite(t)) return diverged(std::numeric_limits<double>::infinity());
        partial += t;

        double rho;
        double step_ratio;
        if (claimed_ratio) {
            rho = step_ratio = *claimed_ratio;
        } else {
            if (t == 0.0) continue;
            if (prev_nonzero == 0.0) {
                prev_nonzero = t;
                continue;
            }
            step_ratio = t / prev_nonzero;
            prev_nonzero = t;
            recent[n_recent % 3] = step_ratio;
            ++n_recent;
            if (n_recent < 3) {
                if (step_ratio >= 1.0 - kRatioMargin) ++flat_run;
                else flat_run = 0;
                continue;
            }
            rho = *std::max_element(recent.begin(), recent.end());
        }
        res.ratio = rho;

        if (step_ratio >= 1.0 - kRatioMargin) {
            if (++flat_run >= kDivergenceRun) return diverged(step_ratio);
            continue;
        }
        flat_run = 0;
        if (rho >= 1.0 - kRatioMargin) continue;
        double tail = t * rho / (1.0 - rho);
        if (tail <= opts.tol * std::max(1.0, partial)) {
            res.value = partial;
            res.tail_bound = tail;
            res.converged = true;
            return res;
        }
    }
    res.value = partial;
    res.tail_bound = std::numeric_limits<double>::infinity();
    res.converged = false;
    return res;
}

std::string_view to_string(SeriesId id)
{
    switch (id) {
    case SeriesId::halving_additive: return "halving_additive";
    case SeriesId::halving_quadratic: return "halving_quadratic";
    case SeriesId::doubling_additive: return "doubling_additive";
    case SeriesId::doubling_quadratic: return "doubling_quadratic";
    }
    return "?";
}

SeriesId series_id_from_string(std::string_view s)
{
    if (s == "halving_additive") return SeriesId::halving_additive;
    if (s == "halving_quadratic") return SeriesId::halving_quadratic;
    if (s == "doubling_additive") return SeriesId::doubling_additive;
    if (s == "doubling_quadratic") return SeriesId::doubling_quadratic;
    throw InputError("unknown series id '" + std::string(s) + "'");
}

namespace {

bool downward(SeriesId id) { return id == SeriesId::halving_additive || id == SeriesId::halving_quadratic; }

// Log2 of the per-step weight factor of each series.
double weight_log2(SeriesId id, double beta)
{
    switch (id) {
    case SeriesId::halving_additive: return beta;
    case SeriesId::halving_quadratic: return 2.0 * beta;
    case SeriesId::doubling_additive: return -beta;
    case SeriesId::doubling_quadratic: return -2.0 * beta;
    }
    return 0.0;
}

std::optional<double> claimed_term_ratio(const ControlFunction& phi, SeriesId id, double beta)
{
    if (phi.kind() != ControlKind::custom) return std::nullopt;
    auto scaling = downward(id) ? phi.claim().halving : phi.claim().doubling;
    if (!scaling) return std::nullopt;
    return std::exp2(weight_log2(id, beta)) * *scaling;
}

}  // namespace

SeriesResult evaluate_series(SeriesId id, const ControlFunction& phi, const Vector& x, const Vector& y,
                             double beta, const SeriesOptions& opts)
{
    if (!(beta > 0.0 && beta <= 1.0)) throw InputError("beta must lie in (0, 1]");
    if (phi.kind() == ControlKind::power && phi(x, y) == 0.0) {
        // power phi vanishing at (x, y) vanishes at every dyadic rescaling
        return SeriesResult{.value = 0.0, .terms_used = 1, .tail_bound = 0.0, .converged = true, .ratio = 0.0};
    }
    const double w = weight_log2(id, beta);
    std::function<double(int)> term;
    int first = 0;
    if (phi.kind() == ControlKind::power) {
        // phi(2^s x, 2^s y) = 2^{s h r} phi(x, y) with h the homogeneity of the norm; summing in the log
        // domain avoids the overflow of 4^{j beta} against the underflow of phi(x/2^j, y/2^j)
        const double base = std::log2(phi(x, y));
        const double hr = phi.space().homogeneity() * phi.r();
        if (downward(id)) {
            first = 1;
            term = [=](int j) { return std::exp2((j - 1) * w - j * hr + base); };
        } else {
            term = [=](int j) { return std::exp2((j + 1) * w + j * hr + base); };
        }
        return sum_series(term, first, opts);
    }
    switch (id) {
    case SeriesId::halving_additive:
    case SeriesId::halving_quadratic:
        first = 1;
        term = [&, w](int j) { return std::exp2((j - 1) * w) * phi(x.scaled_pow2(-j), y.scaled_pow2(-j)); };
        break;
    case SeriesId::doubling_additive:
    case SeriesId::doubling_quadratic:
        first = 0;
        term = [&, w](int j) { return std::exp2((j + 1) * w) * phi(x.scaled_pow2(j), y.scaled_pow2(j)); };
        break;
    }
    return sum_series(term, first, opts, claimed_term_ratio(phi, id, beta));
}

SeriesResult halving_quadratic_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                      const SeriesOptions& opts)
{
    return evaluate_series(SeriesId::halving_quadratic, phi, x, y, beta, opts);
}

SeriesResult halving_additive_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                     const SeriesOptions& opts)
{
    return evaluate_series(SeriesId::halving_additive, phi, x, y, beta, opts);
}

SeriesResult doubling_additive_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                      const SeriesOptions& opts)
{
    return evaluate_series(SeriesId::doubling_additive, phi, x, y, beta, opts);
}

SeriesResult doubling_quadratic_series(const ControlFunction& phi, const Vector& x, const Vector& y, double beta,
                                       const SeriesOptions& opts)
{
    return evaluate_series(SeriesId::doubling_quadratic, phi, x, y, beta, opts);
}

std::optional<double> closed_form_power(double theta, double r, double beta, SeriesId which)
{
    if (!(theta >= 0.0)) throw InputError("theta must be nonnegative");
    const double br = std::exp2(beta * r);
    switch (which) {
    case SeriesId::halving_additive:
        if (!(r > 1.0)) return std::nullopt;
        return 1.0 / (br - std::exp2(beta));
    case SeriesId::halving_quadratic:
        if (!(r > 2.0)) return std::nullopt;
        return 1.0 / (br - std::exp2(2.0 * beta));
    case SeriesId::doubling_additive:
        if (!(r < 1.0)) return std::nullopt;
        return 1.0 / (std::exp2(beta) - br);
    case SeriesId::doubling_quadratic:
        if (!(r < 2.0)) return std::nullopt;
        return 1.0 / (std::exp2(2.0 * beta) - br);
    }
    return std::nullopt;
}

double power_term_ratio(double r, double beta, SeriesId which)
{
    switch (which) {
    case SeriesId::halving_additive: return std::exp2(beta * (1.0 - r));
    case SeriesId::halving_quadratic: return std::exp2(beta * (2.0 - r));
    case SeriesId::doubling_additive: return std::exp2(beta * (r - 1.0));
    case SeriesId::doubling_quadratic: return std::exp2(beta * (r - 2.0));
    }
    return 0.0;
}

namespace {

struct WorstRatio {
    double value = 0.0;
    std::optional<std::pair<Vector, Vector>> witness;
    double phi_full = 0.0;
    double phi_half = 0.0;
    std::size_t used = 0;
};

WorstRatio scan_ratio(const ControlFunction& phi, double beta,
                      std::span<const std::pair<Vector, Vector>> samples, LipschitzCondition cond)
{
    WorstRatio w;
    for (const auto& [x, y] : samples) {
        double full = phi(x, y);
        if (full == 0.0) continue;
        double half = phi(x.scaled_pow2(-1), y.scaled_pow2(-1));
        double ratio;
        if (cond == LipschitzCondition::halving) {
            ratio = std::exp2(2.0 * beta) * half / full;
        } else {
            ratio = half == 0.0 ? std::numeric_limits<double>::infinity() : full / (std::exp2(beta) * half);
        }
        ++w.used;
        if (!w.witness || ratio > w.value) {
            w.value = ratio;
            w.witness = std::pair{x, y};
            w.phi_full = full;
            w.phi_half = half;
        }
    }
    return w;
}

AuditReport condition_report(const ControlFunction& phi, double L, double beta,
                             std::span<const std::pair<Vector, Vector>> samples, LipschitzCondition cond)
{
    if (!(L > 0.0 && L < 1.0)) throw InputError("Lipschitz constant L must lie in (0, 1)");
    const bool halving = cond == LipschitzCondition::halving;
    WorstRatio w = scan_ratio(phi, beta, samples, cond);

    AuditEntry e{.check_id = halving ? "halving_condition" : "doubling_condition"};
    e.values["L"] = L;
    e.values["samples_used"] = static_cast<double>(w.used);
    if (halving) {
        // phi(x/2,y/2) <= (L/4^beta) phi <= (L/2^beta) phi; the second link holds for beta > 0
        e.values["available_halving_ratio"] = L / std::exp2(2.0 * beta);
        e.values["chain_bound_ratio"] = L / std::exp2(beta);
    } else {
        e.values["available_doubling_factor"] = std::exp2(beta) * L;
        e.values["chain_bound_factor"] = std::exp2(2.0 * beta) * L;
    }
    if (!w.witness) {
        e.status = Status::pass;
        e.margin = L;
        e.values["worst_ratio"] = 0.0;
        e.notes = "vacuous: phi vanishes on every sample";
    } else {
        e.values["worst_ratio"] = w.value;
        if (halving) e.values["observed_halving_ratio"] = w.phi_half / w.phi_full;
        else e.values["observed_doubling_factor"] = w.phi_full / w.phi_half;
        e.margin = L - w.value;
        e.status = w.value <= L ? Status::pass : Status::fail;
        e.witness = Witness{{w.witness->first, w.witness->second},
                            {{"phi_xy", w.phi_full}, {"phi_half", w.phi_half}, {"ratio", w.value}}};
        e.notes = "sampled on " + std::to_string(samples.size()) + " pairs";
    }
    AuditReport r;
    r.add(std::move(e));
    return r;
}

}  // namespace

AuditReport check_halving_condition(const ControlFunction& phi, double L, double beta,
                                    std::span<const std::pair<Vector, Vector>> samples)
{
    return condition_report(phi, L, beta, samples, LipschitzCondition::halving);
}

AuditReport check_doubling_condition(const ControlFunction& phi, double L, double beta,
                                     std::span<const std::pair<Vector, Vector>> samples)
{
    return condition_report(phi, L, beta, samples, LipschitzCondition::doubling);
}

RequiredL smallest_L(const ControlFunction& phi, double beta,
                     std::span<const std::pair<Vector, Vector>> samples, LipschitzCondition condition)
{
    WorstRatio w = scan_ratio(phi, beta, samples, condition);
    if (!w.witness) throw InputError("smallest_L: every sample has phi(x, y) = 0");
    return RequiredL{w.value, *w.witness};
}

}  // namespace ulam

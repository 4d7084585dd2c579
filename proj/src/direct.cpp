#include "ulam/direct.hpp"

#include "ulam/errors.hpp"
#include "ulam/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ulam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kConvergedRun = 3;
constexpr int kGrowthRun = 5;

}  // namespace

std::string_view to_string(Route r)
{
    switch (r) {
    case Route::P_div: return "P_div";
    case Route::Q_div: return "Q_div";
    case Route::P_mul: return "P_mul";
    case Route::Q_mul: return "Q_mul";
    }
    return "?";
}

Route route_from_string(std::string_view s)
{
    for (Route r : {Route::P_div, Route::Q_div, Route::P_mul, Route::Q_mul})
        if (to_string(r) == s) return r;
    throw InputError("unknown route '" + std::string(s) + "'");
}

std::string_view to_string(Family f) { return f == Family::halving ? "halving" : "doubling"; }
Route p_route(Family f) { return f == Family::halving ? Route::P_div : Route::P_mul; }
Route q_route(Family f) { return f == Family::halving ? Route::Q_div : Route::Q_mul; }

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverged: return "diverged";
    case Verdict::undecided: return "undecided";
    }
    return "?";
}

double ExtractionTrace::last_tail() const { return tail_bounds.empty() ? kInf : tail_bounds.back(); }

namespace {

Vector iterate(Route route, const Mapping& f, int k, const Vector& x, const Vector& z)
{
    switch (route) {
    case Route::P_div: return std::ldexp(1.0, k) * f(x.scaled_pow2(-k), z);
    case Route::Q_div: return std::ldexp(1.0, 2 * k) * f(x, z.scaled_pow2(-k));
    case Route::P_mul: return std::ldexp(1.0, -k) * f(x.scaled_pow2(k), z);
    case Route::Q_mul: return std::ldexp(1.0, -2 * k) * f(x, z.scaled_pow2(k));
    }
    return {};
}

}  // namespace

double cauchy_term(const ControlFunction& phi, double beta, int j, Route route, const Vector& x, const Vector& z)
{
    const Vector zero_x = Vector::zeros(x.size());
    const Vector zero_z = Vector::zeros(z.size());
    switch (route) {
    case Route::P_div: {
        const Vector h = x.scaled_pow2(-(j + 1));
        return std::exp2(j * beta) * phi(h, h) * phi(z, zero_z);
    }
    case Route::Q_div: {
        const Vector h = z.scaled_pow2(-(j + 1));
        return std::exp2(2.0 * j * beta) * phi(x, zero_x) * phi(h, h);
    }
    case Route::P_mul: {
        const Vector d = x.scaled_pow2(j);
        return std::exp2(-(j + 1) * beta) * phi(d, d) * phi(z, zero_z);
    }
    case Route::Q_mul: {
        const Vector d = z.scaled_pow2(j);
        return std::exp2(-2.0 * (j + 1) * beta) * phi(x, zero_x) * phi(d, d);
    }
    }
    return 0.0;
}

double cauchy_tail_bound(const ControlFunction& phi, double beta, int l, std::optional<int> m, Route route,
                         const Vector& x, const Vector& z, const SeriesOptions& opts)
{
    if (l < 0) throw InputError("Cauchy estimate needs l >= 0");
    if (m) {
        if (*m <= l) throw InputError("Cauchy estimate needs l < m");
        double sum = 0.0;
        for (int j = l; j < *m; ++j) sum += cauchy_term(phi, beta, j, route, x, z);
        return sum;
    }

    const Vector zero_x = Vector::zeros(x.size());
    const Vector zero_z = Vector::zeros(z.size());
    double outer = 0.0, scale = 0.0;
    SeriesId id{};
    Vector u;
    switch (route) {
    case Route::P_div:
        outer = phi(z, zero_z);
        scale = std::exp2(l * beta);
        id = SeriesId::halving_additive;
        u = x.scaled_pow2(-l);
        break;
    case Route::Q_div:
        outer = phi(x, zero_x);
        scale = std::exp2(2.0 * l * beta);
        id = SeriesId::halving_quadratic;
        u = z.scaled_pow2(-l);
        break;
    case Route::P_mul:
        outer = phi(z, zero_z);
        scale = std::exp2(-l * beta);
        id = SeriesId::doubling_additive;
        u = x.scaled_pow2(l);
        break;
    case Route::Q_mul:
        outer = phi(x, zero_x);
        scale = std::exp2(-2.0 * l * beta);
        id = SeriesId::doubling_quadratic;
        u = z.scaled_pow2(l);
        break;
    }
    if (outer == 0.0) return 0.0;
    const SeriesResult s = evaluate_series(id, phi, u, u, beta, opts);
    if (!s.converged) return kInf;
    return scale * s.upper() * outer;
}

ExtractionTrace extract(Route route, const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                        const Vector& z, const ExtractionOptions& opts)
{
    if (!(opts.tol > 0.0)) throw InputError("extraction tolerance must be positive");
    if (opts.k_max < 0) throw InputError("k_max must be nonnegative");
    const SpaceSpec& Y = f.target();
    ExtractionTrace t;
    t.route = route;
    t.target = Y;
    t.x = x;
    t.z = z;
    int small_run = 0, growth_run = 0;
    double prev_norm = 0.0;
    for (int k = 0; k <= opts.k_max; ++k) {
        Vector s;
        try {
            s = iterate(route, f, k, x, z);
        } catch (const NumericError&) {
            t.overflow_k = k;
        }
        if (!t.overflow_k && !s.is_finite()) t.overflow_k = k;
        if (t.overflow_k) {
            t.verdict = Verdict::diverged;
            t.k_stop = k;
            return t;
        }
        const double s_norm = norm_eval(Y, s);
        t.tail_bounds.push_back(cauchy_tail_bound(phi, beta, k, std::nullopt, route, x, z, opts.series));
        t.k_stop = k;
        if (k > 0) {
            const double gap = norm_eval(Y, s - t.iterates.back());
            small_run = gap <= opts.tol * std::max(1.0, s_norm) ? small_run + 1 : 0;
            const bool widening = t.gaps.empty() || gap >= t.gaps.back();
            growth_run = (s_norm > prev_norm && widening) ? growth_run + 1 : 0;
            t.gaps.push_back(gap);
        }
        t.iterates.push_back(std::move(s));
        prev_norm = s_norm;
        if (small_run >= kConvergedRun && t.tail_bounds.back() <= opts.tol) {
            t.verdict = Verdict::converged;
            t.limit = t.iterates.back();
            return t;
        }
        if (growth_run >= kGrowthRun) {
            t.verdict = Verdict::diverged;
            return t;
        }
    }
    t.verdict = Verdict::undecided;
    return t;
}

ExtractionTrace extract_P_div(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts)
{
    return extract(Route::P_div, f, phi, beta, x, z, opts);
}

ExtractionTrace extract_Q_div(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts)
{
    return extract(Route::Q_div, f, phi, beta, x, z, opts);
}

ExtractionTrace extract_P_mul(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts)
{
    return extract(Route::P_mul, f, phi, beta, x, z, opts);
}

ExtractionTrace extract_Q_mul(const Mapping& f, const ControlFunction& phi, double beta, const Vector& x,
                              const Vector& z, const ExtractionOptions& opts)
{
    return extract(Route::Q_mul, f, phi, beta, x, z, opts);
}

AuditReport check_cauchy_domination(const ExtractionTrace& trace, const ControlFunction& phi, double beta,
                                    double rel_slop)
{
    AuditEntry e{.check_id = "cauchy_domination." + std::string(to_string(trace.route))};
    const auto& s = trace.iterates;
    const int K = static_cast<int>(s.size());
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(std::max(K - 1, 0)));
    for (int j = 0; j + 1 < K; ++j) terms.push_back(cauchy_term(phi, beta, j, trace.route, trace.x, trace.z));

    const SpaceSpec& Y = trace.target;
    std::size_t pairs = 0, violations = 0;
    double min_slack = kInf, worst_ratio = 0.0;
    for (int l = 0; l < K; ++l) {
        double acc = 0.0;
        for (int m = l + 1; m < K; ++m) {
            acc += terms[static_cast<std::size_t>(m - 1)];
            const double gap = norm_eval(Y, s[static_cast<std::size_t>(l)] - s[static_cast<std::size_t>(m)]);
            const double allowed = acc * (1.0 + rel_slop);
            ++pairs;
            if (gap > allowed) ++violations;
            if (acc > 0.0) worst_ratio = std::max(worst_ratio, gap / acc);
            else if (gap > 0.0) worst_ratio = kInf;
            if (allowed - gap < min_slack) {
                min_slack = allowed - gap;
                e.witness = Witness{{trace.x, trace.z},
                                    {{"l", l}, {"m", m}, {"gap", gap}, {"estimate", acc}}};
            }
        }
    }
    e.values["pairs"] = static_cast<double>(pairs);
    e.values["violations"] = static_cast<double>(violations);
    e.values["worst_ratio"] = worst_ratio;
    if (pairs == 0) {
        e.status = Status::pass;
        e.margin = 0.0;
        e.witness.reset();
        e.notes = "no recorded pairs";
    } else {
        e.status = violations == 0 ? Status::pass : Status::fail;
        e.margin = min_slack;
    }
    AuditReport r;
    r.add(std::move(e));
    return r;
}

Reconciliation reconcile_F(const Mapping& f, const ControlFunction& phi, double beta,
                           std::span<const PairSample> points, Family family, const ExtractionOptions& opts)
{
    Reconciliation out;
    AuditEntry e{.check_id = "reconcile." + std::string(to_string(family))};
    std::vector<std::string> failures;
    std::optional<Witness> first_failure;
    for (const auto& [x, z] : points) {
        out.p_traces.push_back(extract(p_route(family), f, phi, beta, x, z, opts));
        out.q_traces.push_back(extract(q_route(family), f, phi, beta, x, z, opts));
        for (const auto* t : {&out.p_traces.back(), &out.q_traces.back()}) {
            if (t->verdict == Verdict::converged) continue;
            failures.push_back(std::string(to_string(t->route)) + " " + std::string(to_string(t->verdict)) +
                               " at x=" + format_vector(x) + " z=" + format_vector(z));
            if (!first_failure) first_failure = Witness{{x, z}, {{"k_stop", t->k_stop}}};
        }
    }
    e.values["samples"] = static_cast<double>(points.size());
    if (!failures.empty()) {
        e.status = Status::refused;
        e.witness = first_failure;
        e.values["unconverged"] = static_cast<double>(failures.size());
        std::string notes = "not all traces converged:";
        const std::size_t shown = std::min<std::size_t>(failures.size(), 8);
        for (std::size_t i = 0; i < shown; ++i) notes += " " + failures[i] + ";";
        if (failures.size() > shown) notes += " ... " + std::to_string(failures.size() - shown) + " more";
        e.notes = std::move(notes);
        out.report.add(std::move(e));
        return out;
    }

    const SpaceSpec& Y = f.target();
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double dev = norm_eval(Y, *out.p_traces[i].limit - *out.q_traces[i].limit);
        if (!e.witness || dev > worst) {
            worst = dev;
            e.witness = Witness{{points[i].first, points[i].second}, {{"deviation", dev}}};
        }
    }
    e.values["max_deviation"] = worst;
    e.status = worst <= opts.tol ? Status::pass : Status::fail;
    e.margin = opts.tol - worst;
    if (e.status == Status::pass) {
        for (const auto& t : out.p_traces) out.F.push_back(*t.limit);
    }
    out.report.add(std::move(e));
    return out;
}

Mapping extracted_mapping(const Mapping& f, const ControlFunction& phi, double beta, Family family,
                          const ExtractionOptions& opts)
{
    auto fn = [f, phi, beta, family, opts](const Vector& x, const Vector& z) {
        ExtractionTrace t = extract(p_route(family), f, phi, beta, x, z, opts);
        if (t.verdict != Verdict::converged)
            throw NumericError("extraction " + std::string(to_string(t.verdict)) + " at x=" + x.to_string() +
                               ", z=" + z.to_string());
        return *t.limit;
    };
    return Mapping::custom(f.domain(), f.target(), fn, "extracted." + std::string(to_string(family)));
}

double rassias_bound(double p, double eps, double x_abs)
{
    if (!(p < 1.0)) throw InputError("calibration exponent must be < 1");
    return 2.0 * eps / (2.0 - std::exp2(p)) * std::pow(x_abs, p);
}

RassiasResult rassias_calibration(const std::function<double(double)>& g, double p, double eps,
                                  std::span<const double> x_samples, double tol, int n_max)
{
    if (!(p < 1.0)) throw InputError("calibration exponent must be < 1");
    if (!(eps >= 0.0)) throw InputError("eps must be nonnegative");
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");
    if (g(0.0) != 0.0) throw InputError("calibration map must vanish at 0");

    RassiasResult out;
    AuditEntry lim{.check_id = "rassias.limit"};
    AuditEntry bnd{.check_id = "rassias.bound"};
    const double q = 1.0 - std::exp2(p - 1.0);
    std::size_t unconverged = 0;
    double min_slack = kInf, max_ratio = 0.0;
    for (double x : x_samples) {
        if (x == 0.0) {
            out.T.push_back(0.0);
            out.measured_ratio.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double ax = std::fabs(x);
        double prev = g(x), t = prev;
        int run = 0;
        bool converged = false;
        for (int n = 1; n <= n_max; ++n) {
            t = std::ldexp(g(std::ldexp(x, n)), -n);
            if (!std::isfinite(t)) break;
            run = std::fabs(t - prev) <= tol * std::max(1.0, std::fabs(t)) ? run + 1 : 0;
            prev = t;
            const double tail = eps * std::pow(ax, p) * std::exp2(n * (p - 1.0)) / q;
            if (run >= kConvergedRun && tail <= tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            ++unconverged;
            if (!lim.witness) lim.witness = Witness{{Vector{x}}, {{"last_iterate", t}}};
        }
        out.T.push_back(t);
        const double dev = std::fabs(g(x) - t);
        const double ratio = eps > 0.0 ? dev / (eps * std::pow(ax, p)) : (dev == 0.0 ? 0.0 : kInf);
        out.measured_ratio.push_back(ratio);
        max_ratio = std::max(max_ratio, ratio);
        const double slack = rassias_bound(p, eps, ax) - dev;
        if (slack < min_slack) {
            min_slack = slack;
            bnd.witness = Witness{{Vector{x}}, {{"deviation", dev}, {"bound", rassias_bound(p, eps, ax)}}};
        }
    }
    lim.values["unconverged"] = static_cast<double>(unconverged);
    lim.status = unconverged == 0 ? Status::pass : Status::fail;
    lim.margin = 0.0;
    if (lim.status == Status::fail) lim.notes = "verdict diverged";

    bnd.values["max_measured_ratio"] = max_ratio;
    bnd.values["bound_factor"] = 2.0 / (2.0 - std::exp2(p));
    if (unconverged > 0) {
        bnd.status = Status::refused;
        bnd.notes = "limit not extracted at every sample";
    } else if (x_samples.empty() || min_slack == kInf) {
        bnd.status = Status::pass;
        bnd.margin = 0.0;
        bnd.witness.reset();
    } else {
        bnd.status = min_slack >= 0.0 ? Status::pass : Status::fail;
        bnd.margin = min_slack;
    }
    out.report.add(std::move(lim));
    out.report.add(std::move(bnd));
    return out;
}

}  // namespace ulam

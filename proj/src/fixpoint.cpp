#include "ulam/fixpoint.hpp"

#include "ulam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ulam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kGrowthRun = 5;
constexpr double kRelSlop = 1e-12;

Vector apply_n(const Mapping& g, JVariant v, int n, const Vector& x, const Vector& z)
{
    switch (v) {
    case JVariant::J: return std::ldexp(1.0, n) * g(x.scaled_pow2(-n), z);
    case JVariant::J_prime: return std::ldexp(1.0, 2 * n) * g(x, z.scaled_pow2(-n));
    case JVariant::J_mul: return std::ldexp(1.0, -n) * g(x.scaled_pow2(n), z);
    case JVariant::J_prime_mul: return std::ldexp(1.0, -2 * n) * g(x, z.scaled_pow2(n));
    }
    return {};
}

std::string pair_label(Family family, JVariant v)
{
    return "fixpoint." + std::string(to_string(family)) + "." + std::string(to_string(v));
}

}  // namespace

std::string_view to_string(JVariant v)
{
    switch (v) {
    case JVariant::J: return "J";
    case JVariant::J_prime: return "J_prime";
    case JVariant::J_mul: return "J_mul";
    case JVariant::J_prime_mul: return "J_prime_mul";
    }
    return "?";
}

JVariant jvariant_from_string(std::string_view s)
{
    for (JVariant v : {JVariant::J, JVariant::J_prime, JVariant::J_mul, JVariant::J_prime_mul})
        if (to_string(v) == s) return v;
    throw InputError("unknown operator '" + std::string(s) + "'");
}

std::string_view to_string(WeightKind w) { return w == WeightKind::first ? "first" : "second"; }

std::string_view to_string(Alternative a)
{
    switch (a) {
    case Alternative::converged: return "converged";
    case Alternative::infinite_distance: return "infinite_distance";
    case Alternative::diverging: return "diverging";
    case Alternative::max_iterations: return "max_iterations";
    }
    return "?";
}

double metric_weight(const ControlFunction& phi, WeightKind kind, const Vector& x, const Vector& z)
{
    const Vector zx = Vector::zeros(x.size()), zz = Vector::zeros(z.size());
    if (kind == WeightKind::first) return phi(x, x) * phi(z, zz);
    return phi(x, zx) * phi(z, z);
}

Mapping apply_J(const Mapping& g, JVariant v) { return iterate_J(g, v, 1); }

Mapping iterate_J(const Mapping& g, JVariant v, int n)
{
    if (n < 0) throw InputError("iteration count must be nonnegative");
    if (n == 0) return g;
    auto fn = [g, v, n](const Vector& x, const Vector& z) { return apply_n(g, v, n, x, z); };
    return Mapping::custom(g.domain(), g.target(), fn,
                           std::string(to_string(v)) + "^" + std::to_string(n) + "(" + g.label() + ")");
}

bool GeneralizedDistance::infinite() const noexcept { return std::isinf(value); }

namespace {

struct SampledDistance {
    GeneralizedDistance d;
    double max_abs = 0.0;
};

SampledDistance sampled_distance(const SpaceSpec& Y, std::span<const Vector> g, std::span<const Vector> h,
                                 std::span<const double> weights, std::span<const PairSample> samples,
                                 WeightKind kind)
{
    SampledDistance out;
    out.d.weight_kind = kind;
    out.d.samples = samples.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double diff = norm_eval(Y, g[i] - h[i]);
        out.max_abs = std::max(out.max_abs, diff);
        double ratio;
        if (weights[i] == 0.0) {
            if (diff == 0.0) continue;
            ratio = kInf;
        } else {
            ratio = diff / weights[i];
        }
        if (!out.d.witness || ratio > out.d.value) {
            out.d.value = ratio;
            out.d.witness = samples[i];
        }
    }
    return out;
}

std::vector<Vector> values_on(const Mapping& g, std::span<const PairSample> samples)
{
    std::vector<Vector> out;
    out.reserve(samples.size());
    for (const auto& [x, z] : samples) out.push_back(g(x, z));
    return out;
}

std::vector<double> weights_on(const ControlFunction& phi, WeightKind kind, std::span<const PairSample> samples)
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& [x, z] : samples) out.push_back(metric_weight(phi, kind, x, z));
    return out;
}

}  // namespace

GeneralizedDistance gen_metric(const Mapping& g, const Mapping& h, const ControlFunction& phi, WeightKind kind,
                               std::span<const PairSample> samples)
{
    if (samples.empty()) throw InputError("generalized metric needs samples");
    const auto gv = values_on(g, samples), hv = values_on(h, samples);
    const auto w = weights_on(phi, kind, samples);
    return sampled_distance(g.target(), gv, hv, w, samples, kind).d;
}

double contraction_factor(JVariant v, const ControlFunction& phi, WeightKind kind,
                          std::span<const std::pair<Mapping, Mapping>> probes, std::span<const PairSample> samples)
{
    double factor = 0.0;
    std::size_t used = 0;
    for (const auto& [g, h] : probes) {
        const GeneralizedDistance base = gen_metric(g, h, phi, kind, samples);
        if (base.value == 0.0 || base.infinite()) continue;
        const GeneralizedDistance img = gen_metric(apply_J(g, v), apply_J(h, v), phi, kind, samples);
        factor = std::max(factor, img.value / base.value);
        ++used;
    }
    if (used == 0) throw InputError("contraction factor: every probe pair is degenerate");
    return factor;
}

FixpointRun dm_iterate(JVariant v, const Mapping& f, const ControlFunction& phi, WeightKind kind,
                       std::span<const PairSample> samples, int n_max, double tol)
{
    if (samples.empty()) throw InputError("fixed-point iteration needs samples");
    if (n_max < 0) throw InputError("n_max must be nonnegative");
    if (!(tol > 0.0)) throw InputError("fixed-point tolerance must be positive");
    const SpaceSpec& Y = f.target();
    const auto weights = weights_on(phi, kind, samples);

    FixpointRun run;
    run.op = v;
    run.weight = kind;
    run.samples = samples.size();

    auto at = [&](int n) {
        std::vector<Vector> out;
        out.reserve(samples.size());
        for (const auto& [x, z] : samples) out.push_back(apply_n(f, v, n, x, z));
        return out;
    };

    const std::vector<Vector> f_values = at(0);
    std::vector<Vector> cur = f_values;
    int growth = 0;
    int n = 0;
    double residual = 0.0;
    bool stopped = false;
    for (; n < n_max; ++n) {
        std::vector<Vector> next = at(n + 1);
        const SampledDistance sd = sampled_distance(Y, next, cur, weights, samples, kind);
        const double d = sd.d.value;
        if (!run.distances.empty()) {
            const double prev = run.distances.back();
            run.ratios.push_back(prev > 0.0 && std::isfinite(prev) ? d / prev : kNaN);
            growth = d > prev ? growth + 1 : 0;
        }
        run.distances.push_back(d);
        residual = sd.max_abs;
        if (std::isinf(d)) {
            run.alternative = Alternative::infinite_distance;
            stopped = true;
            break;
        }
        if (d <= tol && sd.max_abs <= tol) {
            run.alternative = Alternative::converged;
            stopped = true;
            break;
        }
        if (growth >= kGrowthRun) {
            run.alternative = Alternative::diverging;
            stopped = true;
            break;
        }
        cur = std::move(next);
    }
    if (!stopped) {
        run.alternative = Alternative::max_iterations;
        const std::vector<Vector> next = at(n + 1);
        residual = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
            residual = std::max(residual, norm_eval(Y, next[i] - cur[i]));
    }
    run.n = n;
    run.fixed_point_residual = residual;
    run.limit = iterate_J(f, v, n);
    run.limit_values = std::move(cur);

    run.alpha_measured = 0.0;
    for (double r : run.ratios)
        if (std::isfinite(r)) run.alpha_measured = std::max(run.alpha_measured, r);

    run.d_f_limit = sampled_distance(Y, f_values, run.limit_values, weights, samples, kind).d.value;
    const double d0 = run.distances.empty() ? 0.0 : run.distances.front();
    if (run.alpha_measured < 1.0 && std::isfinite(d0)) {
        run.posterior_bound = d0 / (1.0 - run.alpha_measured);
        run.posterior_holds = run.d_f_limit <= run.posterior_bound * (1.0 + kRelSlop);
    } else {
        run.posterior_bound = kInf;
        run.posterior_holds = false;
    }
    return run;
}

double stability_bound_fp(double L, double beta, const ControlFunction& phi, const Vector& x, const Vector& z,
                          Family family)
{
    if (!(L > 0.0 && L < 1.0)) throw InputError("Lipschitz constant L must lie in (0, 1)");
    const double num = family == Family::halving ? L : 1.0;
    const double a = num / (std::exp2(beta) * (1.0 - L)) * metric_weight(phi, WeightKind::first, x, z);
    const double b = num / (std::exp2(2.0 * beta) * (1.0 - L)) * metric_weight(phi, WeightKind::second, x, z);
    return std::min(a, b);
}

FixpointOutcome fp_extract_and_verify(const Mapping& f, const ControlFunction& phi, double beta, double L,
                                      Family family, std::span<const PairSample> samples, double tol, int n_max,
                                      const std::vector<Vector>* direct_F, double agree_tol)
{
    if (!(agree_tol > 0.0)) throw InputError("agreement tolerance must be positive");
    if (samples.empty()) throw InputError("fixed-point verification needs samples");
    FixpointOutcome out;
    const std::string base = "fixpoint." + std::string(to_string(family));
    const std::string sampled = "sampled on " + std::to_string(samples.size()) + " points";

    AuditReport cond = family == Family::halving ? check_halving_condition(phi, L, beta, samples)
                                                 : check_doubling_condition(phi, L, beta, samples);
    const AuditEntry& ce = cond.entries().front();
    out.report.merge(cond);
    if (ce.status != Status::pass) {
        AuditEntry e{.check_id = base + ".extraction", .status = Status::refused};
        e.witness = ce.witness;
        e.values["L"] = L;
        e.values["worst_ratio"] = ce.values.at("worst_ratio");
        e.notes = "precondition " + ce.check_id + " failed";
        out.report.add(std::move(e));
        return out;
    }

    const JVariant ops[2] = {family == Family::halving ? JVariant::J : JVariant::J_mul,
                             family == Family::halving ? JVariant::J_prime : JVariant::J_prime_mul};
    const WeightKind weights[2] = {WeightKind::first, WeightKind::second};
    const std::string op_note =
        family == Family::doubling
            ? "second operator applied as (1/4) g(x, 2z), matching the estimate it serves; the written "
              "definition 4 g(x/2, z) disagrees"
            : std::string();

    bool all_converged = true;
    for (int i = 0; i < 2; ++i) {
        FixpointRun run = dm_iterate(ops[i], f, phi, weights[i], samples, n_max, tol);
        const std::string id = pair_label(family, ops[i]);

        AuditEntry it{.check_id = id + ".iteration"};
        it.values["iterations"] = run.n;
        it.values["final_distance"] = run.distances.empty() ? 0.0 : run.distances.back();
        it.values["fixed_point_residual"] = run.fixed_point_residual;
        it.values["alpha_measured"] = run.alpha_measured;
        it.values["L"] = L;
        it.notes = std::string(to_string(run.alternative)) + "; " + sampled;
        if (!op_note.empty() && i == 1) it.notes += "; " + op_note;
        if (run.alternative == Alternative::converged && run.fixed_point_residual <= tol) {
            it.status = Status::pass;
            it.margin = tol - run.fixed_point_residual;
        } else {
            it.status = Status::fail;
            all_converged = false;
            it.witness = Witness{{samples.front().first, samples.front().second},
                                 {{"final_distance", it.values["final_distance"]}}};
        }
        out.report.add(std::move(it));

        AuditEntry post{.check_id = id + ".posterior"};
        post.values["d_f_limit"] = run.d_f_limit;
        post.values["bound"] = run.posterior_bound;
        post.values["d_f_Jf"] = run.distances.empty() ? 0.0 : run.distances.front();
        post.values["alpha_measured"] = run.alpha_measured;
        post.values["L"] = L;
        post.notes = sampled;
        if (run.posterior_holds) {
            post.status = Status::pass;
            post.margin = std::isfinite(run.posterior_bound) ? run.posterior_bound - run.d_f_limit : 0.0;
            post.margin = std::max(post.margin, 0.0);
        } else {
            post.status = Status::fail;
            post.witness = Witness{{samples.front().first, samples.front().second}, {{"alpha", run.alpha_measured}}};
        }
        out.report.add(std::move(post));
        out.runs.push_back(std::move(run));
    }

    const SpaceSpec& Y = f.target();
    if (!all_converged) {
        for (const char* what : {".reconcile", ".bound"}) {
            AuditEntry e{.check_id = base + what, .status = Status::refused};
            e.notes = "an operator did not reach its fixed point";
            out.report.add(std::move(e));
        }
        return out;
    }

    const auto& FJ = out.runs[0].limit_values;
    const auto& FJp = out.runs[1].limit_values;
    AuditEntry rec{.check_id = base + ".reconcile"};
    double worst = -1.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double dev = norm_eval(Y, FJ[i] - FJp[i]);
        if (dev > worst) {
            worst = dev;
            rec.witness = Witness{{samples[i].first, samples[i].second}, {{"deviation", dev}}};
        }
    }
    rec.values["max_deviation"] = worst;
    rec.status = worst <= agree_tol ? Status::pass : Status::fail;
    rec.margin = agree_tol - worst;
    rec.notes = sampled;
    out.report.add(std::move(rec));
    out.F = FJ;

    AuditEntry bnd{.check_id = base + ".bound"};
    double min_slack = kInf;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [x, z] = samples[i];
        const double dev = norm_eval(Y, f(x, z) - FJ[i]);
        const double b = stability_bound_fp(L, beta, phi, x, z, family);
        if (b - dev < min_slack) {
            min_slack = b - dev;
            bnd.witness = Witness{{x, z}, {{"deviation", dev}, {"bound", b}}};
        }
    }
    bnd.values["min_slack"] = min_slack;
    bnd.status = min_slack >= 0.0 ? Status::pass : Status::fail;
    bnd.margin = min_slack;
    bnd.notes = sampled;
    out.report.add(std::move(bnd));

    if (direct_F) {
        if (direct_F->size() != samples.size()) throw StructuralError("direct-method values do not match the samples");
        AuditEntry ag{.check_id = base + ".direct_agreement"};
        double w = -1.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double dev = norm_eval(Y, (*direct_F)[i] - FJ[i]);
            if (dev > w) {
                w = dev;
                ag.witness = Witness{{samples[i].first, samples[i].second}, {{"deviation", dev}}};
            }
        }
        ag.values["max_deviation"] = w;
        ag.status = w <= agree_tol ? Status::pass : Status::fail;
        ag.margin = agree_tol - w;
        out.report.add(std::move(ag));
    }
    return out;
}

}  // namespace ulam

#include "ulam/audit.hpp"

#include "ulam/errors.hpp"
#include "ulam/fixpoint.hpp"
#include "ulam/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ulam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAgreeRel = 1e-9;

bool agree(double a, double b, double rel = kAgreeRel)
{
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

double rel_diff(double a, double b)
{
    if (a == b) return 0.0;
    if (std::isinf(a) || std::isinf(b)) return kInf;
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return std::fabs(a - b) / scale;
}

struct Worst {
    double value = -kInf;
    std::optional<Witness> witness;

    void offer(double v, const std::vector<Vector>& point, std::map<std::string, double> values)
    {
        if (!witness || v > value) {
            value = v;
            witness = Witness{point, std::move(values)};
        }
    }
};

AuditEntry residual_entry(std::string id, const Worst& w, double tol, std::size_t n)
{
    AuditEntry e{.check_id = std::move(id)};
    const double worst = w.witness ? w.value : 0.0;
    e.values["max_residual"] = worst;
    e.values["samples"] = static_cast<double>(n);
    e.witness = w.witness;
    e.status = worst <= tol ? Status::pass : Status::fail;
    e.margin = tol - worst;
    return e;
}

}  // namespace

AuditReport check_structure(const Mapping& F, std::span<const TupleSample> samples, double tol)
{
    const SpaceSpec& Y = F.target();
    Worst full, first, second;
    for (const auto& t : samples) {
        const std::vector<Vector> pt{t.x, t.y, t.z, t.w};
        const double a = norm_eval(Y, defect_vector(F, t.x, t.y, t.z, t.w));
        Vector b = F(t.x + t.y, t.z);
        b -= F(t.x, t.z);
        b -= F(t.y, t.z);
        Vector c = F(t.x, t.z + t.w);
        c += F(t.x, t.z - t.w);
        c -= 2.0 * F(t.x, t.z);
        c -= 2.0 * F(t.x, t.w);
        full.offer(a, pt, {{"residual", a}});
        first.offer(norm_eval(Y, b), pt, {{"residual", norm_eval(Y, b)}});
        second.offer(norm_eval(Y, c), pt, {{"residual", norm_eval(Y, c)}});
    }
    AuditReport r;
    r.add(residual_entry("structure.full_equation", full, tol, samples.size()));
    r.add(residual_entry("structure.first_slot", first, tol, samples.size()));
    r.add(residual_entry("structure.second_slot", second, tol, samples.size()));
    return r;
}

AuditReport verify_direct_bound(const Mapping& f, std::span<const Vector> F_values, const ControlFunction& phi,
                                double beta, Family family, std::span<const PairSample> samples,
                                const SeriesOptions& opts)
{
    if (F_values.size() != samples.size()) throw StructuralError("F values do not match the samples");
    const SeriesId additive = family == Family::halving ? SeriesId::halving_additive : SeriesId::doubling_additive;
    const SeriesId quadratic =
        family == Family::halving ? SeriesId::halving_quadratic : SeriesId::doubling_quadratic;
    const SpaceSpec& Y = f.target();

    AuditEntry e{.check_id = "direct_bound." + std::string(to_string(family))};
    e.values["samples"] = static_cast<double>(samples.size());
    double min_slack = kInf;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [x, z] = samples[i];
        const Vector zx = Vector::zeros(x.size()), zz = Vector::zeros(z.size());
        const SeriesResult psi = evaluate_series(additive, phi, x, x, beta, opts);
        const SeriesResult Phi = evaluate_series(quadratic, phi, z, z, beta, opts);
        for (const auto* s : {&psi, &Phi}) {
            if (s->converged) continue;
            e.status = Status::refused;
            e.witness = Witness{{x, z}, {{"terms", s->terms_used}}};
            e.notes = std::string(to_string(s == &psi ? additive : quadratic)) + " series diverges at x=" +
                      format_vector(x) + " z=" + format_vector(z);
            AuditReport r;
            r.add(std::move(e));
            return r;
        }
        const double bound = std::min(psi.upper() * phi(z, zz), phi(x, zx) * Phi.upper());
        const double dev = norm_eval(Y, f(x, z) - F_values[i]);
        if (bound - dev < min_slack) {
            min_slack = bound - dev;
            e.witness = Witness{{x, z}, {{"deviation", dev}, {"bound", bound}}};
        }
    }
    if (samples.empty()) min_slack = 0.0;
    e.values["min_slack"] = min_slack;
    e.status = min_slack >= 0.0 ? Status::pass : Status::fail;
    e.margin = min_slack;
    e.notes = "sampled";
    AuditReport r;
    r.add(std::move(e));
    return r;
}

std::string_view to_string(CorollaryId id)
{
    switch (id) {
    case CorollaryId::direct_halving_power: return "direct_halving_power";
    case CorollaryId::direct_halving_quasi: return "direct_halving_quasi";
    case CorollaryId::direct_doubling_power: return "direct_doubling_power";
    case CorollaryId::direct_doubling_quasi: return "direct_doubling_quasi";
    case CorollaryId::fixpoint_halving_power: return "fixpoint_halving_power";
    case CorollaryId::fixpoint_doubling_power: return "fixpoint_doubling_power";
    }
    return "?";
}

CorollaryId corollary_from_string(std::string_view s)
{
    for (CorollaryId id : {CorollaryId::direct_halving_power, CorollaryId::direct_halving_quasi,
                           CorollaryId::direct_doubling_power, CorollaryId::direct_doubling_quasi,
                           CorollaryId::fixpoint_halving_power, CorollaryId::fixpoint_doubling_power})
        if (to_string(id) == s) return id;
    throw InputError("unknown corollary id '" + std::string(s) + "'");
}

namespace {

struct UnitSetup {
    SpaceSpec X;
    ControlFunction phi;
    Vector e, zero;
};

UnitSetup unit_setup(double theta, double r, double beta)
{
    SpaceSpec X = SpaceSpec::beta_homogeneous(1, beta);
    return UnitSetup{X, ControlFunction::power(X, theta, r), Vector{1.0}, Vector{0.0}};
}

double series_upper(SeriesId id, const ControlFunction& phi, const Vector& v, double beta)
{
    const SeriesResult s = evaluate_series(id, phi, v, v, beta);
    return s.converged ? s.upper() : kInf;
}

// sum_{j>=1} weight^{j-1} phi(v/2^j, v/2^j), the halving-argument form used by
// the quasi-normed statements.
SeriesResult halving_form(const ControlFunction& phi, const Vector& v, double weight_log2)
{
    auto term = [&](int j) { return std::exp2((j - 1) * weight_log2) * phi(v.scaled_pow2(-j), v.scaled_pow2(-j)); };
    std::optional<double> claim;
    if (phi.kind() == ControlKind::power) claim = std::exp2(weight_log2 - phi.space().homogeneity() * phi.r());
    if (phi(v, v) == 0.0) return SeriesResult{.value = 0.0, .terms_used = 1, .converged = true};
    return sum_series(term, 1, SeriesOptions{}, claim);
}

double form_upper(const SeriesResult& s) { return s.converged ? s.upper() : kInf; }

AuditEntry comparison(std::string id, double printed, double recomputed, const UnitSetup& u,
                      std::map<std::string, double> values, std::string note)
{
    AuditEntry e{.check_id = std::move(id)};
    values["printed"] = printed;
    values["recomputed"] = recomputed;
    e.values = values;
    e.witness = Witness{{u.e, u.e}, std::move(values)};
    e.notes = std::move(note);
    if (agree(printed, recomputed)) {
        e.status = Status::pass;
        e.margin = 0.0;
    } else {
        e.status = Status::flagged;
        e.margin = -rel_diff(printed, recomputed);
    }
    return e;
}

void require_range(bool ok, CorollaryId id, double r)
{
    if (!ok) throw InputError("r = " + format_double(r) + " outside the stated range of " + std::string(to_string(id)));
}

void audit_direct_power(AuditReport& rep, CorollaryId id, double theta, double r, double beta,
                        std::span<const PairSample> samples)
{
    const bool halving = id == CorollaryId::direct_halving_power;
    require_range(halving ? r > 2.0 : r < 1.0, id, r);
    const std::string cid(to_string(id));
    const SeriesId sa = halving ? SeriesId::halving_additive : SeriesId::doubling_additive;
    const SeriesId sq = halving ? SeriesId::halving_quadratic : SeriesId::doubling_quadratic;
    const UnitSetup u = unit_setup(theta, r, beta);

    const double printed = halving ? 2.0 * theta / (std::exp2(beta * r) - std::exp2(beta))
                                   : 2.0 * theta / (std::exp2(2.0 * beta) - std::exp2(beta * r));
    const double additive = series_upper(sa, u.phi, u.e, beta) * u.phi(u.e, u.zero);
    const double quadratic = u.phi(u.e, u.zero) * series_upper(sq, u.phi, u.e, beta);
    const double recomputed = std::min(additive, quadratic);
    const auto ca = closed_form_power(theta, r, beta, sa), cq = closed_form_power(theta, r, beta, sq);
    const double closed = 2.0 * theta * std::min(ca.value_or(kInf), cq.value_or(kInf));
    rep.add(comparison(cid + ".constant", printed, recomputed, u,
                       {{"additive_term", additive}, {"quadratic_term", quadratic}, {"closed_form", closed}},
                       "constant from the series bound at unit norms"));

    // printed min{} identity at the samples
    AuditEntry mi{.check_id = cid + ".min_identity"};
    double worst = 0.0;
    std::size_t used = 0;
    for (const auto& [x, z] : samples) {
        const double nx = norm_eval(u.X, x), nz = norm_eval(u.X, z);
        if (nx == 0.0 || nz == 0.0) continue;
        const ControlFunction phi = ControlFunction::power(SpaceSpec::beta_homogeneous(int(x.size()), beta), theta, r);
        const Vector zx = Vector::zeros(x.size()), zz = Vector::zeros(z.size());
        const double lhs = std::min(series_upper(sa, phi, x, beta) * phi(z, zz),
                                    phi(x, zx) * series_upper(sq, phi, z, beta));
        const double rhs = printed * std::pow(nx, r) * std::pow(nz, r);
        const double d = rel_diff(lhs, rhs);
        ++used;
        if (!mi.witness || d > worst) {
            worst = d;
            mi.witness = Witness{{x, z}, {{"min_of_series_terms", lhs}, {"printed_times_norms", rhs}}};
        }
    }
    mi.values["samples_used"] = static_cast<double>(used);
    mi.values["max_rel_diff"] = worst;
    mi.status = worst <= kAgreeRel ? Status::pass : Status::flagged;
    mi.margin = worst <= kAgreeRel ? kAgreeRel - worst : -worst;
    if (mi.status == Status::pass && used == 0) mi.notes = "no sample with nonzero norms";
    rep.add(std::move(mi));

    // convergence inside the range, divergence at its boundary
    const double boundary = halving ? 2.0 : 1.0;
    const SeriesId critical = halving ? sq : sa;
    const UnitSetup b = unit_setup(1.0, boundary, beta);
    const bool converged = std::isfinite(additive) && std::isfinite(quadratic);
    const bool boundary_diverges = !std::isfinite(series_upper(critical, b.phi, b.e, beta));
    AuditEntry hy{.check_id = cid + ".hypothesis"};
    hy.values = {{"r", r},
                 {"series_converge", converged ? 1.0 : 0.0},
                 {"boundary_r", boundary},
                 {"boundary_diverges", boundary_diverges ? 1.0 : 0.0}};
    if (converged && boundary_diverges) {
        hy.status = Status::pass;
    } else {
        hy.status = Status::flagged;
        hy.witness = Witness{{u.e, u.e}, hy.values};
        hy.margin = -1.0;
    }
    rep.add(std::move(hy));
}

void audit_direct_quasi(AuditReport& rep, CorollaryId id, double theta, double r, double beta,
                        std::span<const PairSample> samples)
{
    (void)samples;
    const bool halving = id == CorollaryId::direct_halving_quasi;
    require_range(halving ? r > 2.0 : r < 1.0, id, r);
    const std::string cid(to_string(id));
    const double p = beta;
    const UnitSetup u = unit_setup(theta, r, beta);
    const double phi0 = u.phi(u.e, u.zero);
    const SeriesId sa = halving ? SeriesId::halving_additive : SeriesId::doubling_additive;
    const SeriesId sq = halving ? SeriesId::halving_quadratic : SeriesId::doubling_quadratic;

    // series written in the statement: halving arguments in both cases, with
    // weights 2^{(j-1)p}, 4^{(j-1)p} (halving) or 2^{-(j-1)p}, 4^{(j-1)p} (doubling)
    const SeriesResult pa = halving_form(u.phi, u.e, halving ? p : -p);
    const SeriesResult pq = halving_form(u.phi, u.e, 2.0 * p);
    const double inv = 1.0 / p;
    const double printed = std::min(std::pow(form_upper(pa) * phi0, inv), std::pow(phi0 * form_upper(pq), inv));
    const double additive = series_upper(sa, u.phi, u.e, beta) * phi0;
    const double quadratic = phi0 * series_upper(sq, u.phi, u.e, beta);
    const double recomputed = std::min(std::pow(additive, inv), std::pow(quadratic, inv));
    const auto ca = closed_form_power(theta, r, beta, sa), cq = closed_form_power(theta, r, beta, sq);
    const double closed = std::pow(2.0 * theta * std::min(ca.value_or(kInf), cq.value_or(kInf)), inv);
    rep.add(comparison(cid + ".constant", printed, recomputed, u,
                       {{"p", p},
                        {"printed_additive_series", form_upper(pa)},
                        {"printed_quadratic_series", form_upper(pq)},
                        {"additive_term", additive},
                        {"quadratic_term", quadratic},
                        {"closed_form", closed}},
                       "bound raised to 1/p; printed uses the series as written in the statement"));

    // the stated convergence hypothesis must cover the series used in the bound
    const double boundary = halving ? 2.0 : 1.0;
    const UnitSetup b = unit_setup(1.0, boundary, beta);
    const SeriesResult hyp_b = halving ? halving_form(b.phi, b.e, 2.0 * p) : halving_form(b.phi, b.e, -p);
    const bool stated_holds_at_boundary = hyp_b.converged;
    const bool bound_series_at_boundary =
        std::isfinite(series_upper(sa, b.phi, b.e, beta)) && std::isfinite(series_upper(sq, b.phi, b.e, beta));
    AuditEntry hy{.check_id = cid + ".hypothesis"};
    hy.values = {{"r", r},
                 {"series_converge", std::isfinite(additive) && std::isfinite(quadratic) ? 1.0 : 0.0},
                 {"boundary_r", boundary},
                 {"stated_hypothesis_at_boundary", stated_holds_at_boundary ? 1.0 : 0.0},
                 {"bound_series_at_boundary", bound_series_at_boundary ? 1.0 : 0.0}};
    const bool ok = hy.values["series_converge"] == 1.0 && (!stated_holds_at_boundary || bound_series_at_boundary);
    if (ok) {
        hy.status = Status::pass;
    } else {
        hy.status = Status::flagged;
        hy.witness = Witness{{b.e, b.e}, hy.values};
        hy.margin = -1.0;
        hy.notes = "stated convergence hypothesis holds where the series in the bound diverge";
    }
    rep.add(std::move(hy));
}

void audit_fixpoint_power(AuditReport& rep, CorollaryId id, double theta, double r, double beta,
                          std::span<const PairSample> samples)
{
    const bool halving = id == CorollaryId::fixpoint_halving_power;
    require_range(halving ? r > 1.0 : r < 1.0, id, r);
    const std::string cid(to_string(id));
    const UnitSetup u = unit_setup(theta, r, beta);
    const double br = std::exp2(r * beta), b1 = std::exp2(beta), b2 = std::exp2(2.0 * beta);

    const double L = halving ? (br - b1) / (br - b1 + 1.0) : std::exp2(beta * (r - 2.0));
    const double num = halving ? L : 1.0;
    const double rec_first = num / (b1 * (1.0 - L)) * u.phi(u.e, u.e) * u.phi(u.e, u.zero);
    const double rec_second = num / (b2 * (1.0 - L)) * u.phi(u.e, u.zero) * u.phi(u.e, u.e);
    double pr_first, pr_second, pr_const;
    if (halving) {
        pr_first = 2.0 * theta / (std::exp2((r - 1.0) * beta) - 1.0);
        pr_second = 2.0 * theta / (br - b1);
        pr_const = pr_second;
    } else {
        pr_first = 2.0 * theta / (b2 - br);
        pr_second = std::exp2(beta + 1.0) * theta / (b2 - br);
        pr_const = pr_first;
    }

    // compare the printed pair with the recomputed pair as unordered sets
    const double ps[2] = {std::min(pr_first, pr_second), std::max(pr_first, pr_second)};
    const double rs[2] = {std::min(rec_first, rec_second), std::max(rec_first, rec_second)};
    AuditEntry c{.check_id = cid + ".constant"};
    c.values = {{"stated_L", L},
                {"printed_first", pr_first},
                {"printed_second", pr_second},
                {"printed", pr_const},
                {"recomputed_first", rec_first},
                {"recomputed_second", rec_second},
                {"recomputed", std::min(rec_first, rec_second)}};
    c.witness = Witness{{u.e, u.e}, c.values};
    c.notes = "bound terms recomputed from the stated L at unit norms";
    if (agree(ps[0], rs[0]) && agree(ps[1], rs[1])) {
        c.status = Status::pass;
    } else {
        c.status = Status::flagged;
        c.margin = -std::max(rel_diff(ps[0], rs[0]), rel_diff(ps[1], rs[1]));
    }
    rep.add(std::move(c));

    AuditEntry mi{.check_id = cid + ".min_identity"};
    mi.values = {{"printed_min", std::min(pr_first, pr_second)}, {"printed", pr_const}};
    if (agree(std::min(pr_first, pr_second), pr_const)) {
        mi.status = Status::pass;
    } else {
        mi.status = Status::flagged;
        mi.witness = Witness{{u.e, u.e}, mi.values};
        mi.margin = -rel_diff(std::min(pr_first, pr_second), pr_const);
    }
    rep.add(std::move(mi));

    const ControlFunction phi = ControlFunction::power(
        SpaceSpec::beta_homogeneous(samples.empty() ? 1 : int(samples.front().first.size()), beta), theta, r);
    AuditReport cond = halving ? check_halving_condition(phi, L, beta, samples)
                               : check_doubling_condition(phi, L, beta, samples);
    const AuditEntry& ce = cond.entries().front();
    AuditEntry hy{.check_id = cid + ".hypothesis"};
    hy.values = ce.values;
    hy.values["stated_L"] = L;
    hy.values["required_L"] = ce.values.at("worst_ratio");
    hy.notes = ce.notes;
    if (ce.status == Status::pass) {
        hy.status = Status::pass;
        hy.margin = ce.margin;
    } else {
        hy.status = Status::flagged;
        hy.witness = ce.witness;
        hy.witness->values["stated_L"] = L;
        hy.witness->values["required_L"] = hy.values["required_L"];
        hy.margin = ce.margin;
        hy.notes = "stated L does not satisfy the " + ce.check_id + "; " + ce.notes;
    }
    rep.add(std::move(hy));
}

}  // namespace

AuditReport audit_corollary(CorollaryId id, double theta, double r, double beta,
                            std::span<const PairSample> samples)
{
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw InputError("theta must be finite and nonnegative");
    if (!(beta > 0.0 && beta <= 1.0)) throw InputError("beta must lie in (0, 1]");
    if (!std::isfinite(r)) throw InputError("r must be finite");
    AuditReport rep;
    switch (id) {
    case CorollaryId::direct_halving_power:
    case CorollaryId::direct_doubling_power: audit_direct_power(rep, id, theta, r, beta, samples); break;
    case CorollaryId::direct_halving_quasi:
    case CorollaryId::direct_doubling_quasi: audit_direct_quasi(rep, id, theta, r, beta, samples); break;
    case CorollaryId::fixpoint_halving_power:
    case CorollaryId::fixpoint_doubling_power: audit_fixpoint_power(rep, id, theta, r, beta, samples); break;
    }
    return rep;
}

AuditReport route_consistency(const std::optional<std::vector<Vector>>& direct,
                              const std::optional<std::vector<Vector>>& fixpoint_J,
                              const std::optional<std::vector<Vector>>& fixpoint_J_prime,
                              std::span<const PairSample> samples, const SpaceSpec& Y, double tol)
{
    AuditEntry e{.check_id = "route_consistency"};
    std::vector<std::string> missing;
    if (!direct) missing.push_back("direct");
    if (!fixpoint_J) missing.push_back("fixpoint_J");
    if (!fixpoint_J_prime) missing.push_back("fixpoint_J_prime");
    AuditReport rep;
    if (!missing.empty()) {
        e.status = Status::refused;
        e.notes = "missing route:";
        for (const auto& m : missing) e.notes += " " + m;
        rep.add(std::move(e));
        return rep;
    }
    const std::vector<Vector>* routes[3] = {&*direct, &*fixpoint_J, &*fixpoint_J_prime};
    for (const auto* v : routes)
        if (v->size() != samples.size()) throw StructuralError("route values do not match the samples");
    const char* names[3] = {"direct", "fixpoint_J", "fixpoint_J_prime"};
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            double pair_worst = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const double d = norm_eval(Y, (*routes[a])[i] - (*routes[b])[i]);
                pair_worst = std::max(pair_worst, d);
                if (!e.witness || d > worst) {
                    worst = d;
                    e.witness = Witness{{samples[i].first, samples[i].second}, {{"deviation", d}}};
                }
            }
            e.values[std::string("max_deviation_") + names[a] + "_" + names[b]] = pair_worst;
        }
    }
    e.values["max_deviation"] = worst;
    e.status = worst <= tol ? Status::pass : Status::fail;
    e.margin = tol - worst;
    rep.add(std::move(e));
    return rep;
}

}  // namespace ulam

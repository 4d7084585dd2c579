#include "ulam/experiment.hpp"

#include "ulam/direct.hpp"
#include "ulam/errors.hpp"
#include "ulam/fixpoint.hpp"
#include "ulam/mappings.hpp"
#include "ulam/numfmt.hpp"
#include "ulam/samples.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ulam {

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::direct_halving: return "direct_halving";
    case Method::direct_doubling: return "direct_doubling";
    case Method::fixpoint_halving: return "fixpoint_halving";
    case Method::fixpoint_doubling: return "fixpoint_doubling";
    }
    return "?";
}

Method method_from_string(std::string_view s)
{
    for (Method m : {Method::direct_halving, Method::direct_doubling, Method::fixpoint_halving,
                     Method::fixpoint_doubling})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown method '" + std::string(s) + "'");
}

const SpaceSpec& ExperimentConfig::target() const
{
    return experimental_distinct_beta && target_space ? *target_space : space;
}

double ExperimentConfig::beta() const { return target().homogeneity(); }

ControlFunction ExperimentConfig::phi() const { return phi_at(r); }

ControlFunction ExperimentConfig::phi_at(double r_value) const { return ControlFunction::power(space, theta, r_value); }

namespace {

using nlohmann::json;

void allow_keys(const json& j, std::initializer_list<std::string_view> keys, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir)
{
    ExperimentConfig c;
    c.base_dir = base_dir;
    try {
        allow_keys(j,
                   {"version", "space", "target_space", "experimental_distinct_beta", "phi", "mapping", "method",
                    "fixpoint", "samples", "tolerances", "limits", "corollaries", "sweep", "output"},
                   "config");
        if (!j.contains("version")) throw ConfigError("config needs a version field");
        c.version = j.at("version").get<int>();
        if (c.version != 1) throw ConfigError("unsupported config version " + std::to_string(c.version));
        c.space = j.at("space").get<SpaceSpec>();
        c.experimental_distinct_beta = j.value("experimental_distinct_beta", false);
        if (j.contains("target_space")) {
            if (!c.experimental_distinct_beta)
                throw ConfigError("target_space requires experimental_distinct_beta: true");
            c.target_space = j.at("target_space").get<SpaceSpec>();
            if (c.target_space->dimension != c.space.dimension)
                throw ConfigError("target_space must have the same dimension as space");
        }

        const json& phi = j.at("phi");
        allow_keys(phi, {"kind", "theta", "r"}, "phi");
        if (phi.at("kind").get<std::string>() != "power") throw ConfigError("phi kind must be 'power'");
        c.theta = phi.at("theta").get<double>();
        c.r = phi.at("r").get<double>();
        (void)c.phi();

        if (j.contains("mapping")) {
            json m = j.at("mapping");
            allow_keys(m, {"core", "perturbation", "calibrate"}, "mapping");
            c.calibrate = m.value("calibrate", false);
            m.erase("calibrate");
            c.mapping = m;
        }
        (void)mapping_from_json(c.mapping, c.space, c.target(), c.base_dir);

        if (j.contains("method")) {
            const json& m = j.at("method");
            std::vector<std::string> names;
            if (m.is_string()) names.push_back(m.get<std::string>());
            else names = m.get<std::vector<std::string>>();
            for (const auto& n : names) {
                if (n == "all") {
                    c.methods = {Method::direct_halving, Method::direct_doubling, Method::fixpoint_halving,
                                 Method::fixpoint_doubling};
                    break;
                }
                const Method md = method_from_string(n);
                if (std::find(c.methods.begin(), c.methods.end(), md) == c.methods.end()) c.methods.push_back(md);
            }
        }

        if (j.contains("fixpoint")) {
            allow_keys(j.at("fixpoint"), {"L"}, "fixpoint");
            c.L = j.at("fixpoint").at("L").get<double>();
            if (!(*c.L > 0.0 && *c.L < 1.0)) throw ConfigError("fixpoint.L must lie in (0, 1)");
        }
        const bool wants_fixpoint = std::any_of(c.methods.begin(), c.methods.end(), [](Method m) {
            return m == Method::fixpoint_halving || m == Method::fixpoint_doubling;
        });
        if (wants_fixpoint && !c.L) throw ConfigError("fixed-point methods need fixpoint.L");

        if (j.contains("samples")) {
            const json& s = j.at("samples");
            allow_keys(s, {"range", "dyadic_depth", "tuple_depth", "random_count", "seed"}, "samples");
            c.samples.range = s.value("range", c.samples.range);
            c.samples.dyadic_depth = s.value("dyadic_depth", c.samples.dyadic_depth);
            c.samples.tuple_depth = s.value("tuple_depth", c.samples.tuple_depth);
            c.samples.random_count = s.value("random_count", c.samples.random_count);
            if (s.contains("seed")) c.samples.seed = s.at("seed").get<std::uint64_t>();
        }
        if (!(c.samples.range > 0.0) || !std::isfinite(c.samples.range))
            throw ConfigError("samples.range must be positive");
        if (c.samples.dyadic_depth < 0 || c.samples.dyadic_depth > 30 || c.samples.tuple_depth < 0 ||
            c.samples.tuple_depth > 30)
            throw ConfigError("sample depths must lie in [0, 30]");
        if (c.samples.random_count > 0 && !c.samples.seed)
            throw ConfigError("samples.seed is required when random_count > 0");

        if (j.contains("tolerances")) {
            const json& t = j.at("tolerances");
            allow_keys(t, {"series", "extraction", "identity", "fixpoint"}, "tolerances");
            c.tol.series = t.value("series", c.tol.series);
            c.tol.extraction = t.value("extraction", c.tol.extraction);
            c.tol.identity = t.value("identity", c.tol.identity);
            c.tol.fixpoint = t.value("fixpoint", c.tol.fixpoint);
        }
        for (double t : {c.tol.series, c.tol.extraction, c.tol.identity, c.tol.fixpoint})
            if (!(t > 0.0)) throw ConfigError("tolerances must be positive");

        if (j.contains("limits")) {
            const json& l = j.at("limits");
            allow_keys(l, {"k_max", "n_max", "max_terms"}, "limits");
            c.limits.k_max = l.value("k_max", c.limits.k_max);
            c.limits.n_max = l.value("n_max", c.limits.n_max);
            c.limits.max_terms = l.value("max_terms", c.limits.max_terms);
        }
        if (c.limits.k_max < 0 || c.limits.k_max > 1000 || c.limits.n_max < 0 || c.limits.max_terms < 1)
            throw ConfigError("limits out of range");

        if (j.contains("corollaries")) {
            for (const json& e : j.at("corollaries")) {
                allow_keys(e, {"id", "theta", "r", "beta"}, "corollaries entry");
                CorollaryRequest req{corollary_from_string(e.at("id").get<std::string>())};
                req.theta = e.value("theta", 1.0);
                req.r = e.at("r").get<double>();
                req.beta = e.value("beta", c.space.beta);
                c.corollaries.push_back(req);
            }
        }
        if (j.contains("sweep")) {
            allow_keys(j.at("sweep"), {"r_values"}, "sweep");
            c.sweep_r = j.at("sweep").at("r_values").get<std::vector<double>>();
        }
        if (j.contains("output")) {
            allow_keys(j.at("output"), {"dir"}, "output");
            c.output_dir = j.at("output").at("dir").get<std::string>();
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(j, path.parent_path());
}

namespace {

std::string fmt(double v) { return format_double(v); }

class Csv {
public:
    explicit Csv(std::initializer_list<std::string_view> header)
    {
        bool first = true;
        for (auto h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }
    template <class... Cells>
    void row(const Cells&... cells)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cells, first = false), ...);
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

void write_text(const std::filesystem::path& path, const std::string& text, RunResult& result)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    result.files.push_back(path);
}

bool has(const std::vector<Method>& ms, Method m) { return std::find(ms.begin(), ms.end(), m) != ms.end(); }

// Merges per-trace domination entries into one entry per route.
void add_domination(AuditReport& rep, const std::vector<const ExtractionTrace*>& traces, const ControlFunction& phi,
                    double beta, Route route)
{
    AuditEntry agg{.check_id = "cauchy_domination." + std::string(to_string(route))};
    double pairs = 0, violations = 0, worst_ratio = 0.0, traces_used = 0;
    double margin = std::numeric_limits<double>::infinity();
    for (const auto* t : traces) {
        if (t->route != route || t->verdict != Verdict::converged) continue;
        const AuditReport r = check_cauchy_domination(*t, phi, beta);
        const AuditEntry& e = r.entries().front();
        ++traces_used;
        pairs += e.values.at("pairs");
        violations += e.values.at("violations");
        worst_ratio = std::max(worst_ratio, e.values.at("worst_ratio"));
        if (e.witness && e.margin < margin) {
            margin = e.margin;
            agg.witness = e.witness;
        }
    }
    if (traces_used == 0) return;
    agg.values = {{"traces", traces_used}, {"pairs", pairs}, {"violations", violations}, {"worst_ratio", worst_ratio}};
    agg.status = violations == 0 ? Status::pass : Status::fail;
    agg.margin = std::isfinite(margin) ? margin : 0.0;
    if (agg.status == Status::pass) agg.margin = std::max(agg.margin, 0.0);
    rep.add(std::move(agg));
}

struct BoundRow {
    std::string method;
    Vector x, z;
    double deviation, bound;
};

}  // namespace

RunResult run_scenario(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, unsigned stages)
{
    RunResult result;
    AuditReport& rep = result.report;
    std::filesystem::create_directories(out_dir);

    const SpaceSpec& X = cfg.space;
    const SpaceSpec& Y = cfg.target();
    const double beta = cfg.beta();
    const ControlFunction phi = cfg.phi();
    const int dim = X.dimension;
    const SeriesOptions sopts{cfg.tol.series, cfg.limits.max_terms};

    const std::vector<Vector> vectors = dyadic_vectors(dim, cfg.samples.range, cfg.samples.dyadic_depth);
    const std::vector<PairSample> pairs = pair_grid(vectors, vectors);

    if (stages & stage::axioms) {
        const auto nulls = default_null_sequences();
        rep.merge(check_fnorm_axioms(X, vectors, nulls));
        if (X.kind == NormKind::beta_homogeneous) {
            const double scalars[] = {-3.0, -1.0, -0.5, 0.25, 2.0, 3.0};
            rep.merge(check_beta_homogeneity(X, vectors, scalars));
        }
    }

    if (stages & stage::series) {
        Csv csv{"series_id", "x", "y", "value", "terms", "tail_bound", "converged"};
        for (const auto& v : vectors) {
            for (SeriesId id : {SeriesId::halving_additive, SeriesId::halving_quadratic, SeriesId::doubling_additive,
                                SeriesId::doubling_quadratic}) {
                const SeriesResult s = evaluate_series(id, phi, v, v, beta, sopts);
                csv.row(to_string(id), format_vector(v), format_vector(v), fmt(s.value), s.terms_used,
                        fmt(s.tail_bound), s.converged ? "true" : "false");
            }
        }
        write_text(out_dir / "series.csv", csv.str(), result);
    }

    const bool need_direct = (stages & (stage::extract | stage::bound | stage::audit)) &&
                             (has(cfg.methods, Method::direct_halving) || has(cfg.methods, Method::direct_doubling));
    const bool need_fix = (stages & (stage::fixpoint | stage::bound)) &&
                          (has(cfg.methods, Method::fixpoint_halving) || has(cfg.methods, Method::fixpoint_doubling));
    const bool need_mapping = need_direct || need_fix || (stages & stage::sweep);

    std::optional<Mapping> f;
    if (need_mapping || (stages & stage::audit)) {
        f = mapping_from_json(cfg.mapping, X, Y, cfg.base_dir);
        std::vector<TupleSample> tuples = tuple_grid(dyadic_vectors(dim, cfg.samples.range, cfg.samples.tuple_depth));
        if (cfg.samples.random_count > 0) {
            const auto extra = random_tuples(dim, cfg.samples.range, cfg.samples.dyadic_depth,
                                             cfg.samples.random_count, *cfg.samples.seed);
            tuples.insert(tuples.end(), extra.begin(), extra.end());
        }
        if (cfg.calibrate) {
            f = calibrate_amplitude(*f, phi, tuples);
            AuditEntry e{.check_id = "calibration", .status = Status::pass};
            e.values["eta"] = f->perturbation() ? f->perturbation()->eta : 0.0;
            e.values["tuples"] = static_cast<double>(tuples.size());
            e.notes = "largest admissible amplitude on the sampled tuples";
            rep.add(std::move(e));
        }
        rep.merge(admissibility_check(*f, phi, tuples));
    }

    const ExtractionOptions eopts{cfg.tol.extraction, cfg.limits.k_max, sopts};
    std::vector<BoundRow> bound_rows;
    std::optional<std::vector<Vector>> direct_F[2];
    Csv extract_csv{"route", "x", "z", "k_stop", "verdict", "limit", "last_gap", "tail_bound"};
    bool structure_done = false;

    for (Family family : {Family::halving, Family::doubling}) {
        const Method m = family == Family::halving ? Method::direct_halving : Method::direct_doubling;
        if (!need_direct || !has(cfg.methods, m)) continue;
        Reconciliation rec = reconcile_F(*f, phi, beta, pairs, family, eopts);
        rep.merge(rec.report);
        std::vector<const ExtractionTrace*> traces;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            for (const auto* t : {&rec.p_traces[i], &rec.q_traces[i]}) {
                traces.push_back(t);
                extract_csv.row(to_string(t->route), format_vector(t->x), format_vector(t->z), t->k_stop,
                                to_string(t->verdict), t->limit ? format_vector(*t->limit) : std::string(),
                                fmt(t->last_gap()), fmt(t->last_tail()));
            }
        }
        add_domination(rep, traces, phi, beta, p_route(family));
        add_domination(rep, traces, phi, beta, q_route(family));

        const std::size_t fi = family == Family::halving ? 0 : 1;
        if (!rec.F.empty()) {
            direct_F[fi] = rec.F;
            rep.merge(verify_direct_bound(*f, rec.F, phi, beta, family, pairs, sopts));
            const SeriesId sa =
                family == Family::halving ? SeriesId::halving_additive : SeriesId::doubling_additive;
            const SeriesId sq =
                family == Family::halving ? SeriesId::halving_quadratic : SeriesId::doubling_quadratic;
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const auto& [x, z] = pairs[i];
                const Vector zero = Vector::zeros(x.size());
                const double b = std::min(evaluate_series(sa, phi, x, x, beta, sopts).upper() * phi(z, zero),
                                          phi(x, zero) * evaluate_series(sq, phi, z, z, beta, sopts).upper());
                bound_rows.push_back({std::string(to_string(m)), x, z, norm_eval(Y, (*f)(x, z) - rec.F[i]), b});
            }
            if ((stages & stage::audit) && !structure_done) {
                const Mapping F = extracted_mapping(*f, phi, beta, family, eopts);
                const auto tuples = tuple_grid(dyadic_vectors(dim, cfg.samples.range, 0));
                rep.merge(check_structure(F, tuples, cfg.tol.identity));
                structure_done = true;
            }
        } else {
            AuditEntry e{.check_id = "direct_bound." + std::string(to_string(family)), .status = Status::refused};
            e.notes = "no reconciled F";
            rep.add(std::move(e));
        }
    }
    if (need_direct && (stages & stage::extract)) write_text(out_dir / "extract.csv", extract_csv.str(), result);

    json fix_json = json::object();
    for (Family family : {Family::halving, Family::doubling}) {
        const Method m = family == Family::halving ? Method::fixpoint_halving : Method::fixpoint_doubling;
        if (!need_fix || !has(cfg.methods, m)) continue;
        const std::size_t fi = family == Family::halving ? 0 : 1;
        const std::vector<Vector>* dF = direct_F[fi] ? &*direct_F[fi] : nullptr;
        FixpointOutcome fo =
            fp_extract_and_verify(*f, phi, beta, *cfg.L, family, pairs, cfg.tol.fixpoint, cfg.limits.n_max, dF,
                                  cfg.tol.extraction);
        rep.merge(fo.report);
        json fam = json::object();
        for (const auto& run : fo.runs) {
            Csv csv{"n", "distance", "ratio"};
            for (std::size_t n = 0; n < run.distances.size(); ++n)
                csv.row(n, fmt(run.distances[n]), n == 0 ? std::string() : fmt(run.ratios[n - 1]));
            if (stages & stage::fixpoint)
                write_text(out_dir / ("fixpoint_" + std::string(to_string(run.op)) + ".csv"), csv.str(), result);
            fam[std::string(to_string(run.op))] = {
                {"weight", to_string(run.weight)},
                {"alternative", to_string(run.alternative)},
                {"iterations", run.n},
                {"alpha_measured", run.alpha_measured},
                {"L", *cfg.L},
                {"d_f_Jf", run.distances.empty() ? 0.0 : run.distances.front()},
                {"d_f_limit", run.d_f_limit},
                {"posterior_bound", std::isfinite(run.posterior_bound) ? json(run.posterior_bound) : json("inf")},
                {"posterior_holds", run.posterior_holds},
                {"fixed_point_residual", run.fixed_point_residual},
                {"samples", run.samples},
                {"sampled", true},
            };
        }
        const AuditEntry* cond =
            rep.find(family == Family::halving ? "halving_condition" : "doubling_condition");
        fam["condition_status"] = cond ? std::string(to_string(cond->status)) : std::string("missing");
        fix_json[std::string(to_string(family))] = fam;
        if (!fo.F.empty()) {
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const auto& [x, z] = pairs[i];
                bound_rows.push_back({std::string(to_string(m)), x, z, norm_eval(Y, (*f)(x, z) - fo.F[i]),
                                      stability_bound_fp(*cfg.L, beta, phi, x, z, family)});
            }
        }
        const Method dm = family == Family::halving ? Method::direct_halving : Method::direct_doubling;
        if (has(cfg.methods, dm) && need_direct) {
            std::optional<std::vector<Vector>> fj, fjp;
            if (!fo.F.empty()) {
                fj = fo.runs[0].limit_values;
                fjp = fo.runs[1].limit_values;
            }
            rep.merge(route_consistency(direct_F[fi], fj, fjp, pairs, Y, cfg.tol.extraction));
        }
    }
    if (need_fix && (stages & stage::fixpoint)) write_text(out_dir / "fixpoint.json", fix_json.dump(2) + "\n", result);

    if (stages & stage::bound && !bound_rows.empty()) {
        Csv csv{"method", "x", "z", "deviation", "bound", "slack"};
        for (const auto& b : bound_rows)
            csv.row(b.method, format_vector(b.x), format_vector(b.z), fmt(b.deviation), fmt(b.bound),
                    fmt(b.bound - b.deviation));
        write_text(out_dir / "bound.csv", csv.str(), result);
    }

    if (stages & stage::audit) {
        for (const auto& c : cfg.corollaries) rep.merge(audit_corollary(c.id, c.theta, c.r, c.beta, pairs));
    }

    if ((stages & stage::sweep) && cfg.sweep_r) {
        write_text(out_dir / "sweep.csv", sweep_csv(sweep_exponent(cfg, *cfg.sweep_r)), result);
    }

    rep.sort();
    result.exit_code = rep.exit_code();
    write_text(out_dir / "report.json", rep.to_json().dump(2) + "\n", result);
    return result;
}

std::vector<SweepRow> sweep_exponent(const ExperimentConfig& cfg, const std::vector<double>& r_values)
{
    std::vector<SweepRow> rows;
    if (r_values.empty()) return rows;
    const int dim = cfg.space.dimension;
    const double beta = cfg.beta();
    const SeriesOptions sopts{cfg.tol.series, cfg.limits.max_terms};
    const ExtractionOptions eopts{cfg.tol.extraction, cfg.limits.k_max, sopts};
    const auto vectors = dyadic_vectors(dim, cfg.samples.range, cfg.samples.dyadic_depth);
    const auto pairs = pair_grid(vectors, vectors);

    Mapping f = mapping_from_json(cfg.mapping, cfg.space, cfg.target(), cfg.base_dir);
    if (cfg.calibrate) {
        const auto tuples = tuple_grid(dyadic_vectors(dim, cfg.samples.range, cfg.samples.tuple_depth));
        f = calibrate_amplitude(f, cfg.phi(), tuples);
    }
    const Vector e = Vector::basis(static_cast<std::size_t>(dim), 0, 1.0);
    const Vector zero = Vector::zeros(static_cast<std::size_t>(dim));

    for (double r : r_values) {
        SweepRow row;
        row.r = r;
        const ControlFunction phi = cfg.phi_at(r);
        double upper[4];
        for (int i = 0; i < 4; ++i) {
            const SeriesResult s = evaluate_series(static_cast<SeriesId>(i), phi, e, e, beta, sopts);
            row.series_converged[i] = s.converged;
            upper[i] = s.upper();
        }
        for (auto [cond, slot] : {std::pair{LipschitzCondition::halving, &row.smallest_L_halving},
                                  std::pair{LipschitzCondition::doubling, &row.smallest_L_doubling}}) {
            try {
                const RequiredL req = smallest_L(phi, beta, pairs, cond);
                if (req.below_one()) *slot = req.value;
            } catch (const InputError&) {
            }
        }
        for (int i = 0; i < 4; ++i)
            row.extraction[i] = std::string(to_string(extract(static_cast<Route>(i), f, phi, beta, e, e, eopts).verdict));
        const double p0 = phi(e, zero);
        if (row.series_converged[0] && row.series_converged[1])
            row.bound_direct_halving = std::min(upper[0] * p0, p0 * upper[1]);
        if (row.series_converged[2] && row.series_converged[3])
            row.bound_direct_doubling = std::min(upper[2] * p0, p0 * upper[3]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows)
{
    Csv csv{"r",
            "halving_additive",
            "halving_quadratic",
            "doubling_additive",
            "doubling_quadratic",
            "smallest_L_halving",
            "smallest_L_doubling",
            "P_div",
            "Q_div",
            "P_mul",
            "Q_mul",
            "bound_direct_halving",
            "bound_direct_doubling"};
    auto verdict = [](bool c) { return c ? "converged" : "divergent"; };
    auto opt = [](const std::optional<double>& v, const char* none) { return v ? fmt(*v) : std::string(none); };
    for (const auto& r : rows) {
        csv.row(fmt(r.r), verdict(r.series_converged[0]), verdict(r.series_converged[1]),
                verdict(r.series_converged[2]), verdict(r.series_converged[3]), opt(r.smallest_L_halving, "none<1"),
                opt(r.smallest_L_doubling, "none<1"), r.extraction[0], r.extraction[1], r.extraction[2],
                r.extraction[3], opt(r.bound_direct_halving, "divergent"), opt(r.bound_direct_doubling, "divergent"));
    }
    return csv.str();
}

}  // namespace ulam

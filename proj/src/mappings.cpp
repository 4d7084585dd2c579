#include "ulam/mappings.hpp"

#include "ulam/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace ulam {

namespace {

double signed_pow(double t, double a)
{
    if (t == 0.0) return 0.0;
    double m = std::pow(std::fabs(t), a);
    return t < 0.0 ? -m : m;
}

std::size_t locate(const std::vector<double>& axis, double v)
{
    // index i with axis[i] <= v <= axis[i+1]
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t i = static_cast<std::size_t>(it - axis.begin());
    if (i == 0) return 0;
    return std::min(i - 1, axis.size() - 2);
}

}  // namespace

DyadicTable::DyadicTable(std::vector<double> xs, std::vector<double> zs, std::vector<double> values)
    : xs_(std::move(xs)), zs_(std::move(zs)), values_(std::move(values))
{
    if (xs_.size() < 2 || zs_.size() < 2) throw InputError("table needs at least two nodes per axis");
    if (values_.size() != xs_.size() * zs_.size()) throw InputError("table value count does not match its grid");
    if (!std::is_sorted(xs_.begin(), xs_.end()) || !std::is_sorted(zs_.begin(), zs_.end()) ||
        std::adjacent_find(xs_.begin(), xs_.end()) != xs_.end() ||
        std::adjacent_find(zs_.begin(), zs_.end()) != zs_.end())
        throw InputError("table axes must be strictly increasing");
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        for (std::size_t k = 0; k < zs_.size(); ++k) {
            double v = values_[i * zs_.size() + k];
            if (!std::isfinite(v)) throw InputError("table values must be finite");
            if ((xs_[i] == 0.0 || zs_[k] == 0.0) && v != 0.0)
                throw InputError("table value on an axis must be zero");
        }
    }
}

DyadicTable DyadicTable::load_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open table '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty table '" + path.string() + "'");
    line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r'; }), line.end());
    if (line != "x,z,value") throw InputError("table header must be 'x,z,value'");

    std::map<std::pair<double, double>, double> cells;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, z, v;
        if (!(ss >> x >> z >> v)) throw InputError("malformed table row at line " + std::to_string(lineno));
        if (!cells.emplace(std::pair{x, z}, v).second)
            throw InputError("duplicate table node at line " + std::to_string(lineno));
    }
    std::vector<double> xs, zs;
    for (const auto& [k, _] : cells) {
        xs.push_back(k.first);
        zs.push_back(k.second);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
    std::vector<double> values;
    values.reserve(xs.size() * zs.size());
    for (double x : xs) {
        for (double z : zs) {
            auto it = cells.find({x, z});
            if (it == cells.end()) throw InputError("table grid is incomplete");
            values.push_back(it->second);
        }
    }
    return DyadicTable(std::move(xs), std::move(zs), std::move(values));
}

double DyadicTable::interpolate(double x, double z) const
{
    if (x < xs_.front() || x > xs_.back() || z < zs_.front() || z > zs_.back())
        throw NumericError("table evaluated outside its grid at (" + std::to_string(x) + ", " +
                           std::to_string(z) + ")");
    std::size_t i = locate(xs_, x), k = locate(zs_, z);
    double tx = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    double tz = (z - zs_[k]) / (zs_[k + 1] - zs_[k]);
    auto at = [&](std::size_t a, std::size_t b) { return values_[a * zs_.size() + b]; };
    return (1 - tx) * (1 - tz) * at(i, k) + tx * (1 - tz) * at(i + 1, k) + (1 - tx) * tz * at(i, k + 1) +
           tx * tz * at(i + 1, k + 1);
}

PerturbationSpec PerturbationSpec::power_product(double eta, double a_exp, double b_exp)
{
    if (!std::isfinite(eta)) throw InputError("perturbation amplitude must be finite");
    if (!(a_exp > 0.0) || !(b_exp > 0.0)) throw InputError("perturbation exponents must be positive");
    PerturbationSpec p;
    p.kind = PerturbationKind::power_product;
    p.eta = eta;
    p.a_exp = a_exp;
    p.b_exp = b_exp;
    return p;
}

PerturbationSpec PerturbationSpec::oscillatory(double eta, double a_exp, double b_exp, double freq)
{
    PerturbationSpec p = power_product(eta, a_exp, b_exp);
    if (!std::isfinite(freq)) throw InputError("frequency must be finite");
    p.kind = PerturbationKind::oscillatory;
    p.freq = freq;
    return p;
}

PerturbationSpec PerturbationSpec::tabulated(double eta, std::shared_ptr<const DyadicTable> table)
{
    if (!std::isfinite(eta)) throw InputError("perturbation amplitude must be finite");
    if (!table) throw InputError("tabulated perturbation needs a table");
    PerturbationSpec p;
    p.kind = PerturbationKind::table;
    p.eta = eta;
    p.table = std::move(table);
    return p;
}

double PerturbationSpec::value(const Vector& x, const Vector& z) const
{
    const double x0 = x[0], z0 = z[0];
    if (x0 == 0.0 || z0 == 0.0 || eta == 0.0) return 0.0;
    switch (kind) {
    case PerturbationKind::power_product: return eta * signed_pow(x0, a_exp) * signed_pow(z0, b_exp);
    case PerturbationKind::oscillatory:
        return eta * signed_pow(x0, a_exp) * signed_pow(z0, b_exp) * std::cos(freq * x0 * z0);
    case PerturbationKind::table: return eta * table->interpolate(x0, z0);
    }
    return 0.0;
}

Mapping Mapping::zero(SpaceSpec X, SpaceSpec Y)
{
    X.validate();
    Y.validate();
    return Mapping(std::make_shared<const Impl>(Impl{X, Y, CoreKind::zero, {}, {}, {}, "zero", std::nullopt}));
}

Mapping Mapping::separable(SpaceSpec X, SpaceSpec Y, Matrix a, Matrix q)
{
    X.validate();
    Y.validate();
    const auto dx = static_cast<std::size_t>(X.dimension), dy = static_cast<std::size_t>(Y.dimension);
    if (a.size() != dy || std::any_of(a.begin(), a.end(), [&](const auto& row) { return row.size() != dx; }))
        throw StructuralError("separable core: linear part must be dim(Y) x dim(X)");
    if (q.size() != dx || std::any_of(q.begin(), q.end(), [&](const auto& row) { return row.size() != dx; }))
        throw StructuralError("separable core: quadratic form must be dim(X) x dim(X)");
    for (const auto* m : {&a, &q})
        for (const auto& row : *m)
            for (double v : row)
                if (!std::isfinite(v)) throw InputError("separable core coefficients must be finite");
    return Mapping(std::make_shared<const Impl>(
        Impl{X, Y, CoreKind::separable, std::move(a), std::move(q), {}, "separable", std::nullopt}));
}

Mapping Mapping::custom(SpaceSpec X, SpaceSpec Y, Fn fn, std::string label)
{
    X.validate();
    Y.validate();
    if (!fn) throw InputError("custom mapping is empty");
    return Mapping(std::make_shared<const Impl>(
        Impl{X, Y, CoreKind::custom, {}, {}, std::move(fn), std::move(label), std::nullopt}));
}

Mapping Mapping::with_perturbation(PerturbationSpec p) const
{
    Impl copy = *impl_;
    copy.perturbation = std::move(p);
    return Mapping(std::make_shared<const Impl>(std::move(copy)));
}

Mapping Mapping::without_perturbation() const
{
    Impl copy = *impl_;
    copy.perturbation.reset();
    return Mapping(std::make_shared<const Impl>(std::move(copy)));
}

Vector Mapping::core_value(const Vector& x, const Vector& z) const
{
    const auto dy = static_cast<std::size_t>(impl_->Y.dimension);
    switch (impl_->core) {
    case CoreKind::zero: return Vector::zeros(dy);
    case CoreKind::separable: {
        double quad = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i)
            for (std::size_t k = 0; k < z.size(); ++k) quad += z[i] * impl_->q[i][k] * z[k];
        Vector out(dy);
        for (std::size_t r = 0; r < dy; ++r) {
            double lin = 0.0;
            for (std::size_t c = 0; c < x.size(); ++c) lin += impl_->a[r][c] * x[c];
            out[r] = lin * quad;
        }
        return out;
    }
    case CoreKind::custom: {
        Vector out = impl_->custom(x, z);
        if (out.size() != dy) throw StructuralError("custom mapping returned a vector of the wrong dimension");
        return out;
    }
    }
    return Vector::zeros(dy);
}

Vector Mapping::operator()(const Vector& x, const Vector& z) const
{
    const auto dx = static_cast<std::size_t>(impl_->X.dimension);
    if (x.size() != dx || z.size() != dx)
        throw StructuralError("mapping arguments must have dimension " + std::to_string(dx));
    const auto dy = static_cast<std::size_t>(impl_->Y.dimension);
    if (x.is_zero() || z.is_zero()) return Vector::zeros(dy);
    if (!x.is_finite() || !z.is_finite())
        throw NumericError("non-finite argument at x=" + x.to_string() + ", z=" + z.to_string());

    Vector out = core_value(x, z);
    if (impl_->perturbation) out[0] += impl_->perturbation->value(x, z);
    if (!out.is_finite())
        throw NumericError("non-finite mapping value at x=" + x.to_string() + ", z=" + z.to_string());
    return out;
}

Vector eval_f(const Mapping& f, const Vector& x, const Vector& z) { return f(x, z); }

Vector defect_vector(const Mapping& f, const Vector& x, const Vector& y, const Vector& z, const Vector& w)
{
    Vector d = f(x + y, z + w);
    d += f(x - y, z - w);
    d -= 2.0 * f(x, z);
    d -= 2.0 * f(x, w);
    return d;
}

double defect(const Mapping& f, const Vector& x, const Vector& y, const Vector& z, const Vector& w)
{
    return norm_eval(f.target(), defect_vector(f, x, y, z, w));
}

DefectSample defect_sample(const Mapping& f, const ControlFunction& phi, const TupleSample& t)
{
    DefectSample s{t};
    s.defect_norm = defect(f, t.x, t.y, t.z, t.w);
    s.bound = phi(t.x, t.y) * phi(t.z, t.w);
    s.slack = s.bound - s.defect_norm;
    return s;
}

namespace {

Witness tuple_witness(const TupleSample& t, std::map<std::string, double> values)
{
    return Witness{{t.x, t.y, t.z, t.w}, std::move(values)};
}

}  // namespace

AuditReport admissibility_check(const Mapping& f, const ControlFunction& phi, std::span<const TupleSample> samples)
{
    if (samples.empty()) throw InputError("admissibility check needs at least one sample tuple");
    AuditEntry e{.check_id = "admissibility"};
    double min_slack = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    std::size_t violations = 0;
    for (const auto& t : samples) {
        DefectSample s = defect_sample(f, phi, t);
        if (s.slack < 0.0) ++violations;
        if (s.bound > 0.0) max_ratio = std::max(max_ratio, s.defect_norm / s.bound);
        else if (s.defect_norm > 0.0) max_ratio = std::numeric_limits<double>::infinity();
        if (s.slack < min_slack) {
            min_slack = s.slack;
            e.witness = tuple_witness(t, {{"defect", s.defect_norm}, {"bound", s.bound}, {"slack", s.slack}});
        }
    }
    e.status = violations == 0 ? Status::pass : Status::fail;
    e.margin = min_slack;
    e.values["min_slack"] = min_slack;
    e.values["max_defect_ratio"] = max_ratio;
    e.values["violations"] = static_cast<double>(violations);
    e.values["samples"] = static_cast<double>(samples.size());
    e.notes = "certified on the sampled tuples only";
    AuditReport r;
    r.add(std::move(e));
    return r;
}

Mapping calibrate_amplitude(const Mapping& f_template, const ControlFunction& phi,
                            std::span<const TupleSample> samples)
{
    const auto& pert = f_template.perturbation();
    if (!pert || pert->eta == 0.0) throw InputError("calibration needs a template with a nonzero perturbation");
    if (samples.empty()) throw InputError("calibration needs at least one sample tuple");

    // The defect is affine in the amplitude: core part + s * perturbation part.
    const Mapping core = f_template.without_perturbation();
    const Mapping pert_only = Mapping::zero(f_template.domain(), f_template.target()).with_perturbation(*pert);
    struct Split {
        Vector core, pert;
        double bound;
    };
    std::vector<Split> parts;
    parts.reserve(samples.size());
    const SpaceSpec& Y = f_template.target();
    for (const auto& t : samples) {
        Split s{defect_vector(core, t.x, t.y, t.z, t.w), defect_vector(pert_only, t.x, t.y, t.z, t.w),
                phi(t.x, t.y) * phi(t.z, t.w)};
        if (norm_eval(Y, s.core) > s.bound) {
            throw CalibrationError("core mapping violates the defect bound at (x,y,z,w)=(" + t.x.to_string() +
                                   ", " + t.y.to_string() + ", " + t.z.to_string() + ", " + t.w.to_string() +
                                   "): defect " + std::to_string(norm_eval(Y, s.core)) + " > bound " +
                                   std::to_string(s.bound));
        }
        parts.push_back(std::move(s));
    }
    auto admissible = [&](double scale) {
        for (const auto& p : parts)
            if (norm_eval(Y, p.core + scale * p.pert) > p.bound) return false;
        return true;
    };

    double lo = 0.0, hi = 1.0;
    if (admissible(1.0)) {
        lo = 1.0;
        hi = 2.0;
        while (admissible(hi)) {
            lo = hi;
            hi *= 2.0;
            if (hi > 0x1p60) break;
        }
    }
    if (hi <= 0x1p60) {
        for (int it = 0; it < 200 && lo < hi; ++it) {
            double mid = lo + 0.5 * (hi - lo);
            if (mid == lo || mid == hi) break;
            if (admissible(mid)) lo = mid;
            else hi = mid;
        }
    }
    PerturbationSpec scaled = *pert;
    scaled.eta = pert->eta * lo;
    return f_template.with_perturbation(std::move(scaled));
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const char* what)
{
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(std::string("unknown ") + what + " key '" + key + "'");
    }
}

}  // namespace

Mapping mapping_from_json(const nlohmann::json& j, const SpaceSpec& X, const SpaceSpec& Y,
                          const std::filesystem::path& base_dir)
{
    if (!j.is_object()) throw ConfigError("mapping must be a JSON object");
    reject_unknown(j, {"core", "perturbation"}, "mapping");
    try {
        const auto& core = j.at("core");
        reject_unknown(core, {"kind", "a", "q"}, "core");
        const auto kind = core.at("kind").get<std::string>();
        Mapping f = Mapping::zero(X, Y);
        if (kind == "separable") {
            f = Mapping::separable(X, Y, core.at("a").get<Matrix>(), core.at("q").get<Matrix>());
        } else if (kind != "zero") {
            throw ConfigError("core kind must be 'zero' or 'separable', got '" + kind + "'");
        }
        if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
            const auto& p = j.at("perturbation");
            const auto pk = p.at("kind").get<std::string>();
            if (pk == "power_product") {
                reject_unknown(p, {"kind", "eta", "a_exp", "b_exp"}, "perturbation");
                f = f.with_perturbation(PerturbationSpec::power_product(
                    p.at("eta").get<double>(), p.at("a_exp").get<double>(), p.at("b_exp").get<double>()));
            } else if (pk == "oscillatory") {
                reject_unknown(p, {"kind", "eta", "a_exp", "b_exp", "freq"}, "perturbation");
                f = f.with_perturbation(PerturbationSpec::oscillatory(
                    p.at("eta").get<double>(), p.at("a_exp").get<double>(), p.at("b_exp").get<double>(),
                    p.at("freq").get<double>()));
            } else if (pk == "table") {
                reject_unknown(p, {"kind", "eta", "csv"}, "perturbation");
                const auto src = p.at("csv").get<std::string>();
                std::filesystem::path path(src);
                if (path.is_relative()) path = base_dir / path;
                auto spec = PerturbationSpec::tabulated(
                    p.at("eta").get<double>(), std::make_shared<const DyadicTable>(DyadicTable::load_csv(path)));
                spec.table_source = src;
                f = f.with_perturbation(std::move(spec));
            } else {
                throw ConfigError("unknown perturbation kind '" + pk + "'");
            }
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mapping: ") + e.what());
    } catch (const InputError& e) {
        throw ConfigError(std::string("mapping: ") + e.what());
    } catch (const StructuralError& e) {
        throw ConfigError(std::string("mapping: ") + e.what());
    }
}

nlohmann::json mapping_to_json(const Mapping& f)
{
    nlohmann::json j;
    switch (f.core_kind()) {
    case CoreKind::zero: j["core"] = {{"kind", "zero"}}; break;
    case CoreKind::separable: j["core"] = {{"kind", "separable"}, {"a", f.core_a()}, {"q", f.core_q()}}; break;
    case CoreKind::custom: j["core"] = {{"kind", "custom"}, {"label", f.label()}}; break;
    }
    if (!f.perturbation()) {
        j["perturbation"] = nullptr;
        return j;
    }
    const auto& p = *f.perturbation();
    switch (p.kind) {
    case PerturbationKind::power_product:
        j["perturbation"] = {{"kind", "power_product"}, {"eta", p.eta}, {"a_exp", p.a_exp}, {"b_exp", p.b_exp}};
        break;
    case PerturbationKind::oscillatory:
        j["perturbation"] = {{"kind", "oscillatory"}, {"eta", p.eta}, {"a_exp", p.a_exp},
                             {"b_exp", p.b_exp},       {"freq", p.freq}};
        break;
    case PerturbationKind::table:
        j["perturbation"] = {{"kind", "table"}, {"eta", p.eta}, {"csv", p.table_source}};
        break;
    }
    return j;
}

}  // namespace ulam

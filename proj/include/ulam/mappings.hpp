#pragma once

#include "ulam/control.hpp"
#include "ulam/report.hpp"
#include "ulam/samples.hpp"
#include "ulam/spaces.hpp"
#include "ulam/vector.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ulam {

using Matrix = std::vector<std::vector<double>>;

/// Values sampled on a rectangular grid in the (x, z) plane, bilinearly
/// interpolated. Only the first coordinate of each argument is used. Values
/// on the axes must be zero.
class DyadicTable {
public:
    DyadicTable(std::vector<double> xs, std::vector<double> zs, std::vector<double> values);

    /// CSV with header "x,z,value"; every (x, z) grid node exactly once.
    static DyadicTable load_csv(const std::filesystem::path& path);

    /// Throws NumericError outside the grid.
    double interpolate(double x, double z) const;

    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<double>& zs() const noexcept { return zs_; }

private:
    std::vector<double> xs_, zs_;
    std::vector<double> values_;  // row-major, xs_.size() rows
};

enum class PerturbationKind { power_product, oscillatory, table };

/// Test-fixture perturbation e(x, z), a multiple of the first basis vector of
/// Y. With sp(t, a) = sign(t) |t|^a applied to the first coordinates:
///   power_product: eta * sp(x, a) * sp(z, b)
///   oscillatory:   eta * sp(x, a) * sp(z, b) * cos(freq * x * z)
///   table:         eta * table(x, z)
/// Every kind vanishes when x = 0 or z = 0.
struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::power_product;
    double eta = 0.0;
    double a_exp = 1.0;
    double b_exp = 1.0;
    double freq = 0.0;
    std::shared_ptr<const DyadicTable> table;
    std::string table_source;  // CSV path as written in the config

    static PerturbationSpec power_product(double eta, double a_exp, double b_exp);
    static PerturbationSpec oscillatory(double eta, double a_exp, double b_exp, double freq);
    static PerturbationSpec tabulated(double eta, std::shared_ptr<const DyadicTable> table);

    /// Scalar factor multiplying the first basis vector of Y.
    double value(const Vector& x, const Vector& z) const;
};

enum class CoreKind { zero, separable, custom };

/// An evaluable bivariate mapping f: X^2 -> Y, immutable and cheap to copy.
///
/// f = core + perturbation, where the separable core is (A x) * (z^T Q z).
/// Evaluation returns the exact zero vector whenever x = 0 or z = 0, so the
/// axis conditions f(x, 0) = f(0, z) = 0 hold by construction for every core.
class Mapping {
public:
    using Fn = std::function<Vector(const Vector&, const Vector&)>;

    static Mapping zero(SpaceSpec X, SpaceSpec Y);
    /// a: dim(Y) x dim(X) linear map, q: dim(X) x dim(X) quadratic form.
    static Mapping separable(SpaceSpec X, SpaceSpec Y, Matrix a, Matrix q);
    static Mapping custom(SpaceSpec X, SpaceSpec Y, Fn fn, std::string label = "custom");

    Mapping with_perturbation(PerturbationSpec p) const;
    Mapping without_perturbation() const;

    /// eval_f
    Vector operator()(const Vector& x, const Vector& z) const;

    const SpaceSpec& domain() const noexcept { return impl_->X; }
    const SpaceSpec& target() const noexcept { return impl_->Y; }
    CoreKind core_kind() const noexcept { return impl_->core; }
    const std::optional<PerturbationSpec>& perturbation() const noexcept { return impl_->perturbation; }
    const std::string& label() const noexcept { return impl_->label; }
    const Matrix& core_a() const noexcept { return impl_->a; }
    const Matrix& core_q() const noexcept { return impl_->q; }

private:
    struct Impl {
        SpaceSpec X, Y;
        CoreKind core = CoreKind::zero;
        Matrix a, q;
        Fn custom;
        std::string label;
        std::optional<PerturbationSpec> perturbation;
    };
    explicit Mapping(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    Vector core_value(const Vector& x, const Vector& z) const;

    std::shared_ptr<const Impl> impl_;
};

Vector eval_f(const Mapping& f, const Vector& x, const Vector& z);

/// The vector f(x+y, z+w) + f(x-y, z-w) - 2 f(x, z) - 2 f(x, w).
Vector defect_vector(const Mapping& f, const Vector& x, const Vector& y, const Vector& z, const Vector& w);

/// Y-norm of defect_vector.
double defect(const Mapping& f, const Vector& x, const Vector& y, const Vector& z, const Vector& w);

struct DefectSample {
    TupleSample point;
    double defect_norm = 0.0;
    double bound = 0.0;  // phi(x, y) * phi(z, w)
    double slack = 0.0;  // bound - defect_norm
};

DefectSample defect_sample(const Mapping& f, const ControlFunction& phi, const TupleSample& t);

/// Checks defect <= phi(x, y) phi(z, w) on every sample tuple.
AuditReport admissibility_check(const Mapping& f, const ControlFunction& phi, std::span<const TupleSample> samples);

/// Rescales the perturbation amplitude by the largest factor (found by
/// doubling then bisection) for which admissibility holds on the samples.
/// Throws CalibrationError when the core alone violates the bound.
Mapping calibrate_amplitude(const Mapping& f_template, const ControlFunction& phi,
                            std::span<const TupleSample> samples);

/// Config (de)serialization: {"core": {...}, "perturbation": {...} | null}.
/// Relative table paths resolve against base_dir.
Mapping mapping_from_json(const nlohmann::json& j, const SpaceSpec& X, const SpaceSpec& Y,
                          const std::filesystem::path& base_dir);
nlohmann::json mapping_to_json(const Mapping& f);

}  // namespace ulam

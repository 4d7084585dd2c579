#pragma once

#include "ulam/audit.hpp"
#include "ulam/control.hpp"
#include "ulam/report.hpp"
#include "ulam/spaces.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ulam {

enum class Method { direct_halving, direct_doubling, fixpoint_halving, fixpoint_doubling };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

struct SampleSpec {
    double range = 2.0;
    int dyadic_depth = 2;  // pair samples (x, z)
    int tuple_depth = 1;   // tuples for admissibility and structure checks
    std::size_t random_count = 0;
    std::optional<std::uint64_t> seed;
};

struct Tolerances {
    double series = 1e-12;
    double extraction = 1e-10;
    double identity = 1e-9;
    double fixpoint = 1e-12;
};

struct Limits {
    int k_max = 60;
    int n_max = 200;
    int max_terms = 20000;
};

struct CorollaryRequest {
    CorollaryId id;
    double theta = 1.0;
    double r = 1.0;
    double beta = 1.0;
};

struct ExperimentConfig {
    int version = 1;
    SpaceSpec space;
    /// Only honoured with experimental_distinct_beta; otherwise Y = X.
    std::optional<SpaceSpec> target_space;
    bool experimental_distinct_beta = false;
    double theta = 1.0;
    double r = 1.0;
    nlohmann::json mapping = {{"core", {{"kind", "zero"}}}};
    bool calibrate = false;
    std::vector<Method> methods;
    std::optional<double> L;
    SampleSpec samples;
    Tolerances tol;
    Limits limits;
    std::vector<CorollaryRequest> corollaries;
    std::optional<std::vector<double>> sweep_r;
    std::optional<std::string> output_dir;
    /// Directory of the config file; relative paths resolve against it.
    std::filesystem::path base_dir;

    const SpaceSpec& target() const;
    /// Homogeneity exponent of the target norm.
    double beta() const;
    ControlFunction phi() const;
    ControlFunction phi_at(double r_value) const;
};

/// Strict parsing: unknown keys and invalid values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

namespace stage {
inline constexpr unsigned axioms = 1u << 0;
inline constexpr unsigned series = 1u << 1;
inline constexpr unsigned extract = 1u << 2;
inline constexpr unsigned fixpoint = 1u << 3;
inline constexpr unsigned bound = 1u << 4;
inline constexpr unsigned audit = 1u << 5;
inline constexpr unsigned sweep = 1u << 6;
inline constexpr unsigned all = 0x7fu;
}  // namespace stage

struct RunResult {
    AuditReport report;
    int exit_code = 0;
    std::vector<std::filesystem::path> files;
};

/// Runs the selected stages and writes their CSV/JSON outputs plus
/// report.json into out_dir. Output is a pure function of the config.
RunResult run_scenario(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                       unsigned stages = stage::all);

struct SweepRow {
    double r = 0.0;
    /// Indexed by SeriesId.
    bool series_converged[4] = {};
    std::optional<double> smallest_L_halving, smallest_L_doubling;  // empty: none below 1
    /// P_div, Q_div, P_mul, Q_mul at the probe point.
    std::string extraction[4];
    std::optional<double> bound_direct_halving, bound_direct_doubling;
};

std::vector<SweepRow> sweep_exponent(const ExperimentConfig& cfg, const std::vector<double>& r_values);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace ulam

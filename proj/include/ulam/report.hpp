#pragma once

#include "ulam/vector.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ulam {

enum class Status { pass, fail, refused, flagged };

std::string_view to_string(Status s);

/// Severity used for exit codes: pass 0, fail/flagged 1, refused 2.
int severity(Status s) noexcept;

struct Witness {
    std::vector<Vector> point;
    std::map<std::string, double> values;
};

struct AuditEntry {
    std::string check_id;
    Status status = Status::pass;
    std::optional<Witness> witness;
    double margin = 0.0;
    std::string notes;
    /// Named numeric results of the check (worst ratio, recomputed constant, ...).
    std::map<std::string, double> values;
};

/// Ordered collection of check results.
///
/// Invariants enforced on insertion: fail and flagged entries carry a
/// witness, pass entries have margin >= 0.
class AuditReport {
public:
    AuditEntry& add(AuditEntry entry);
    void merge(const AuditReport& other);

    const std::vector<AuditEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    /// First entry with the given id, or nullptr.
    const AuditEntry* find(std::string_view check_id) const;

    std::size_t count(Status s) const;
    bool all_pass() const { return count(Status::pass) == entries_.size(); }

    /// Maximum severity over all entries (0 when empty).
    int exit_code() const;

    /// Deterministic order: by check_id, then by witness point.
    void sort();

    nlohmann::json to_json() const;

private:
    std::vector<AuditEntry> entries_;
};

}  // namespace ulam

#include "ulam/report.hpp"

#include "ulam/errors.hpp"
#include "ulam/numfmt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace ulam {

std::string_view to_string(Status s)
{
    switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::refused: return "refused";
    case Status::flagged: return "flagged";
    }
    return "?";
}

int severity(Status s) noexcept
{
    switch (s) {
    case Status::pass: return 0;
    case Status::fail:
    case Status::flagged: return 1;
    case Status::refused: return 2;
    }
    return 2;
}

AuditEntry& AuditReport::add(AuditEntry entry)
{
    if ((entry.status == Status::fail || entry.status == Status::flagged) && !entry.witness)
        throw ContractError("report entry '" + entry.check_id + "' is " +
                            std::string(to_string(entry.status)) + " without a witness");
    if (entry.status == Status::pass && !(entry.margin >= 0.0))
        throw ContractError("report entry '" + entry.check_id + "' passes with negative margin");
    entries_.push_back(std::move(entry));
    return entries_.back();
}

void AuditReport::merge(const AuditReport& other)
{
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

const AuditEntry* AuditReport::find(std::string_view check_id) const
{
    for (const auto& e : entries_)
        if (e.check_id == check_id) return &e;
    return nullptr;
}

std::size_t AuditReport::count(Status s) const
{
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [s](const auto& e) { return e.status == s; }));
}

int AuditReport::exit_code() const
{
    int code = 0;
    for (const auto& e : entries_) code = std::max(code, severity(e.status));
    return code;
}

namespace {

std::vector<double> flatten(const std::optional<Witness>& w)
{
    std::vector<double> out;
    if (!w) return out;
    for (const auto& v : w->point)
        for (double c : v.coords()) out.push_back(c);
    return out;
}

nlohmann::json number_or_string(double v)
{
    if (std::isfinite(v)) return v;
    return format_double(v);
}

nlohmann::json values_json(const std::map<std::string, double>& values)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values) j[k] = number_or_string(v);
    return j;
}

}  // namespace

void AuditReport::sort()
{
    std::stable_sort(entries_.begin(), entries_.end(), [](const AuditEntry& a, const AuditEntry& b) {
        if (a.check_id != b.check_id) return a.check_id < b.check_id;
        return flatten(a.witness) < flatten(b.witness);
    });
}

nlohmann::json AuditReport::to_json() const
{
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : entries_) {
        nlohmann::json je;
        je["check_id"] = e.check_id;
        je["status"] = std::string(to_string(e.status));
        je["margin"] = number_or_string(e.margin);
        je["notes"] = e.notes;
        je["values"] = values_json(e.values);
        if (e.witness) {
            nlohmann::json pt = nlohmann::json::array();
            for (const auto& v : e.witness->point) {
                nlohmann::json coords = nlohmann::json::array();
                for (double c : v.coords()) coords.push_back(number_or_string(c));
                pt.push_back(std::move(coords));
            }
            je["witness"] = {{"point", std::move(pt)}, {"values", values_json(e.witness->values)}};
        } else {
            je["witness"] = nullptr;
        }
        entries.push_back(std::move(je));
    }
    nlohmann::json summary = {
        {"total", entries_.size()},
        {"pass", count(Status::pass)},
        {"fail", count(Status::fail)},
        {"refused", count(Status::refused)},
        {"flagged", count(Status::flagged)},
        {"exit_code", exit_code()},
    };
    return {{"entries", std::move(entries)}, {"summary", std::move(summary)}};
}

}  // namespace ulam

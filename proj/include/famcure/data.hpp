#pragma once

// Clustered right-censored survival data: per-subject observed pairs,
// families, the full parameter collection, and family-history labels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "famcure/cure.hpp"

namespace famcure {

enum class Role : std::uint8_t { main, mother, sister };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::main: return "main";
        case Role::mother: return "mother";
        default: return "sister";
    }
}

inline Role role_from_name(const std::string& s) {
    if (s == "main") return Role::main;
    if (s == "mother") return Role::mother;
    if (s == "sister") return Role::sister;
    throw std::invalid_argument("unknown role: " + s);
}

struct SubjectRecord {
    double x = 0.0;   // observed age, min(event age, censoring age)
    int delta = 0;    // 1 = event observed, 0 = censored
    Role role = Role::sister;
    std::optional<double> birth_year;
    std::optional<double> event_year;  // calendar year of the event, when delta = 1

    SubjectRecord() = default;
    SubjectRecord(double x_, int delta_, Role role_ = Role::sister)
        : x(x_), delta(delta_), role(role_) {
        validate();
    }
    void validate() const {
        if (!(std::isfinite(x) && x >= 0.0)) throw std::invalid_argument("SubjectRecord: x must be finite and >= 0");
        if (delta != 0 && delta != 1) throw std::invalid_argument("SubjectRecord: delta must be 0 or 1");
    }
};

struct Family {
    std::string id;
    std::vector<SubjectRecord> members;
    std::optional<double> true_frailty;  // simulation only

    Family() = default;
    Family(std::string id_, std::vector<SubjectRecord> members_,
           std::optional<double> true_frailty_ = std::nullopt)
        : id(std::move(id_)), members(std::move(members_)), true_frailty(true_frailty_) {
        validate();
    }
    void validate() const {
        if (members.empty()) throw std::invalid_argument("Family: must have at least one member");
        int mains = 0;
        for (const auto& m : members) {
            m.validate();
            if (m.role == Role::main) ++mains;
        }
        if (mains > 1) throw std::invalid_argument("Family: at most one main subject");
        if (true_frailty && !(*true_frailty > 0.0)) {
            throw std::invalid_argument("Family: true_frailty must be positive");
        }
    }
    [[nodiscard]] std::optional<std::size_t> main_index() const {
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (members[j].role == Role::main) return j;
        }
        return std::nullopt;
    }
};

struct ParamSet {
    double theta;
    double p;
    Baseline gamma;

    ParamSet(double theta_, double p_, Baseline gamma_)
        : theta(theta_), p(p_), gamma(std::move(gamma_)) {
        detail::require(detail::pos(theta), "ParamSet: theta must be positive");
        detail::require(std::isfinite(p) && p > 0.0 && p < 1.0, "ParamSet: p must be in (0,1)");
    }
    [[nodiscard]] CureRateParams cure() const { return CureRateParams(p, gamma); }
};

struct FhLabel {
    int fh_end = 0;                           // family history at end of follow-up
    std::optional<double> fh_change_age;      // main subject's age when FH flips 0 -> 1

    FhLabel() = default;
    FhLabel(int fh_end_, std::optional<double> change_age) : fh_end(fh_end_), fh_change_age(change_age) {
        if (fh_end != 0 && fh_end != 1) throw std::invalid_argument("FhLabel: fh_end must be 0 or 1");
        if (fh_change_age && fh_end == 0) throw std::invalid_argument("FhLabel: change age requires fh_end = 1");
    }
};

/// Number of observed events in the family.
inline int event_count(const Family& f) {
    int n = 0;
    for (const auto& m : f.members) n += m.delta;
    return n;
}

/// Family-history label for the main subject, computed from relatives only.
/// The change age needs calendar bookkeeping (birth and event years); without
/// it only fh_end is filled. A relative's event before the main subject's
/// birth flips FH at age 0.
inline FhLabel fh_indicator(const Family& f, std::size_t main_index) {
    if (main_index >= f.members.size()) throw std::invalid_argument("fh_indicator: main_index out of range");
    const auto& main = f.members[main_index];
    int fh_end = 0;
    std::optional<double> change_age;
    for (std::size_t j = 0; j < f.members.size(); ++j) {
        if (j == main_index) continue;
        const auto& rel = f.members[j];
        if (rel.delta != 1) continue;
        fh_end = 1;
        if (rel.event_year && main.birth_year) {
            const double age = std::max(0.0, *rel.event_year - *main.birth_year);
            if (!change_age || age < *change_age) change_age = age;
        }
    }
    return FhLabel(fh_end, change_age);
}

inline FhLabel fh_indicator(const Family& f) {
    const auto idx = f.main_index();
    if (!idx) throw std::invalid_argument("fh_indicator: family has no main subject");
    return fh_indicator(f, *idx);
}

} // namespace famcure

#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "edsim/patient.hpp"

namespace edsim {

struct Bound {
    double value;
    bool inclusive;
};

/// lower (<|<=) x (<|<=) upper on a numeric feature; a missing bound is unbounded.
struct NumericCondition {
    Feature feature;
    std::optional<Bound> lower;
    std::optional<Bound> upper;

    bool matches(double x) const {
        if (lower && (lower->inclusive ? x < lower->value : x <= lower->value)) return false;
        if (upper && (upper->inclusive ? x > upper->value : x >= upper->value)) return false;
        return true;
    }
    bool satisfiable() const {
        if (!lower || !upper) return true;
        if (lower->value < upper->value) return true;
        return lower->value == upper->value && lower->inclusive && upper->inclusive;
    }
    /// Tightens this interval by `other` (same feature).
    void intersect(const NumericCondition& other) {
        if (other.lower && (!lower || other.lower->value > lower->value ||
                            (other.lower->value == lower->value && !other.lower->inclusive)))
            lower = other.lower;
        if (other.upper && (!upper || other.upper->value < upper->value ||
                            (other.upper->value == upper->value && !other.upper->inclusive)))
            upper = other.upper;
    }
};

/// Membership of a categorical feature in a set of category indices (bit mask).
struct CategoryCondition {
    Feature feature;
    std::uint32_t mask;

    bool matches(int idx) const { return (mask >> idx) & 1u; }
    bool satisfiable() const { return mask != 0; }
};

using Condition = std::variant<NumericCondition, CategoryCondition>;

inline Feature condition_feature(const Condition& c) {
    return std::visit([](const auto& x) { return x.feature; }, c);
}

inline bool condition_matches(const Condition& c, const PatientRecord& r) {
    if (const auto* n = std::get_if<NumericCondition>(&c)) return n->matches(numeric_value(r, n->feature));
    const auto& k = std::get<CategoryCondition>(c);
    return k.matches(category_index(r, k.feature));
}

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::string to_string(const Condition& c) {
    if (const auto* n = std::get_if<NumericCondition>(&c)) {
        const std::string name(feature_name(n->feature));
        std::string s;
        if (n->lower && n->upper) {
            s = format_number(n->lower->value) + (n->lower->inclusive ? " <= " : " < ") + name +
                (n->upper->inclusive ? " <= " : " < ") + format_number(n->upper->value);
        } else if (n->lower) {
            s = name + (n->lower->inclusive ? " >= " : " > ") + format_number(n->lower->value);
        } else if (n->upper) {
            s = name + (n->upper->inclusive ? " <= " : " < ") + format_number(n->upper->value);
        } else {
            s = name + " any";
        }
        return s;
    }
    const auto& k = std::get<CategoryCondition>(c);
    std::string s = std::string(feature_name(k.feature)) + " in {";
    bool first = true;
    for (int i = 0; i < category_count(k.feature); ++i) {
        if (!k.matches(i)) continue;
        if (!first) s += ',';
        s += category_label(k.feature, i);
        first = false;
    }
    return s + "}";
}

/// Conjunction of conditions, at most one per feature (added conditions are merged).
class Clause {
public:
    Clause() = default;
    Clause(std::initializer_list<Condition> conds) {
        for (const auto& c : conds) add(c);
    }

    void add(const Condition& c) {
        for (auto& existing : conditions_) {
            if (condition_feature(existing) != condition_feature(c)) continue;
            if (auto* n = std::get_if<NumericCondition>(&existing)) {
                n->intersect(std::get<NumericCondition>(c));
            } else {
                std::get<CategoryCondition>(existing).mask &= std::get<CategoryCondition>(c).mask;
            }
            return;
        }
        conditions_.push_back(c);
    }

    bool matches(const PatientRecord& r) const {
        for (const auto& c : conditions_)
            if (!condition_matches(c, r)) return false;
        return true;
    }

    bool consistent() const {
        for (const auto& c : conditions_) {
            const bool ok = std::visit([](const auto& x) { return x.satisfiable(); }, c);
            if (!ok) return false;
        }
        return true;
    }

    const std::vector<Condition>& conditions() const { return conditions_; }

private:
    std::vector<Condition> conditions_;
};

/// Disjunction of clauses: admit iff any clause matches.
struct RuleSet {
    std::vector<Clause> clauses;

    bool admits(const PatientRecord& r) const {
        for (const auto& c : clauses)
            if (c.matches(r)) return true;
        return false;
    }
    /// Index of the first matching clause, if any.
    std::optional<std::size_t> first_match(const PatientRecord& r) const {
        for (std::size_t i = 0; i < clauses.size(); ++i)
            if (clauses[i].matches(r)) return i;
        return std::nullopt;
    }
};

inline void write_ruleset(std::ostream& out, const RuleSet& rules) {
    if (rules.clauses.empty()) {
        out << "(no admit rules: never admit)\n";
        return;
    }
    for (std::size_t i = 0; i < rules.clauses.size(); ++i) {
        out << "rule " << i + 1 << ": admit if\n";
        const auto& conds = rules.clauses[i].conditions();
        if (conds.empty()) out << "  (always)\n";
        for (const auto& c : conds) out << "  " << to_string(c) << '\n';
    }
}

inline std::string to_string(const RuleSet& rules) {
    std::ostringstream ss;
    write_ruleset(ss, rules);
    return ss.str();
}

namespace cond {
inline Condition age_between(double lo, double hi) {
    return NumericCondition{Feature::Age, Bound{lo, false}, Bound{hi, false}};
}
inline Condition age_below(double hi) { return NumericCondition{Feature::Age, std::nullopt, Bound{hi, false}}; }
inline Condition age_above(double lo) { return NumericCondition{Feature::Age, Bound{lo, false}, std::nullopt}; }
inline Condition hour_from(double h) {
    return NumericCondition{Feature::ArrivalHour, Bound{h, true}, std::nullopt};
}
inline Condition days(std::initializer_list<Weekday> ds) {
    std::uint32_t m = 0;
    for (auto d : ds) m |= 1u << static_cast<int>(d);
    return CategoryCondition{Feature::ArrivalDay, m};
}
}  // namespace cond

/// The five admit rules read off the published post-triage tree, encoded
/// literally (open age bounds, inclusive "after" hour bounds, no hour
/// condition on the fourth rule).
inline RuleSet paper_ruleset() {
    using namespace cond;
    using W = Weekday;
    RuleSet rs;
    rs.clauses.push_back(Clause{age_below(0.4)});
    rs.clauses.push_back(Clause{age_between(0.4, 64.5), days({W::Sat}), hour_from(17.5)});
    rs.clauses.push_back(Clause{age_between(3.5, 64.5), days({W::Wed, W::Fri}), hour_from(17.0)});
    rs.clauses.push_back(Clause{age_between(64.5, 74.0), days({W::Sun, W::Wed, W::Thu})});
    rs.clauses.push_back(Clause{age_above(72.5), days({W::Fri, W::Sat, W::Mon, W::Tue}), hour_from(12.5)});
    return rs;
}

}  // namespace edsim

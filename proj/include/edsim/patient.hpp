#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace edsim {

enum class Gender : std::uint8_t { F, M };
enum class Weekday : std::uint8_t { Mon, Tue, Wed, Thu, Fri, Sat, Sun };
enum class Triage : std::uint8_t { L1, L2, L3, L4, L5 };

inline constexpr std::array<std::string_view, 7> kWeekdayNames{"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
inline constexpr std::array<std::string_view, 5> kTriageNames{"L1", "L2", "L3", "L4", "L5"};
inline constexpr std::array<std::string_view, 2> kGenderNames{"F", "M"};

struct PatientRecord {
    double age = 0.0;           // years, [0, 105]
    Gender gender = Gender::F;
    Weekday arrival_day = Weekday::Mon;
    double arrival_hour = 0.0;  // [0, 24)
    Triage triage = Triage::L3;
    bool xray = false;
    bool lab = false;
    bool admitted = false;      // label

    bool operator==(const PatientRecord&) const = default;
};

/// Predictors in the fixed order used for tie-breaking during tree growth.
enum class Feature : std::uint8_t { Age, Gender, ArrivalDay, ArrivalHour, Triage, Xray, Lab };

inline constexpr std::array<Feature, 7> kAllFeatures{Feature::Age,         Feature::Gender, Feature::ArrivalDay,
                                                     Feature::ArrivalHour, Feature::Triage, Feature::Xray,
                                                     Feature::Lab};
/// DT2 feature set: everything known right after triage.
inline constexpr std::array<Feature, 5> kTriageTimeFeatures{Feature::Age, Feature::Gender, Feature::ArrivalDay,
                                                            Feature::ArrivalHour, Feature::Triage};

inline constexpr bool is_numeric(Feature f) { return f == Feature::Age || f == Feature::ArrivalHour; }

inline constexpr std::string_view feature_name(Feature f) {
    switch (f) {
        case Feature::Age: return "age";
        case Feature::Gender: return "gender";
        case Feature::ArrivalDay: return "arrival_day";
        case Feature::ArrivalHour: return "arrival_hour";
        case Feature::Triage: return "triage";
        case Feature::Xray: return "xray";
        case Feature::Lab: return "lab";
    }
    return "?";
}

inline constexpr int category_count(Feature f) {
    switch (f) {
        case Feature::Gender: return 2;
        case Feature::ArrivalDay: return 7;
        case Feature::Triage: return 5;
        case Feature::Xray:
        case Feature::Lab: return 2;
        default: return 0;
    }
}

inline std::string category_label(Feature f, int idx) {
    switch (f) {
        case Feature::Gender: return std::string(kGenderNames.at(idx));
        case Feature::ArrivalDay: return std::string(kWeekdayNames.at(idx));
        case Feature::Triage: return std::string(kTriageNames.at(idx));
        case Feature::Xray:
        case Feature::Lab: return idx ? "1" : "0";
        default: throw std::invalid_argument("category_label: numeric feature");
    }
}

inline double numeric_value(const PatientRecord& r, Feature f) {
    switch (f) {
        case Feature::Age: return r.age;
        case Feature::ArrivalHour: return r.arrival_hour;
        default: throw std::invalid_argument("numeric_value: categorical feature");
    }
}

inline int category_index(const PatientRecord& r, Feature f) {
    switch (f) {
        case Feature::Gender: return static_cast<int>(r.gender);
        case Feature::ArrivalDay: return static_cast<int>(r.arrival_day);
        case Feature::Triage: return static_cast<int>(r.triage);
        case Feature::Xray: return r.xray ? 1 : 0;
        case Feature::Lab: return r.lab ? 1 : 0;
        default: throw std::invalid_argument("category_index: numeric feature");
    }
}

/// Record-set CSV -----------------------------------------------------------

inline constexpr std::string_view kRecordCsvHeader = "age,gender,arrival_day,arrival_hour,triage,xray,lab,admitted";

inline void write_records_csv(std::ostream& out, const std::vector<PatientRecord>& records) {
    out << kRecordCsvHeader << '\n';
    char buf[128];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.4f,%s,%s,%.4f,%s,%d,%d,%d\n", r.age,
                      kGenderNames[static_cast<int>(r.gender)].data(),
                      kWeekdayNames[static_cast<int>(r.arrival_day)].data(),
                      r.arrival_hour < 23.9999 ? r.arrival_hour : 23.9999,  // keep the rounded hour < 24
                      kTriageNames[static_cast<int>(r.triage)].data(), r.xray ? 1 : 0, r.lab ? 1 : 0,
                      r.admitted ? 1 : 0);
        out << buf;
    }
}

namespace detail {
template <std::size_t N>
int lookup(const std::array<std::string_view, N>& names, std::string_view token, std::string_view what,
           std::size_t line) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == token) return static_cast<int>(i);
    throw std::runtime_error("records CSV line " + std::to_string(line) + ": bad " + std::string(what) + " '" +
                             std::string(token) + "'");
}

inline bool parse_flag(std::string_view token, std::string_view what, std::size_t line) {
    if (token == "0") return false;
    if (token == "1") return true;
    throw std::runtime_error("records CSV line " + std::to_string(line) + ": bad " + std::string(what) + " '" +
                             std::string(token) + "'");
}

inline double parse_real(const std::string& token, std::string_view what, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size() || token.empty())
        throw std::runtime_error("records CSV line " + std::to_string(line) + ": bad " + std::string(what) + " '" +
                                 token + "'");
    return v;
}
}  // namespace detail

inline std::vector<PatientRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("records CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordCsvHeader) throw std::runtime_error("records CSV: unexpected header '" + line + "'");

    std::vector<PatientRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 8)
            throw std::runtime_error("records CSV line " + std::to_string(lineno) + ": expected 8 columns");
        PatientRecord r;
        r.age = detail::parse_real(cols[0], "age", lineno);
        r.gender = static_cast<Gender>(detail::lookup(kGenderNames, cols[1], "gender", lineno));
        r.arrival_day = static_cast<Weekday>(detail::lookup(kWeekdayNames, cols[2], "arrival_day", lineno));
        r.arrival_hour = detail::parse_real(cols[3], "arrival_hour", lineno);
        r.triage = static_cast<Triage>(detail::lookup(kTriageNames, cols[4], "triage", lineno));
        r.xray = detail::parse_flag(cols[5], "xray", lineno);
        r.lab = detail::parse_flag(cols[6], "lab", lineno);
        r.admitted = detail::parse_flag(cols[7], "admitted", lineno);
        if (r.age < 0.0 || r.age > 105.0 || r.arrival_hour < 0.0 || r.arrival_hour >= 24.0)
            throw std::runtime_error("records CSV line " + std::to_string(lineno) + ": value out of range");
        out.push_back(r);
    }
    return out;
}

}  // namespace edsim

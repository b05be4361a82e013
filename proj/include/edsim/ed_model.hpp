#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edsim/calendar.hpp"
#include "edsim/distributions.hpp"
#include "edsim/patient.hpp"
#include "edsim/population.hpp"
#include "edsim/resource.hpp"
#include "edsim/rng.hpp"
#include "edsim/rules.hpp"
#include "edsim/stats.hpp"

namespace edsim {

enum class Acuity : std::uint8_t { PICU, ICU, CCU, Standard };
inline constexpr std::array<std::string_view, 4> kAcuityNames{"PICU", "ICU", "CCU", "Standard"};
inline constexpr bool is_critical(Acuity a) { return a != Acuity::Standard; }

enum class Disposition : std::uint8_t { DischargedFromED, AdmittedViaED, DetouredToIU };
inline constexpr std::array<std::string_view, 3> kDispositionNames{"DischargedFromED", "AdmittedViaED",
                                                                   "DetouredToIU"};

/// Which first-aid row standard (non-critical) patients use; None skips first aid.
enum class StandardFirstAid : std::uint8_t { PICU, ICU, CCU, None };
inline constexpr std::array<std::string_view, 4> kStandardFirstAidNames{"PICU", "ICU", "CCU", "none"};

struct Capacities {
    // Found by calibrate_capacities on the default EDConfig.
    int registration_clerks = 1;
    int triage_nurses = 1;
    int doctors = 2;
    int nurses = 5;
    int orderlies = 1;
    int lab_techs = 1;
    int radiology_units = 2;

    static constexpr std::size_t kCount = 7;
    static constexpr std::array<std::string_view, kCount> kNames{
        "registration_clerks", "triage_nurses", "doctors", "nurses", "orderlies", "lab_techs", "radiology_units"};

    int& operator[](std::size_t i) {
        std::array<int*, kCount> p{&registration_clerks, &triage_nurses, &doctors, &nurses,
                                   &orderlies,           &lab_techs,     &radiology_units};
        return *p.at(i);
    }
    int operator[](std::size_t i) const { return const_cast<Capacities&>(*this)[i]; }
    bool operator==(const Capacities&) const = default;
};

/// Service-time and arrival distributions, in minutes.
struct ServiceTimes {
    Exponential interarrival{24.0};  // mean interarrival time
    Uniform registration{3.0, 10.0};
    Triangular triage{5.0, 10.0, 15.0};
    Uniform first_aid_picu{10.0, 45.0};
    Uniform first_aid_icu{20.0, 60.0};
    Uniform first_aid_ccu{30.0, 90.0};
    Triangular lab{15.0, 45.0, 90.0};
    Triangular xray{15.0, 45.0, 90.0};
    Uniform treatment{10.0, 60.0};
};

struct EDConfig {
    Capacities capacities;
    ServiceTimes times;
    // Per-patient test odds inside the ED. The record marginals (52.2% / 54.4%)
    // would put the zero-queue LOS near 145 min, far above the observed ~100.
    double p_lab = 0.10;
    double p_xray = 0.10;
    // PICU ICU CCU Standard
    std::array<double, 4> acuity_mix{0.008, 0.008, 0.008, 0.976};
    StandardFirstAid standard_first_aid = StandardFirstAid::PICU;
    double bed_available_prob = 0.5;
    bool ml_enabled = false;
    RuleSet ruleset = paper_ruleset();
    /// Age/gender marginals and the latent admission mechanism of simulated patients.
    PopulationSpec population;
    double horizon = 30.0 * 1440.0;
    double warmup = 1440.0;

    void validate() const {
        for (std::size_t i = 0; i < Capacities::kCount; ++i)
            if (capacities[i] < 0)
                throw std::invalid_argument("EDConfig: capacity " + std::string(Capacities::kNames[i]) + " < 0");
        auto prob = [](double p, const char* what) {
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("EDConfig: ") + what + " not in [0,1]");
        };
        prob(p_lab, "p_lab");
        prob(p_xray, "p_xray");
        prob(bed_available_prob, "bed_available_prob");
        Categorical({"", "", "", ""}, {acuity_mix.begin(), acuity_mix.end()});
        if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("EDConfig: horizon < 0");
        if (!(warmup >= 0.0) || warmup > horizon)
            throw std::invalid_argument("EDConfig: warmup must satisfy 0 <= warmup <= horizon");
        for (const auto& c : ruleset.clauses)
            if (!c.consistent()) throw std::invalid_argument("EDConfig: ruleset has an unsatisfiable clause");
        population.validate();
    }
};

struct PatientTimes {
    double arrival = 0.0;
    double registration_done = NAN;
    double triage_done = NAN;
    std::optional<double> first_doctor_contact;
    double departure = NAN;
};

struct PatientState {
    EntityId id = 0;
    PatientRecord record;
    Acuity acuity = Acuity::Standard;
    PatientTimes times;
    Disposition disposition = Disposition::DischargedFromED;
    bool departed = false;

    double los() const { return times.departure - times.arrival; }
    std::optional<double> dtdt() const {
        if (!times.first_doctor_contact) return std::nullopt;
        return *times.first_doctor_contact - times.arrival;
    }
};

struct ResourceStats {
    std::string name;
    int capacity = 0;
    double utilization = 0.0;
    double mean_wait = 0.0;  // over post-warm-up patients that seized it
    std::uint64_t seizures = 0;
};

struct ReplicationStats {
    double mean_los = NAN;
    double mean_dtdt = NAN;
    std::uint64_t patient_count = 0;
    std::uint64_t critical_count = 0;  // post-warm-up critical patients who reached a doctor
    std::uint64_t detour_count = 0;
    std::uint64_t unfinished_count = 0;  // still in the ED when the calendar emptied
    std::vector<ResourceStats> resources;

    const ResourceStats* resource(std::string_view name) const {
        for (const auto& r : resources)
            if (r.name == name) return &r;
        return nullptr;
    }
};

/// LOS over all post-warm-up patients (detoured ones measured to the detour
/// instant); DTDT over post-warm-up critical patients that reached a doctor.
inline ReplicationStats collect_kpis(const std::vector<PatientState>& states, double warmup) {
    ReplicationStats s;
    Tally los, dtdt;
    for (const auto& p : states) {
        if (p.times.arrival < warmup) continue;
        if (!p.departed) {
            ++s.unfinished_count;
            continue;
        }
        los.add(p.los());
        if (p.disposition == Disposition::DetouredToIU) ++s.detour_count;
        if (is_critical(p.acuity) && p.dtdt()) dtdt.add(*p.dtdt());
    }
    s.patient_count = los.count();
    s.critical_count = dtdt.count();
    s.mean_los = los.count() ? los.mean() : NAN;
    s.mean_dtdt = dtdt.count() ? dtdt.mean() : NAN;
    return s;
}

enum class DetourDecision { Detour, Continue };

/// Detour iff the rules predict admission and an inpatient bed is free. The
/// bed draw consumes one uniform from `bed_stream` only when the rules match.
inline DetourDecision apply_detour_policy(const PatientRecord& record, const RuleSet& rules, RandomStream& bed_stream,
                                          double bed_prob) {
    if (!rules.admits(record)) return DetourDecision::Continue;
    return bed_stream.uniform01() < bed_prob ? DetourDecision::Detour : DetourDecision::Continue;
}

enum class EdEvent : std::uint8_t {
    Arrival,
    RegistrationStart,
    RegistrationEnd,
    TriageStart,
    TriageEnd,
    FirstAidNurseSeized,
    FirstAidStart,
    FirstAidEnd,
    LabStart,
    LabEnd,
    XrayOrderlySeized,
    XrayStart,
    XrayEnd,
    TreatmentStart,
    TreatmentEnd,
    HorizonEnd,
};

inline std::string to_string(EdEvent e) {
    static constexpr std::array<std::string_view, 16> names{
        "arrival",       "registration_start", "registration_end",    "triage_start",
        "triage_end",    "first_aid_nurse",    "first_aid_start",     "first_aid_end",
        "lab_start",     "lab_end",            "xray_orderly",        "xray_start",
        "xray_end",      "treatment_start",    "treatment_end",       "horizon_end"};
    return std::string(names[static_cast<std::size_t>(e)]);
}

/// Substream labels; each replication gets its own family of these.
enum class StreamConcern : std::uint32_t {
    Arrivals = 0,
    Registration,
    Triage,
    Acuity,
    Record,
    Routing,
    FirstAid,
    Lab,
    Xray,
    Treatment,
    Bed,
    Label,
};

inline RandomStream make_stream(std::uint64_t seed, std::uint64_t replication, StreamConcern c) {
    return RandomStream(seed, RandomStream::family_id(replication, static_cast<std::uint32_t>(c)));
}

struct ReplicationOutput {
    ReplicationStats stats;
    std::vector<PatientState> patients;
};

struct ReplicationOptions {
    std::ostream* trace = nullptr;  // event trace CSV lines
    bool keep_patients = false;
};

namespace detail {

/// Per-patient random inputs, drawn once at arrival so every scenario sees the
/// same values for patient i of replication r (common random numbers).
struct PatientDraws {
    double registration, triage, first_aid, lab, xray, treatment;
    bool needs_lab, needs_xray;
};

class EdWorld {
public:
    EdWorld(const EDConfig& cfg, std::uint64_t seed, std::uint64_t rep, const ReplicationOptions& opts)
        : cfg_(cfg),
          opts_(opts),
          arrivals_(make_stream(seed, rep, StreamConcern::Arrivals)),
          reg_(make_stream(seed, rep, StreamConcern::Registration)),
          triage_(make_stream(seed, rep, StreamConcern::Triage)),
          acuity_(make_stream(seed, rep, StreamConcern::Acuity)),
          record_(make_stream(seed, rep, StreamConcern::Record)),
          routing_(make_stream(seed, rep, StreamConcern::Routing)),
          first_aid_(make_stream(seed, rep, StreamConcern::FirstAid)),
          lab_(make_stream(seed, rep, StreamConcern::Lab)),
          xray_(make_stream(seed, rep, StreamConcern::Xray)),
          treatment_(make_stream(seed, rep, StreamConcern::Treatment)),
          bed_(make_stream(seed, rep, StreamConcern::Bed)),
          label_(make_stream(seed, rep, StreamConcern::Label)),
          acuity_mix_({"PICU", "ICU", "CCU", "Standard"}, {cfg.acuity_mix.begin(), cfg.acuity_mix.end()}),
          sampler_(cfg.population),
          noise_(label_noise_for(cfg.population,
                                 rule_match_probability(cfg.population, cfg.population.latent_rule))) {
        for (std::size_t i = 0; i < Capacities::kCount; ++i) {
            resources_.emplace_back(std::string(Capacities::kNames[i]), cfg.capacities[i], cfg.warmup);
            waits_.emplace_back();
        }
        utilization_.assign(Capacities::kCount, 0.0);
        if (opts.trace) calendar_.attach_trace(opts.trace);
    }

    ReplicationOutput run() {
        if (cfg_.horizon > 0.0) {
            calendar_.schedule(cfg_.horizon, EdEvent::HorizonEnd);
            const double first = cfg_.times.interarrival.quantile(arrivals_.uniform01());
            if (first < cfg_.horizon) calendar_.schedule(first, EdEvent::Arrival);
        }
        while (auto ev = calendar_.pop_next()) dispatch(*ev);
        if (!horizon_seen_) snapshot_utilization();

        ReplicationOutput out;
        out.stats = collect_kpis(patients_, cfg_.warmup);
        for (std::size_t i = 0; i < Capacities::kCount; ++i) {
            ResourceStats rs;
            rs.name = resources_[i].name();
            rs.capacity = resources_[i].capacity();
            rs.utilization = utilization_[i];
            rs.mean_wait = waits_[i].count() ? waits_[i].mean() : 0.0;
            rs.seizures = waits_[i].count();
            out.stats.resources.push_back(rs);
        }
        if (opts_.keep_patients) out.patients = std::move(patients_);
        return out;
    }

private:
    enum Res : std::size_t { Clerk, TriageNurse, Doctor, Nurse, Orderly, LabTech, Radiology };

    struct Patient {
        PatientDraws draws;
        EdEvent pending = EdEvent::Arrival;  // event to fire once the awaited unit is granted
        double wait_start = 0.0;
    };

    double now() const { return calendar_.now(); }
    PatientState& state(EntityId id) { return patients_[static_cast<std::size_t>(id)]; }
    Priority priority(EntityId id) {
        return is_critical(state(id).acuity) ? Priority::Critical : Priority::Standard;
    }

    void seize(EntityId id, Res r, EdEvent on_grant, Priority prio) {
        auto& p = internal_[static_cast<std::size_t>(id)];
        p.pending = on_grant;
        p.wait_start = now();
        if (resources_[r].request(id, prio, now())) {
            record_wait(id, r, 0.0);
            calendar_.schedule(now(), on_grant, id);
        }
    }

    void release(EntityId id, Res r) {
        if (auto next = resources_[r].release(id, now())) {
            const auto& p = internal_[static_cast<std::size_t>(next->entity)];
            record_wait(next->entity, r, now() - p.wait_start);
            calendar_.schedule(now(), p.pending, next->entity);
        }
    }

    void record_wait(EntityId id, Res r, double w) {
        if (state(id).times.arrival >= cfg_.warmup) waits_[r].add(w);
    }

    void depart(EntityId id, Disposition d) {
        auto& s = state(id);
        s.times.departure = now();
        s.disposition = d;
        s.departed = true;
    }

    void snapshot_utilization() {
        const double until = std::max(cfg_.horizon, cfg_.warmup);
        for (std::size_t i = 0; i < Capacities::kCount; ++i) utilization_[i] = resources_[i].utilization(until);
    }

    Weekday weekday_at(double t) const {
        return static_cast<Weekday>(static_cast<long long>(std::floor(t / 1440.0)) % 7);
    }

    void on_arrival() {
        const auto id = static_cast<EntityId>(patients_.size());
        PatientState s;
        s.id = id;
        s.times.arrival = now();

        // Fixed draw order per patient keeps every concern's stream aligned across scenarios.
        s.record = sampler_.draw(record_);
        s.record.arrival_day = weekday_at(now());
        s.record.arrival_hour = std::fmod(now(), 1440.0) / 60.0;
        s.acuity = static_cast<Acuity>(acuity_mix_.index_for(acuity_.uniform01()));
        if (is_critical(s.acuity))
            s.record.triage = Triage::L2;
        else if (s.record.triage < Triage::L3)
            s.record.triage = Triage::L3;

        PatientDraws d{};
        d.registration = cfg_.times.registration.quantile(reg_.uniform01());
        d.triage = cfg_.times.triage.quantile(triage_.uniform01());
        const double u_first_aid = first_aid_.uniform01();
        d.first_aid = first_aid_duration(s.acuity, u_first_aid);
        d.lab = cfg_.times.lab.quantile(lab_.uniform01());
        d.xray = cfg_.times.xray.quantile(xray_.uniform01());
        d.treatment = cfg_.times.treatment.quantile(treatment_.uniform01());
        d.needs_lab = routing_.uniform01() < cfg_.p_lab;
        d.needs_xray = routing_.uniform01() < cfg_.p_xray;
        s.record.lab = d.needs_lab;
        s.record.xray = d.needs_xray;

        const bool latent = cfg_.population.latent_rule.admits(s.record);
        const double u_label = label_.uniform01();
        s.record.admitted = latent ? !(u_label < noise_.flip_positive) : (u_label < noise_.flip_negative);

        patients_.push_back(s);
        internal_.push_back(Patient{d});

        const double next = now() + cfg_.times.interarrival.quantile(arrivals_.uniform01());
        if (next < cfg_.horizon) calendar_.schedule(next, EdEvent::Arrival);

        seize(id, Clerk, EdEvent::RegistrationStart, Priority::Standard);
    }

    double first_aid_duration(Acuity a, double u) const {
        switch (a) {
            case Acuity::PICU: return cfg_.times.first_aid_picu.quantile(u);
            case Acuity::ICU: return cfg_.times.first_aid_icu.quantile(u);
            case Acuity::CCU: return cfg_.times.first_aid_ccu.quantile(u);
            case Acuity::Standard: break;
        }
        switch (cfg_.standard_first_aid) {
            case StandardFirstAid::PICU: return cfg_.times.first_aid_picu.quantile(u);
            case StandardFirstAid::ICU: return cfg_.times.first_aid_icu.quantile(u);
            case StandardFirstAid::CCU: return cfg_.times.first_aid_ccu.quantile(u);
            case StandardFirstAid::None: return 0.0;
        }
        return 0.0;
    }

    bool gets_first_aid(EntityId id) {
        return is_critical(state(id).acuity) || cfg_.standard_first_aid != StandardFirstAid::None;
    }

    void after_first_aid(EntityId id) {
        const auto& d = internal_[static_cast<std::size_t>(id)].draws;
        if (d.needs_lab)
            seize(id, LabTech, EdEvent::LabStart, priority(id));
        else
            after_lab(id);
    }

    void after_lab(EntityId id) {
        const auto& d = internal_[static_cast<std::size_t>(id)].draws;
        if (d.needs_xray)
            seize(id, Orderly, EdEvent::XrayOrderlySeized, priority(id));
        else
            seize(id, Nurse, EdEvent::TreatmentStart, priority(id));
    }

    void dispatch(const Event<EdEvent>& ev) {
        if (ev.kind == EdEvent::Arrival) return on_arrival();
        if (ev.kind == EdEvent::HorizonEnd) {
            horizon_seen_ = true;
            return snapshot_utilization();
        }
        const EntityId id = *ev.entity;
        const auto& d = internal_[static_cast<std::size_t>(id)].draws;
        auto& t = state(id).times;
        switch (ev.kind) {
            case EdEvent::RegistrationStart:
                calendar_.schedule_in(d.registration, EdEvent::RegistrationEnd, id);
                break;
            case EdEvent::RegistrationEnd:
                t.registration_done = now();
                release(id, Clerk);
                seize(id, TriageNurse, EdEvent::TriageStart, Priority::Standard);
                break;
            case EdEvent::TriageStart:
                calendar_.schedule_in(d.triage, EdEvent::TriageEnd, id);
                break;
            case EdEvent::TriageEnd: {
                t.triage_done = now();
                release(id, TriageNurse);
                if (cfg_.ml_enabled) {
                    bed_.seek(static_cast<std::uint64_t>(id));
                    if (apply_detour_policy(state(id).record, cfg_.ruleset, bed_, cfg_.bed_available_prob) ==
                        DetourDecision::Detour) {
                        depart(id, Disposition::DetouredToIU);
                        break;
                    }
                }
                if (gets_first_aid(id))
                    seize(id, Nurse, EdEvent::FirstAidNurseSeized, priority(id));
                else
                    after_first_aid(id);
                break;
            }
            case EdEvent::FirstAidNurseSeized:
                seize(id, Doctor, EdEvent::FirstAidStart, priority(id));
                break;
            case EdEvent::FirstAidStart:
                t.first_doctor_contact = now();
                calendar_.schedule_in(d.first_aid, EdEvent::FirstAidEnd, id);
                break;
            case EdEvent::FirstAidEnd:
                release(id, Doctor);
                release(id, Nurse);
                after_first_aid(id);
                break;
            case EdEvent::LabStart:
                calendar_.schedule_in(d.lab, EdEvent::LabEnd, id);
                break;
            case EdEvent::LabEnd:
                release(id, LabTech);
                after_lab(id);
                break;
            case EdEvent::XrayOrderlySeized:
                seize(id, Radiology, EdEvent::XrayStart, priority(id));
                break;
            case EdEvent::XrayStart:
                calendar_.schedule_in(d.xray, EdEvent::XrayEnd, id);
                break;
            case EdEvent::XrayEnd:
                release(id, Radiology);
                release(id, Orderly);
                seize(id, Nurse, EdEvent::TreatmentStart, priority(id));
                break;
            case EdEvent::TreatmentStart:
                calendar_.schedule_in(d.treatment, EdEvent::TreatmentEnd, id);
                break;
            case EdEvent::TreatmentEnd:
                release(id, Nurse);
                depart(id, state(id).record.admitted ? Disposition::AdmittedViaED : Disposition::DischargedFromED);
                break;
            default:
                throw std::logic_error("EdWorld: unexpected event " + to_string(ev.kind));
        }
    }

    const EDConfig& cfg_;
    ReplicationOptions opts_;
    EventCalendar<EdEvent> calendar_;
    std::vector<Resource> resources_;
    std::vector<Tally> waits_;
    std::vector<double> utilization_;
    bool horizon_seen_ = false;

    RandomStream arrivals_, reg_, triage_, acuity_, record_, routing_, first_aid_, lab_, xray_, treatment_, bed_,
        label_;
    Categorical acuity_mix_;
    RecordSampler sampler_;
    LabelNoise noise_;

    std::vector<PatientState> patients_;
    std::vector<Patient> internal_;
};

}  // namespace detail

/// One replication of the ED process. Arrivals stop at the horizon; patients
/// already inside are served to completion. Utilization covers [warmup, horizon].
inline ReplicationOutput simulate_replication(const EDConfig& config, std::uint64_t seed,
                                              std::uint64_t replication_index, const ReplicationOptions& opts = {}) {
    config.validate();
    return detail::EdWorld(config, seed, replication_index, opts).run();
}

inline ReplicationStats run_replication(const EDConfig& config, std::uint64_t seed, std::uint64_t replication_index) {
    return simulate_replication(config, seed, replication_index).stats;
}

inline constexpr std::string_view kPatientLogHeader = "patient_id,arrival,acuity,disposition,los,dtdt,detoured";

inline void write_patient_log(std::ostream& out, const std::vector<PatientState>& patients) {
    out << kPatientLogHeader << '\n';
    char buf[160];
    for (const auto& p : patients) {
        if (!p.departed) continue;
        std::string dtdt;
        if (auto v = p.dtdt()) {
            char d[32];
            std::snprintf(d, sizeof d, "%.4f", *v);
            dtdt = d;
        }
        std::snprintf(buf, sizeof buf, "%lld,%.4f,%s,%s,%.4f,%s,%d\n", static_cast<long long>(p.id),
                      p.times.arrival, kAcuityNames[static_cast<std::size_t>(p.acuity)].data(),
                      kDispositionNames[static_cast<std::size_t>(p.disposition)].data(), p.los(), dtdt.c_str(),
                      p.disposition == Disposition::DetouredToIU ? 1 : 0);
        out << buf;
    }
}

}  // namespace edsim

#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace edsim {

using EntityId = std::int64_t;

template <class Kind>
struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    Kind kind{};
    std::optional<EntityId> entity;
};

class SchedulingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Future-event list ordered by (time, seq). Simultaneous events pop in
/// insertion order. Scheduling before the current clock is a model bug and throws.
///
/// If a trace stream is attached, every popped event is written as a CSV line
/// `time,seq,kind,entity_id`; `kind` is rendered through an ADL `to_string(Kind)`.
template <class Kind>
class EventCalendar {
public:
    double now() const { return clock_; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    void attach_trace(std::ostream* out) { trace_ = out; }

    std::uint64_t schedule(double time, Kind kind, std::optional<EntityId> entity = std::nullopt) {
        if (!(time >= clock_))
            throw SchedulingError("schedule: event time " + std::to_string(time) + " precedes clock " +
                                  std::to_string(clock_));
        const std::uint64_t seq = next_seq_++;
        heap_.push(Event<Kind>{time, seq, kind, entity});
        return seq;
    }

    std::uint64_t schedule_in(double delay, Kind kind, std::optional<EntityId> entity = std::nullopt) {
        return schedule(clock_ + delay, kind, entity);
    }

    std::optional<Event<Kind>> pop_next() {
        if (heap_.empty()) return std::nullopt;
        Event<Kind> ev = heap_.top();
        heap_.pop();
        clock_ = ev.time;
        if (trace_) write_trace(ev);
        return ev;
    }

private:
    struct Later {
        bool operator()(const Event<Kind>& a, const Event<Kind>& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    void write_trace(const Event<Kind>& ev) {
        using std::to_string;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f,%llu,", ev.time, static_cast<unsigned long long>(ev.seq));
        *trace_ << buf << to_string(ev.kind) << ',';
        if (ev.entity) *trace_ << *ev.entity;
        *trace_ << '\n';
    }

    std::priority_queue<Event<Kind>, std::vector<Event<Kind>>, Later> heap_;
    double clock_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::ostream* trace_ = nullptr;
};

}  // namespace edsim

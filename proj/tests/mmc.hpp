#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edsim/calendar.hpp"
#include "edsim/distributions.hpp"
#include "edsim/resource.hpp"
#include "edsim/rng.hpp"
#include "edsim/stats.hpp"

namespace mmc {

enum class Ev { Arrival, Departure };
inline std::string to_string(Ev e) { return e == Ev::Arrival ? "arrival" : "departure"; }

struct Result {
    double utilization = 0.0;
    double mean_in_system = 0.0;  // time-average L
    double mean_sojourn = 0.0;    // W
    double throughput = 0.0;      // completions per minute
    std::uint64_t customers = 0;
};

/// FIFO M/M/c queue on the kernel until `customers` have departed.
inline Result run(double interarrival_mean, double service_mean, int servers, std::uint64_t customers,
                  std::uint64_t seed) {
    edsim::EventCalendar<Ev> cal;
    edsim::Resource server("server", servers);
    edsim::RandomStream arrivals(seed, 0), services(seed, 1);
    const edsim::Exponential ia{interarrival_mean}, sv{service_mean};
    edsim::TimeWeighted in_system;
    edsim::Tally sojourn;
    std::vector<double> arrived;
    std::uint64_t done = 0, inside = 0;

    cal.schedule(ia.quantile(arrivals.uniform01()), Ev::Arrival);
    while (done < customers) {
        const auto ev = *cal.pop_next();
        if (ev.kind == Ev::Arrival) {
            const auto id = static_cast<edsim::EntityId>(arrived.size());
            arrived.push_back(cal.now());
            in_system.update(cal.now(), static_cast<double>(++inside));
            if (server.request(id, edsim::Priority::Standard, cal.now()))
                cal.schedule_in(sv.quantile(services.uniform01()), Ev::Departure, id);
            cal.schedule_in(ia.quantile(arrivals.uniform01()), Ev::Arrival);
        } else {
            const auto id = *ev.entity;
            sojourn.add(cal.now() - arrived[static_cast<std::size_t>(id)]);
            in_system.update(cal.now(), static_cast<double>(--inside));
            ++done;
            if (auto next = server.release(id, cal.now()))
                cal.schedule_in(sv.quantile(services.uniform01()), Ev::Departure, next->entity);
        }
    }
    Result r;
    r.utilization = server.utilization(cal.now());
    r.mean_in_system = in_system.mean(cal.now());
    r.mean_sojourn = sojourn.mean();
    r.throughput = static_cast<double>(done) / cal.now();
    r.customers = done;
    return r;
}

}  // namespace mmc

#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edsim/calendar.hpp"
#include "edsim/stats.hpp"

namespace edsim {

enum class Priority : int { Standard = 0, Critical = 1 };

/// Counted resource with a priority wait queue: higher priority first, FIFO within a class.
/// Busy-unit level is tracked as a time-weighted statistic for utilization.
class Resource {
public:
    struct Waiting {
        EntityId entity;
        Priority priority;
        double enqueue_time;
    };

    Resource(std::string name, int capacity, double stats_start = 0.0)
        : name_(std::move(name)), capacity_(capacity), busy_(stats_start), queue_len_(stats_start) {
        if (capacity < 0) throw std::invalid_argument("Resource " + name_ + ": negative capacity");
    }

    const std::string& name() const { return name_; }
    int capacity() const { return capacity_; }
    int in_service() const { return static_cast<int>(holders_.size()); }
    std::size_t queue_length() const {
        std::size_t n = 0;
        for (const auto& [p, q] : queue_) n += q.size();
        return n;
    }
    std::uint64_t grants() const { return grants_; }
    std::uint64_t releases() const { return releases_; }
    const std::vector<EntityId>& holders() const { return holders_; }
    bool holds(EntityId id) const { return std::find(holders_.begin(), holders_.end(), id) != holders_.end(); }

    /// Returns true on immediate grant; otherwise the entity is queued.
    bool request(EntityId id, Priority priority, double now) {
        if (in_service() < capacity_) {
            grant(id, now);
            return true;
        }
        queue_[priority].push_back({id, priority, now});
        queue_len_.update(now, static_cast<double>(queue_length()));
        return false;
    }

    /// Frees the unit held by `id`; the head of the highest nonempty class is
    /// granted at the same instant and returned along with its wait time.
    std::optional<Waiting> release(EntityId id, double now) {
        auto it = std::find(holders_.begin(), holders_.end(), id);
        if (it == holders_.end())
            throw std::logic_error("Resource " + name_ + ": release by non-holder " + std::to_string(id));
        holders_.erase(it);
        ++releases_;
        busy_.update(now, static_cast<double>(in_service()));
        for (auto q = queue_.begin(); q != queue_.end(); ++q) {
            if (q->second.empty()) continue;
            if (in_service() >= capacity_) break;
            Waiting next = q->second.front();
            q->second.pop_front();
            queue_len_.update(now, static_cast<double>(queue_length()));
            grant(next.entity, now);
            return next;
        }
        return std::nullopt;
    }

    /// Mean busy fraction over [stats_start, until]; 0 for zero-capacity resources.
    double utilization(double until) const {
        if (capacity_ == 0) return 0.0;
        return busy_.mean(until) / capacity_;
    }
    double mean_queue_length(double until) const { return queue_len_.mean(until); }

private:
    void grant(EntityId id, double now) {
        holders_.push_back(id);
        ++grants_;
        busy_.update(now, static_cast<double>(in_service()));
    }

    std::string name_;
    int capacity_;
    std::vector<EntityId> holders_;
    std::map<Priority, std::deque<Waiting>, std::greater<>> queue_;
    std::uint64_t grants_ = 0;
    std::uint64_t releases_ = 0;
    TimeWeighted busy_;
    TimeWeighted queue_len_;
};

}  // namespace edsim

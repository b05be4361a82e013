#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace edsim {

/// Running count/mean/variance (Welford). Observations stamped before the
/// warm-up boundary are discarded.
class Tally {
public:
    explicit Tally(double warmup = 0.0) : warmup_(warmup) {}

    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    void add(double x, double stamp) {
        if (stamp >= warmup_) add(x);
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return n_ ? mean_ : std::numeric_limits<double>::quiet_NaN(); }
    double variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : std::numeric_limits<double>::quiet_NaN();
    }
    double stddev() const { return std::sqrt(variance()); }

private:
    double warmup_;
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Integral of a piecewise-constant level over time, counted from `start` onward.
class TimeWeighted {
public:
    explicit TimeWeighted(double start = 0.0) : start_(start), last_time_(start) {}

    /// The level changes to `level` at time `t`.
    void update(double t, double level) {
        advance(t);
        level_ = level;
    }

    double integral(double until) const {
        if (until <= last_time_) return area_;
        return area_ + level_ * (until - last_time_);
    }
    /// Time-average of the level over [start, until]; 0 on an empty window.
    double mean(double until) const {
        const double span = until - start_;
        return span > 0.0 ? integral(until) / span : 0.0;
    }
    double level() const { return level_; }

private:
    void advance(double t) {
        if (t > last_time_) {
            area_ += level_ * (t - last_time_);
            last_time_ = t;
        }
    }

    double start_;
    double last_time_;
    double level_ = 0.0;
    double area_ = 0.0;
};

}  // namespace edsim

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "edsim/calendar.hpp"
#include "edsim/rng.hpp"

using namespace edsim;

namespace {
enum class K { A, B };
std::string to_string(K k) { return k == K::A ? "A" : "B"; }
}  // namespace

TEST(Calendar, EarlierTimePopsFirst) {
    EventCalendar<K> cal;
    cal.schedule(5, K::A);
    cal.schedule(3, K::B);
    EXPECT_EQ(cal.pop_next()->time, 3);
    EXPECT_EQ(cal.now(), 3);
    EXPECT_EQ(cal.pop_next()->time, 5);
}

TEST(Calendar, TiesPopInInsertionOrder) {
    EventCalendar<K> cal;
    cal.schedule(7, K::A, 1);
    cal.schedule(7, K::B, 2);
    EXPECT_EQ(*cal.pop_next()->entity, 1);
    EXPECT_EQ(*cal.pop_next()->entity, 2);
}

TEST(Calendar, ScheduleAtClockAccepted) {
    EventCalendar<K> cal;
    cal.schedule(4, K::A);
    cal.pop_next();
    cal.schedule(9, K::B, 9);
    cal.schedule(4, K::A, 4);
    EXPECT_EQ(*cal.pop_next()->entity, 4);
}

TEST(Calendar, EmptyPopsNothing) {
    EventCalendar<K> cal;
    EXPECT_FALSE(cal.pop_next().has_value());
    EXPECT_TRUE(cal.empty());
}

TEST(Calendar, PastSchedulingThrows) {
    EventCalendar<K> cal;
    cal.schedule(3, K::A);
    cal.pop_next();
    EXPECT_THROW(cal.schedule(2, K::A), SchedulingError);
    EXPECT_THROW(cal.schedule_in(-0.5, K::A), SchedulingError);
}

TEST(Calendar, SortOracleOnInterleavedOperations) {
    // Oracle: a plain sorted list of (time, seq) pairs.
    EventCalendar<K> cal;
    RandomStream s(17, 0);
    std::vector<std::pair<double, std::uint64_t>> oracle, got;
    int scheduled = 0;
    while (scheduled < 1000 || !cal.empty()) {
        if (scheduled < 1000 && (cal.empty() || s.uniform01() < 0.6)) {
            // Coarse grid to force ties.
            const double t = cal.now() + std::floor(s.uniform01() * 20.0);
            const auto seq = cal.schedule(t, K::A);
            oracle.emplace_back(t, seq);
            ++scheduled;
        } else {
            auto ev = cal.pop_next();
            got.emplace_back(ev->time, ev->seq);
            std::sort(oracle.begin(), oracle.end());
            ASSERT_EQ(oracle.front(), got.back());
            oracle.erase(oracle.begin());
        }
    }
    EXPECT_EQ(got.size(), 1000u);
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end(), [](auto& a, auto& b) { return a.first < b.first; }));
}

TEST(Calendar, TraceFormat) {
    std::ostringstream trace;
    EventCalendar<K> cal;
    cal.attach_trace(&trace);
    cal.schedule(1.5, K::A, 3);
    cal.schedule(2, K::B);
    while (cal.pop_next()) {
    }
    EXPECT_EQ(trace.str(), "1.500000,0,A,3\n2.000000,1,B,\n");
}

#include "rssitrack/policy.hpp"

#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "rssitrack/angles.hpp"
#include "rssitrack/rng.hpp"

namespace rssitrack {
namespace {

TEST(BaselineDecide, ClosesMeasuredRangeWithinOneSlot) {
    const ControlDecision d = baseline_decide(10.0, 0.4, 3.6, 4.0);
    EXPECT_DOUBLE_EQ(d.rotate_by, 0.4);
    EXPECT_DOUBLE_EQ(d.v_f_next, 2.5);  // 10 m over a 4 s slot
}

TEST(BaselineDecide, SpeedCapsAtMaximum) {
    const ControlDecision d = baseline_decide(40.0, 0.0, 3.6, 1.0);
    EXPECT_DOUBLE_EQ(d.v_f_next, 3.6);
}

TEST(BaselineDecide, WrapsCommandedRotation) {
    const ControlDecision d = baseline_decide(5.0, 3.0 * pi / 2.0, 3.6, 1.0);
    EXPECT_NEAR(d.rotate_by, -pi / 2.0, 1e-12);
}

TEST(BaselineDecide, RejectsBadArguments) {
    EXPECT_THROW(baseline_decide(5.0, 0.0, 3.6, 0.0), std::invalid_argument);
    EXPECT_THROW(baseline_decide(5.0, 0.0, 3.6, -1.0), std::invalid_argument);
    EXPECT_THROW(baseline_decide(-0.1, 0.0, 3.6, 1.0), std::invalid_argument);
}

PolicyConfig escape_config() {
    PolicyConfig cfg;
    cfg.escape_enabled = true;
    cfg.stall_window = 3;
    cfg.stall_eps = 0.2;
    cfg.cooldown = 5;
    return cfg;
}

TEST(StallMonitor, ObstacleStreakOfWindowLengthStalls) {
    StallMonitor m(escape_config());
    m.observe(true, 10.0);
    m.observe(true, 9.0);
    EXPECT_FALSE(m.stalled(0.2));
    m.observe(true, 8.0);
    EXPECT_TRUE(m.stalled(0.2));
    EXPECT_EQ(m.obstacle_streak(), 3);
}

TEST(StallMonitor, MissedBumperResetsStreak) {
    StallMonitor m(escape_config());
    m.observe(true, 10.0);
    m.observe(true, 9.0);
    m.observe(false, 8.0);
    EXPECT_EQ(m.obstacle_streak(), 0);
    EXPECT_FALSE(m.stalled(0.2));
}

TEST(StallMonitor, FlatRangeWindowStalls) {
    StallMonitor m(escape_config());
    m.observe(false, 7.90);
    m.observe(false, 8.05);
    m.observe(false, 7.95);
    EXPECT_TRUE(m.stalled(0.2));   // spread 0.15 < eps
    EXPECT_FALSE(m.stalled(0.1));  // tighter eps sees motion
}

TEST(StallMonitor, PartialWindowNeverStalls) {
    StallMonitor m(escape_config());
    m.observe(false, 8.0);
    m.observe(false, 8.0);
    EXPECT_FALSE(m.stalled(1000.0));
}

TEST(StallMonitor, RingOnlyKeepsLastWindow) {
    StallMonitor m(escape_config());
    m.observe(false, 100.0);  // falls out of the window below
    m.observe(false, 8.0);
    m.observe(false, 8.1);
    m.observe(false, 8.05);
    EXPECT_TRUE(m.stalled(0.2));
}

TEST(StallMonitor, CooldownStartsExpiredAndRecovers) {
    StallMonitor m(escape_config());
    EXPECT_TRUE(m.cooldown_expired());
    m.mark_fired();
    EXPECT_FALSE(m.cooldown_expired());
    for (int i = 0; i < 4; ++i) {
        m.observe(false, 8.0);
        EXPECT_FALSE(m.cooldown_expired()) << "slot " << i;
    }
    m.observe(false, 8.0);
    EXPECT_TRUE(m.cooldown_expired());
}

TEST(CheckMultipathEscape, FiresOnStallThenHonorsCooldown) {
    const PolicyConfig cfg = escape_config();
    StallMonitor m(cfg);
    auto rng = make_stream(7, "policy");
    EXPECT_FALSE(check_multipath_escape(m, true, 8.0, cfg, rng).has_value());
    EXPECT_FALSE(check_multipath_escape(m, true, 8.0, cfg, rng).has_value());
    const auto fired = check_multipath_escape(m, true, 8.0, cfg, rng);
    ASSERT_TRUE(fired.has_value());
    EXPECT_GE(*fired, -pi);
    EXPECT_LT(*fired, pi);
    // Still stalled, but the cooldown suppresses refiring for 5 slots.
    for (int i = 0; i < 4; ++i) {
        EXPECT_FALSE(check_multipath_escape(m, true, 8.0, cfg, rng).has_value()) << "slot " << i;
    }
    EXPECT_TRUE(check_multipath_escape(m, true, 8.0, cfg, rng).has_value());
}

TEST(CheckMultipathEscape, NoStallMeansNoOverride) {
    const PolicyConfig cfg = escape_config();
    StallMonitor m(cfg);
    auto rng = make_stream(7, "policy");
    double d = 20.0;
    for (int i = 0; i < 50; ++i) {
        EXPECT_FALSE(check_multipath_escape(m, false, d, cfg, rng).has_value());
        d -= 0.3;  // steady approach keeps the range spread above eps
    }
}

TEST(CheckMultipathEscape, HeadingsCoverTheFullCircle) {
    const PolicyConfig cfg = escape_config();
    auto rng = make_stream(11, "policy");
    int lo = 0;
    int hi = 0;
    for (int i = 0; i < 400; ++i) {
        StallMonitor m(cfg);
        m.observe(false, 8.0);
        m.observe(false, 8.0);
        const auto fired = check_multipath_escape(m, false, 8.0, cfg, rng);
        ASSERT_TRUE(fired.has_value());
        ASSERT_GE(*fired, -pi);
        ASSERT_LT(*fired, pi);
        if (*fired < 0.0) {
            ++lo;
        } else {
            ++hi;
        }
    }
    // Uniform draws split the circle roughly in half.
    EXPECT_GT(lo, 140);
    EXPECT_GT(hi, 140);
}

}  // namespace
}  // namespace rssitrack

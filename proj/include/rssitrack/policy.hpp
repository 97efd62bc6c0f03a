#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <stdexcept>

#include "rssitrack/angles.hpp"
#include "rssitrack/estimation.hpp"
#include "rssitrack/lqg.hpp"

namespace rssitrack {

struct PolicyConfig {
    Strategy strategy = Strategy::pragmatic;
    AoaMethod aoa_method = AoaMethod::weighted;
    double v_f_max = 3.6;

    // Randomized-escape module for cluttered environments. Off by default:
    // its flat-range trigger would otherwise fire on a converged tracker.
    bool escape_enabled = false;
    int stall_window = 3;
    double stall_eps = 0.2;     // meters of range-estimate spread
    int cooldown = 5;           // slots between randomized overrides
};

// Memoryless reference policy: rotate straight onto the measured bearing and
// close the measured range within one slot, speed-capped.
inline ControlDecision baseline_decide(double d_m, double theta_basic, double v_f_max, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("baseline_decide: dt must be positive");
    if (!(d_m >= 0.0)) throw std::invalid_argument("baseline_decide: negative distance");
    ControlDecision decision;
    decision.rotate_by = wrap_angle(theta_basic);
    decision.v_f_next = std::min(v_f_max, d_m / dt);
    return decision;
}

// Detects a stuck follower: either the bumper fires for a run of slots, or
// the range estimate goes flat while the controller keeps commanding motion.
class StallMonitor {
  public:
    explicit StallMonitor(const PolicyConfig& cfg)
        : window_(std::max(1, cfg.stall_window)), cooldown_(std::max(1, cfg.cooldown)),
          slots_since_fire_(cooldown_) {}

    void observe(bool obstacle_hit, double d_e) {
        obstacle_streak_ = obstacle_hit ? obstacle_streak_ + 1 : 0;
        ring_.push_back(d_e);
        if (static_cast<int>(ring_.size()) > window_) ring_.pop_front();
        if (slots_since_fire_ < cooldown_) ++slots_since_fire_;
    }

    bool stalled(double stall_eps) const {
        if (obstacle_streak_ >= window_) return true;
        if (static_cast<int>(ring_.size()) < window_) return false;
        const auto [lo, hi] = std::minmax_element(ring_.begin(), ring_.end());
        return (*hi - *lo) < stall_eps;
    }

    bool cooldown_expired() const { return slots_since_fire_ >= cooldown_; }

    void mark_fired() { slots_since_fire_ = 0; }

    int obstacle_streak() const { return obstacle_streak_; }

  private:
    int window_;
    int cooldown_;
    int slots_since_fire_;
    int obstacle_streak_ = 0;
    std::deque<double> ring_;
};

// Feeds the monitor one slot and, when a stall coincides with an expired
// cooldown, emits a uniformly random heading to hold for exactly one slot.
inline std::optional<double> check_multipath_escape(StallMonitor& monitor, bool obstacle_hit, double d_e,
                                                    const PolicyConfig& cfg, std::mt19937_64& rng) {
    monitor.observe(obstacle_hit, d_e);
    if (!monitor.stalled(cfg.stall_eps) || !monitor.cooldown_expired()) {
        return std::nullopt;
    }
    monitor.mark_fired();
    std::uniform_real_distribution<double> heading(-pi, pi);
    return heading(rng);
}

}  // namespace rssitrack

#pragma once

#include <cmath>
#include <stdexcept>

#include "rssitrack/angles.hpp"

namespace rssitrack {

// Relative-speed observation fed to the controller, together with the leader
// speed the follower should assume for its next move.
struct SpeedObservation {
    double v_rel_m = 0.0;        // observed closing speed along the boresight
    double v_leader_next = 0.0;  // leader speed assumed for the next slot
};

namespace detail {
inline void require_speed_args(double d_m, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("speed observation: dt must be positive");
    if (!(d_m >= 0.0) || !std::isfinite(d_m)) {
        throw std::invalid_argument("speed observation: invalid measured distance");
    }
}
}  // namespace detail

// Optimistic strategy: treat the leader as momentarily static. The measured
// range shift against the predicted range corrects the relative speed, and
// the next-slot leader speed is pinned to zero.
//
// `pred_d_e` / `pred_v_rel_e` are the controller's predicted (prior) state
// for the current slot, which already accounts for the follower's own motion.
inline SpeedObservation optimistic_observe(double d_m, double theta_m, double pred_d_e,
                                           double pred_v_rel_e, double dt) {
    detail::require_speed_args(d_m, dt);
    const double v_rel = pred_v_rel_e - (d_m - pred_d_e * std::cos(theta_m)) / dt;
    return SpeedObservation{v_rel, 0.0};
}

// Pragmatic strategy: reconstruct the leader's displacement over the slot,
// project it on the new boresight, and assume the leader keeps that speed.
// `ref_d_e` is where the leader would sit had it stayed put: the previous
// range estimate dead-reckoned by the follower's own displacement, so the
// (v1, v2) triangle isolates the leader's motion. `v_f_now` is the follower
// speed held during the elapsed slot.
inline SpeedObservation pragmatic_observe(double d_m, double theta_m, double ref_d_e,
                                          double v_f_now, double dt) {
    detail::require_speed_args(d_m, dt);
    const double v1 = d_m * std::cos(theta_m) - ref_d_e;
    const double v2 = d_m * std::sin(theta_m);
    const double v_l = std::hypot(v1, v2) / dt;
    const double theta_v = std::atan2(v2, v1) - theta_m;
    const double v_l_m = v_l * std::cos(theta_v);
    return SpeedObservation{v_f_now - v_l_m, v_l_m};
}

}  // namespace rssitrack

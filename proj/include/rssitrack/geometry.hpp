#pragma once

#include <cmath>
#include <stdexcept>

#include "rssitrack/angles.hpp"

namespace rssitrack {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Pose of a body in the world frame; heading in radians, [-pi, pi).
struct GlobalPose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
};

// Position of a target expressed in a body frame (x forward, y left).
struct RelativePosition {
    double x = 0.0;
    double y = 0.0;

    double distance() const { return std::hypot(x, y); }
    double bearing() const { return std::atan2(y, x); }
};

namespace detail {
inline void require_finite_pose(const GlobalPose& pose) {
    if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.heading)) {
        throw std::invalid_argument("geometry: non-finite pose");
    }
}
}  // namespace detail

// Rigid-body transform of a local offset into world coordinates.
inline Point to_global(const RelativePosition& rel, const GlobalPose& frame) {
    detail::require_finite_pose(frame);
    if (!std::isfinite(rel.x) || !std::isfinite(rel.y)) {
        throw std::invalid_argument("to_global: non-finite offset");
    }
    const double c = std::cos(frame.heading);
    const double s = std::sin(frame.heading);
    return Point{frame.x + c * rel.x - s * rel.y, frame.y + s * rel.x + c * rel.y};
}

// Inverse transform: world point into the body frame of `frame`.
inline RelativePosition to_local(const Point& p, const GlobalPose& frame) {
    detail::require_finite_pose(frame);
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("to_local: non-finite point");
    }
    const double c = std::cos(frame.heading);
    const double s = std::sin(frame.heading);
    const double dx = p.x - frame.x;
    const double dy = p.y - frame.y;
    return RelativePosition{c * dx + s * dy, -s * dx + c * dy};
}

}  // namespace rssitrack

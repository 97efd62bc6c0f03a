#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rssitrack {

// Antenna sweep discretization: 200 orientations, 1.8 degrees apart,
// covering [-180, 178.2] degrees.
inline constexpr int kSweepBins = 200;
inline constexpr double kBinWidthDeg = 1.8;

inline constexpr double pi = std::numbers::pi_v<double>;
inline constexpr double two_pi = 2.0 * pi;

inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

// Wraps an angle to [-pi, pi).
inline double wrap_angle(double rad) {
    if (!std::isfinite(rad)) {
        throw std::invalid_argument("wrap_angle: non-finite angle");
    }
    double wrapped = rad - two_pi * std::floor((rad + pi) / two_pi);
    // Guard the half-open interval against floating rounding at the seam.
    if (wrapped >= pi) wrapped = -pi;
    if (wrapped < -pi) wrapped = -pi;
    return wrapped;
}

inline double bin_angle_deg(int bin) { return -180.0 + kBinWidthDeg * bin; }

inline double bin_angle_rad(int bin) { return deg_to_rad(bin_angle_deg(bin)); }

// Nearest sweep bin to an angle, wrap-aware (+180 deg maps to bin 0).
inline int nearest_bin(double rad) {
    const double deg = rad_to_deg(wrap_angle(rad));
    int bin = static_cast<int>(std::lround((deg + 180.0) / kBinWidthDeg));
    bin %= kSweepBins;
    if (bin < 0) bin += kSweepBins;
    return bin;
}

// Circular bin arithmetic.
inline int wrap_bin(int bin) {
    int b = bin % kSweepBins;
    if (b < 0) b += kSweepBins;
    return b;
}

// Snaps an angle to the sweep grid.
inline double snap_to_grid(double rad) { return bin_angle_rad(nearest_bin(rad)); }

}  // namespace rssitrack

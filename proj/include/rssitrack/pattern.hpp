#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rssitrack/angles.hpp"

namespace rssitrack {

// Receive gain of the directional antenna, one sample per sweep bin,
// normalized so the strongest bin sits at 0 dB.
struct AntennaPattern {
    std::array<double, kSweepBins> gain_db{};

    double gain(int bin) const { return gain_db[wrap_bin(bin)]; }

    // Gain toward an arbitrary offset, read from the nearest bin.
    double gain_at(double offset_rad) const { return gain_db[nearest_bin(offset_rad)]; }

    static AntennaPattern from_gains(const std::array<double, kSweepBins>& raw) {
        AntennaPattern p;
        const double peak = *std::max_element(raw.begin(), raw.end());
        if (!std::isfinite(peak)) {
            throw std::invalid_argument("AntennaPattern: non-finite gain");
        }
        for (int i = 0; i < kSweepBins; ++i) {
            if (!std::isfinite(raw[i])) {
                throw std::invalid_argument("AntennaPattern: non-finite gain");
            }
            p.gain_db[i] = raw[i] - peak;
        }
        return p;
    }
};

// Synthetic stand-in for a measured pattern: raised-cosine main lobe with a
// 70 degree half-power beamwidth and a -15 dB floor everywhere else.
inline AntennaPattern make_default_pattern() {
    constexpr double kFloorDb = -15.0;
    constexpr double kHalfPowerHalfWidthDeg = 35.0;
    // Raised cosine (1 + cos(w*theta))/2 crosses one half exactly where
    // w*theta = 90 deg, which calibrates w to the target beamwidth.
    const double w = (pi / 2.0) / deg_to_rad(kHalfPowerHalfWidthDeg);
    std::array<double, kSweepBins> g{};
    // Evaluate one half-lobe and mirror it so the table is symmetric in the
    // exact floating-point sense, not just mathematically.
    for (int k = 0; k <= kSweepBins / 2; ++k) {
        const double theta = deg_to_rad(kBinWidthDeg * k);
        const double arg = std::min(w * theta, pi);
        const double lin = (1.0 + std::cos(arg)) / 2.0;
        const double db = lin > 0.0 ? 10.0 * std::log10(lin) : kFloorDb;
        const double val = std::max(kFloorDb, db);
        g[kSweepBins / 2 - k] = val;
        if (kSweepBins / 2 + k < kSweepBins) g[kSweepBins / 2 + k] = val;
    }
    return AntennaPattern::from_gains(g);
}

inline double mean_gain_db(const AntennaPattern& p) {
    return std::accumulate(p.gain_db.begin(), p.gain_db.end(), 0.0) / kSweepBins;
}

// Width of the main lobe at -3 dB, in degrees (bin-quantized).
inline double half_power_beamwidth_deg(const AntennaPattern& p) {
    int count = 0;
    for (double g : p.gain_db) {
        if (g >= -3.0) ++count;
    }
    return count * kBinWidthDeg;
}

// File format: one "angle_deg,gain_db" line per bin, 200 lines, optional
// header. Gains are re-normalized to a 0 dB peak on load.
inline void save_pattern_csv(const AntennaPattern& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_pattern_csv: cannot open " + path.string());
    out << std::setprecision(17) << "angle_deg,gain_db\n";
    for (int i = 0; i < kSweepBins; ++i) {
        out << bin_angle_deg(i) << ',' << p.gain_db[i] << '\n';
    }
    if (!out) throw std::runtime_error("save_pattern_csv: write failed: " + path.string());
}

inline AntennaPattern load_pattern_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pattern_csv: cannot open " + path.string());
    std::array<double, kSweepBins> g{};
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
            throw std::runtime_error("load_pattern_csv: malformed line: " + line);
        }
        double angle = 0.0;
        try {
            angle = std::stod(a);
        } catch (const std::exception&) {
            if (row == 0) continue;  // header
            throw std::runtime_error("load_pattern_csv: malformed line: " + line);
        }
        if (row >= kSweepBins) throw std::runtime_error("load_pattern_csv: more than 200 bins");
        if (std::abs(angle - bin_angle_deg(row)) > 1e-6) {
            throw std::runtime_error("load_pattern_csv: bin angle off-grid: " + line);
        }
        g[row] = std::stod(b);
        ++row;
    }
    if (row != kSweepBins) {
        throw std::runtime_error("load_pattern_csv: expected 200 bins, got " + std::to_string(row));
    }
    return AntennaPattern::from_gains(g);
}

}  // namespace rssitrack

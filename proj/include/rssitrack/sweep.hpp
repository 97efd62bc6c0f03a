#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rssitrack/angles.hpp"

namespace rssitrack {

// One 360 degree receive sweep: RSSI per antenna orientation bin, with a
// presence mask for beacons that were never heard at that orientation.
struct RssiSweep {
    std::array<double, kSweepBins> values_dbm{};
    std::array<bool, kSweepBins> present{};

    RssiSweep() {
        values_dbm.fill(std::numeric_limits<double>::quiet_NaN());
        present.fill(false);
    }

    int count_present() const {
        int n = 0;
        for (bool p : present) n += p;
        return n;
    }

    double mean_present_dbm() const {
        double sum = 0.0;
        int n = 0;
        for (int i = 0; i < kSweepBins; ++i) {
            if (present[i]) {
                sum += values_dbm[i];
                ++n;
            }
        }
        if (n == 0) throw std::runtime_error("RssiSweep: no present bins");
        return sum / n;
    }
};

// File format: one "bin_angle_deg,rssi_dbm" line per bin with NA for missing
// bins, 200 lines, optional header.
inline void save_sweep_csv(const RssiSweep& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_sweep_csv: cannot open " + path.string());
    out << std::setprecision(17) << "bin_angle_deg,rssi_dbm\n";
    for (int i = 0; i < kSweepBins; ++i) {
        out << bin_angle_deg(i) << ',';
        if (s.present[i]) {
            out << s.values_dbm[i];
        } else {
            out << "NA";
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_sweep_csv: write failed: " + path.string());
}

inline RssiSweep load_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_sweep_csv: cannot open " + path.string());
    RssiSweep s;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
            throw std::runtime_error("load_sweep_csv: malformed line: " + line);
        }
        double angle = 0.0;
        try {
            angle = std::stod(a);
        } catch (const std::exception&) {
            if (row == 0) continue;  // header
            throw std::runtime_error("load_sweep_csv: malformed line: " + line);
        }
        if (row >= kSweepBins) throw std::runtime_error("load_sweep_csv: more than 200 bins");
        if (std::abs(angle - bin_angle_deg(row)) > 1e-6) {
            throw std::runtime_error("load_sweep_csv: bin angle off-grid: " + line);
        }
        if (b == "NA") {
            s.present[row] = false;
        } else {
            s.values_dbm[row] = std::stod(b);
            s.present[row] = true;
        }
        ++row;
    }
    if (row != kSweepBins) {
        throw std::runtime_error("load_sweep_csv: expected 200 bins, got " + std::to_string(row));
    }
    return s;
}

}  // namespace rssitrack

#include "rssitrack/pattern.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "rssitrack/angles.hpp"

namespace rssitrack {
namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

TEST(DefaultPattern, PeaksAtBoresightWithZeroDb) {
    const AntennaPattern p = make_default_pattern();
    EXPECT_DOUBLE_EQ(p.gain_db[100], 0.0);
    for (int i = 0; i < kSweepBins; ++i) {
        EXPECT_LE(p.gain_db[i], 0.0) << "bin " << i;
        EXPECT_GE(p.gain_db[i], -15.0) << "bin " << i;
    }
}

TEST(DefaultPattern, SymmetricAroundBoresight) {
    const AntennaPattern p = make_default_pattern();
    for (int k = 1; k < 100; ++k) {
        EXPECT_DOUBLE_EQ(p.gain_db[100 + k], p.gain_db[100 - k]) << "offset " << k;
    }
}

TEST(DefaultPattern, MonotoneAwayFromBoresight) {
    const AntennaPattern p = make_default_pattern();
    for (int k = 100; k < kSweepBins - 1; ++k) {
        EXPECT_LE(p.gain_db[k + 1], p.gain_db[k] + 1e-12) << "bin " << k;
    }
}

TEST(DefaultPattern, HalfPowerBeamwidthNearSeventyDegrees) {
    const AntennaPattern p = make_default_pattern();
    const double hpbw = half_power_beamwidth_deg(p);
    EXPECT_NEAR(hpbw, 70.0, kBinWidthDeg);
    EXPECT_DOUBLE_EQ(hpbw, 70.2);  // bin-quantized value for the raised cosine
}

TEST(AntennaPattern, FromGainsNormalizesPeakToZero) {
    std::array<double, kSweepBins> raw{};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-60.0, -20.0);
    for (auto& g : raw) g = u(rng);
    raw[37] = -10.0;  // forced peak
    const AntennaPattern p = AntennaPattern::from_gains(raw);
    EXPECT_DOUBLE_EQ(p.gain_db[37], 0.0);
    EXPECT_DOUBLE_EQ(*std::max_element(p.gain_db.begin(), p.gain_db.end()), 0.0);
    EXPECT_DOUBLE_EQ(p.gain_db[0], raw[0] + 10.0);
}

TEST(AntennaPattern, FromGainsRejectsNonFinite) {
    std::array<double, kSweepBins> raw{};
    raw[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(AntennaPattern::from_gains(raw), std::invalid_argument);
    raw[3] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(AntennaPattern::from_gains(raw), std::invalid_argument);
}

TEST(AntennaPattern, GainIndexWraps) {
    const AntennaPattern p = make_default_pattern();
    EXPECT_DOUBLE_EQ(p.gain(-1), p.gain_db[199]);
    EXPECT_DOUBLE_EQ(p.gain(200), p.gain_db[0]);
    EXPECT_DOUBLE_EQ(p.gain(399), p.gain_db[199]);
}

TEST(AntennaPattern, GainAtReadsNearestBin) {
    const AntennaPattern p = make_default_pattern();
    EXPECT_DOUBLE_EQ(p.gain_at(0.0), p.gain_db[100]);
    EXPECT_DOUBLE_EQ(p.gain_at(pi), p.gain_db[0]);  // +180 wraps to the -180 bin
    for (int k = 0; k < kSweepBins; ++k) {
        EXPECT_DOUBLE_EQ(p.gain_at(bin_angle_rad(k)), p.gain_db[k]);
    }
}

TEST(AntennaPattern, MeanGainMatchesDirectAverage) {
    const AntennaPattern p = make_default_pattern();
    double sum = 0.0;
    for (double g : p.gain_db) sum += g;
    EXPECT_NEAR(mean_gain_db(p), sum / 200.0, 1e-12);
    EXPECT_LT(mean_gain_db(p), 0.0);
}

TEST(PatternCsv, RoundTripsLosslessly) {
    const AntennaPattern p = make_default_pattern();
    const auto path = temp_file("rssitrack_pattern_rt.csv");
    save_pattern_csv(p, path);
    const AntennaPattern q = load_pattern_csv(path);
    for (int i = 0; i < kSweepBins; ++i) {
        EXPECT_DOUBLE_EQ(q.gain_db[i], p.gain_db[i]) << "bin " << i;
    }
    std::filesystem::remove(path);
}

TEST(PatternCsv, LoadRenormalizesShiftedGains) {
    const auto path = temp_file("rssitrack_pattern_shift.csv");
    {
        std::ofstream out(path);
        out << "angle_deg,gain_db\n";
        for (int i = 0; i < kSweepBins; ++i) {
            out << bin_angle_deg(i) << ',' << (i == 100 ? -20.0 : -35.0) << '\n';
        }
    }
    const AntennaPattern p = load_pattern_csv(path);
    EXPECT_DOUBLE_EQ(p.gain_db[100], 0.0);
    EXPECT_DOUBLE_EQ(p.gain_db[0], -15.0);
    std::filesystem::remove(path);
}

TEST(PatternCsv, RejectsMalformedInput) {
    const auto path = temp_file("rssitrack_pattern_bad.csv");
    {
        std::ofstream out(path);
        out << "angle_deg,gain_db\n-180,-3\n-170,-4\n";  // off-grid second row
    }
    EXPECT_THROW(load_pattern_csv(path), std::runtime_error);
    {
        std::ofstream out(path);
        out << "-180,-3\n";  // truncated file
    }
    EXPECT_THROW(load_pattern_csv(path), std::runtime_error);
    EXPECT_THROW(load_pattern_csv(temp_file("rssitrack_no_such_file.csv")), std::runtime_error);
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace rssitrack

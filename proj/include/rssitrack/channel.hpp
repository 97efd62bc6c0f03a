#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rssitrack/angles.hpp"
#include "rssitrack/geometry.hpp"
#include "rssitrack/pattern.hpp"
#include "rssitrack/sweep.hpp"

namespace rssitrack {

// Log-distance path loss with two-scale Gaussian (dB) shadowing: a slow
// component held for a whole antenna rotation (large-scale state of the
// surroundings) plus fast per-bin jitter. Averaging bins cancels the fast
// part but never the slow part, which is what floors range accuracy.
struct ChannelParams {
    double p_t_dbm = 7.0;          // transmit power
    double l_ref_db = 40.0;        // loss at the reference distance
    double d_ref = 1.0;            // reference distance, meters
    double eta = 2.5;              // path-loss exponent
    double shadow_sigma_db = 2.0;  // fast (per-bin) shadowing
    double slow_sigma_db = 2.0;    // slow (per-sweep) shadowing
    // Calibration constant the distance estimator inverts against. For a
    // directional receiver this is the rotation-averaged received power at
    // d_ref; see calibrated_reference_power().
    double p_ref_dbm = -33.0;
};

// Received power at d_ref averaged over a full antenna rotation.
inline double calibrated_reference_power(const ChannelParams& params, const AntennaPattern& pattern) {
    return params.p_t_dbm - params.l_ref_db + mean_gain_db(pattern);
}

// Received power for one beacon: transmit power, plus the antenna gain at the
// given boresight offset, minus log-distance loss, plus a shadowing term the
// caller supplies (so deterministic evaluations stay deterministic).
inline double received_power(double distance_m, double antenna_offset_rad, const ChannelParams& params,
                             const AntennaPattern& pattern, double shadow_db = 0.0) {
    if (!(distance_m > 0.0) || !std::isfinite(distance_m)) {
        throw std::invalid_argument("received_power: distance must be positive");
    }
    if (!std::isfinite(shadow_db)) {
        throw std::invalid_argument("received_power: non-finite shadowing");
    }
    return params.p_t_dbm + pattern.gain_at(antenna_offset_rad) - params.l_ref_db -
           10.0 * params.eta * std::log10(distance_m / params.d_ref) + shadow_db;
}

// Beacon loss model: independent per-bin drops plus clustered outages
// (Poisson-many gap starts, geometric gap widths).
struct SparsityModel {
    double drop_prob = 0.0;
    double gap_rate = 0.0;             // expected gaps per revolution
    double mean_gap_width_deg = 30.0;  // expected width of one gap

    std::array<bool, kSweepBins> presence_mask(std::mt19937_64& rng) const {
        if (drop_prob < 0.0 || drop_prob > 1.0) {
            throw std::invalid_argument("SparsityModel: drop_prob outside [0, 1]");
        }
        std::array<bool, kSweepBins> mask{};
        mask.fill(true);
        if (drop_prob > 0.0) {
            std::bernoulli_distribution drop(drop_prob);
            for (int i = 0; i < kSweepBins; ++i) {
                if (drop(rng)) mask[i] = false;
            }
        }
        if (gap_rate > 0.0) {
            std::poisson_distribution<int> n_gaps(gap_rate);
            const double mean_width_bins = std::max(1.0, mean_gap_width_deg / kBinWidthDeg);
            std::geometric_distribution<int> extra(1.0 / mean_width_bins);
            std::uniform_int_distribution<int> start(0, kSweepBins - 1);
            const int gaps = n_gaps(rng);
            for (int g = 0; g < gaps; ++g) {
                const int s = start(rng);
                const int width = 1 + extra(rng);
                for (int k = 0; k < std::min(width, kSweepBins); ++k) {
                    mask[wrap_bin(s + k)] = false;
                }
            }
        }
        return mask;
    }
};

// One propagation path as seen by the receive antenna. `length_m` is the
// effective path length for the loss term; NaN means "use the true range".
struct PathComponent {
    double gain_db = 0.0;    // extra attenuation relative to the direct path
    double angle_rad = 0.0;  // arrival bearing in the receiver body frame
    double length_m = std::numeric_limits<double>::quiet_NaN();
};

// Full sweep over a set of paths: per bin, path contributions add in linear
// milliwatts, then one shadowing draw perturbs the decibel sum.
inline RssiSweep sweep_from_paths(double true_distance_m, std::span<const PathComponent> paths,
                                  const ChannelParams& params, const AntennaPattern& pattern,
                                  const SparsityModel& sparsity, std::mt19937_64& rng) {
    if (paths.empty()) throw std::invalid_argument("sweep_from_paths: no paths");
    std::normal_distribution<double> n01(0.0, 1.0);
    const double slow_db = params.slow_sigma_db > 0.0 ? params.slow_sigma_db * n01(rng) : 0.0;
    const auto mask = sparsity.presence_mask(rng);
    RssiSweep sweep;
    for (int i = 0; i < kSweepBins; ++i) {
        if (!mask[i]) continue;
        double mw = 0.0;
        for (const PathComponent& p : paths) {
            const double len = std::isnan(p.length_m) ? true_distance_m : p.length_m;
            const double dbm =
                p.gain_db + received_power(len, bin_angle_rad(i) - p.angle_rad, params, pattern, 0.0);
            mw += std::pow(10.0, dbm / 10.0);
        }
        const double fast = params.shadow_sigma_db > 0.0 ? params.shadow_sigma_db * n01(rng) : 0.0;
        sweep.values_dbm[i] = 10.0 * std::log10(mw) + slow_db + fast;
        sweep.present[i] = true;
    }
    return sweep;
}

// Line-of-sight sweep toward a target at the given body-frame position.
inline RssiSweep generate_sweep(const RelativePosition& true_rel, const ChannelParams& params,
                                const AntennaPattern& pattern, const SparsityModel& sparsity,
                                std::mt19937_64& rng) {
    const double d = true_rel.distance();
    if (!(d > 0.0)) throw std::invalid_argument("generate_sweep: target at zero range");
    const PathComponent direct{0.0, true_rel.bearing(), d};
    return sweep_from_paths(d, std::span<const PathComponent>(&direct, 1), params, pattern, sparsity, rng);
}

// Bank of raw RSSI samples on a (distance, offset-angle) grid, used to replay
// measured propagation into synthetic geometries.
class TraceBank {
  public:
    void add_sample(double distance_m, double angle_deg, double rssi_dbm) {
        if (!(distance_m > 0.0)) throw std::invalid_argument("TraceBank: distance must be positive");
        cells_[{distance_m, angle_deg}].push_back(rssi_dbm);
    }

    bool empty() const { return cells_.empty(); }

    // Every (distance, angle) grid cell must hold at least one sample; the
    // map representation guarantees that, so this checks grid completeness:
    // each stored distance must cover each stored angle.
    void validate() const {
        if (cells_.empty()) throw std::runtime_error("TraceBank: empty bank");
        std::vector<double> ds = distances();
        std::vector<double> as = angles_deg();
        for (double d : ds) {
            for (double a : as) {
                if (cells_.find({d, a}) == cells_.end()) {
                    throw std::runtime_error("TraceBank: missing cell at d=" + std::to_string(d) +
                                             " angle=" + std::to_string(a));
                }
            }
        }
    }

    std::vector<double> distances() const {
        std::vector<double> ds;
        for (const auto& [key, _] : cells_) {
            if (ds.empty() || ds.back() != key.first) ds.push_back(key.first);
        }
        return ds;
    }

    std::vector<double> angles_deg() const {
        std::vector<double> as;
        for (const auto& [key, _] : cells_) as.push_back(key.second);
        std::sort(as.begin(), as.end());
        as.erase(std::unique(as.begin(), as.end()), as.end());
        return as;
    }

    const std::vector<double>& samples(double distance_m, double angle_deg) const {
        auto it = cells_.find({distance_m, angle_deg});
        if (it == cells_.end()) throw std::runtime_error("TraceBank: no such cell");
        return it->second;
    }

    // Nearest stored distance; ties break toward the smaller grid value.
    double nearest_distance(double d) const {
        if (cells_.empty()) throw std::runtime_error("TraceBank: empty bank");
        double best = 0.0, best_err = std::numeric_limits<double>::infinity();
        for (double cand : distances()) {
            const double err = std::abs(cand - d);
            if (err < best_err - 1e-12) {
                best = cand;
                best_err = err;
            }
        }
        return best;
    }

    // Nearest stored angle by circular distance; ties toward the smaller value.
    double nearest_angle_deg(double angle_deg) const {
        if (cells_.empty()) throw std::runtime_error("TraceBank: empty bank");
        double best = 0.0, best_err = std::numeric_limits<double>::infinity();
        for (double cand : angles_deg()) {
            const double err = std::abs(rad_to_deg(wrap_angle(deg_to_rad(cand - angle_deg))));
            if (err < best_err - 1e-12) {
                best = cand;
                best_err = err;
            }
        }
        return best;
    }

    // Mean stored power per distance, averaged over angles and samples.
    std::vector<std::pair<double, double>> distance_power_pairs() const {
        std::vector<std::pair<double, double>> out;
        for (double d : distances()) {
            double sum = 0.0;
            int n = 0;
            for (double a : angles_deg()) {
                auto it = cells_.find({d, a});
                if (it == cells_.end()) continue;
                for (double v : it->second) {
                    sum += v;
                    ++n;
                }
            }
            if (n > 0) out.emplace_back(d, sum / n);
        }
        return out;
    }

  private:
    std::map<std::pair<double, double>, std::vector<double>> cells_;
};

// Replay: nearest grid cell, random stored sample, log-distance correction to
// the requested range, plus a Gaussian residual (fitted variance 2 dB^2).
inline double interpolate_trace(const TraceBank& bank, double distance_m, double angle_deg,
                                const ChannelParams& params, std::mt19937_64& rng,
                                double noise_variance = 2.0) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("interpolate_trace: distance must be positive");
    if (noise_variance < 0.0) throw std::invalid_argument("interpolate_trace: negative noise variance");
    const double d_near = bank.nearest_distance(distance_m);
    const double a_near = bank.nearest_angle_deg(angle_deg);
    const auto& samples = bank.samples(d_near, a_near);
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    const double base = samples[pick(rng)];
    double noise = 0.0;
    if (noise_variance > 0.0) {
        std::normal_distribution<double> n(0.0, std::sqrt(noise_variance));
        noise = n(rng);
    }
    return base - 10.0 * params.eta * std::log10(distance_m / d_near) + noise;
}

// Synthetic bank on the given grid, drawn from the channel model itself.
inline TraceBank make_synthetic_bank(const ChannelParams& params, const AntennaPattern& pattern,
                                     std::span<const double> distances_m, std::span<const double> angles_deg,
                                     int samples_per_cell, std::mt19937_64& rng) {
    if (samples_per_cell <= 0) throw std::invalid_argument("make_synthetic_bank: samples_per_cell");
    TraceBank bank;
    std::normal_distribution<double> shadow(0.0, params.shadow_sigma_db);
    for (double d : distances_m) {
        for (double a : angles_deg) {
            for (int s = 0; s < samples_per_cell; ++s) {
                const double psi = params.shadow_sigma_db > 0.0 ? shadow(rng) : 0.0;
                bank.add_sample(d, a, received_power(d, deg_to_rad(a), params, pattern, psi));
            }
        }
    }
    return bank;
}

// Path-loss exponent from power/distance samples: the reference point
// (d_ref, p_ref) joins the sample set, and the estimate is the mean of the
// pairwise exponents over all pairs with distinct distances.
inline double estimate_eta(std::span<const std::pair<double, double>> distance_power,
                           double p_ref_dbm, double d_ref) {
    if (!(d_ref > 0.0)) throw std::invalid_argument("estimate_eta: d_ref must be positive");
    std::vector<std::pair<double, double>> pts(distance_power.begin(), distance_power.end());
    pts.emplace_back(d_ref, p_ref_dbm);
    for (const auto& [d, p] : pts) {
        if (!(d > 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("estimate_eta: samples need positive distance and finite power");
        }
    }
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double ratio = pts[j].first / pts[i].first;
            if (std::abs(std::log10(ratio)) < 1e-12) continue;  // equal distances carry no slope
            sum += (pts[i].second - pts[j].second) / (10.0 * std::log10(ratio));
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("estimate_eta: need at least two distinct distances");
    return sum / n;
}

// Trace-bank CSV: "distance_m,angle_deg,rssi_dbm" rows, optional header.
inline void save_trace_bank_csv(const TraceBank& bank, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_trace_bank_csv: cannot open " + path.string());
    out << std::setprecision(17) << "distance_m,angle_deg,rssi_dbm\n";
    for (double d : bank.distances()) {
        for (double a : bank.angles_deg()) {
            for (double v : bank.samples(d, a)) {
                out << d << ',' << a << ',' << v << '\n';
            }
        }
    }
    if (!out) throw std::runtime_error("save_trace_bank_csv: write failed: " + path.string());
}

inline TraceBank load_trace_bank_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_trace_bank_csv: cannot open " + path.string());
    TraceBank bank;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
            throw std::runtime_error("load_trace_bank_csv: malformed line: " + line);
        }
        double d = 0.0, ang = 0.0, v = 0.0;
        try {
            d = std::stod(a);
            ang = std::stod(b);
            v = std::stod(c);
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw std::runtime_error("load_trace_bank_csv: malformed line: " + line);
        }
        bank.add_sample(d, ang, v);
        first = false;
    }
    if (bank.empty()) throw std::runtime_error("load_trace_bank_csv: no samples in " + path.string());
    return bank;
}

}  // namespace rssitrack

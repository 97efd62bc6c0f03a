#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rssitrack/angles.hpp"
#include "rssitrack/channel.hpp"
#include "rssitrack/pattern.hpp"
#include "rssitrack/sweep.hpp"

namespace rssitrack {

struct NoObservationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sweep shifted so the strongest present bin sits at 0 dB, making it
// comparable against the normalized antenna pattern.
struct NormalizedSweep {
    std::array<double, kSweepBins> values{};
    std::array<bool, kSweepBins> present{};
};

inline NormalizedSweep normalize(const RssiSweep& sweep) {
    double peak = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kSweepBins; ++i) {
        if (sweep.present[i]) peak = std::max(peak, sweep.values_dbm[i]);
    }
    if (!std::isfinite(peak)) throw NoObservationError("normalize: empty sweep");
    NormalizedSweep ns;
    ns.present = sweep.present;
    for (int i = 0; i < kSweepBins; ++i) {
        ns.values[i] = sweep.present[i] ? sweep.values_dbm[i] - peak
                                        : std::numeric_limits<double>::quiet_NaN();
    }
    return ns;
}

// Maximal circular run of present bins.
struct AngularCluster {
    int first_bin = 0;
    int size = 0;

    int last_bin() const { return wrap_bin(first_bin + size - 1); }
    bool contains(int bin) const {
        const int offset = wrap_bin(bin - first_bin);
        return offset < size;
    }
};

inline std::vector<AngularCluster> find_clusters(const std::array<bool, kSweepBins>& present) {
    int n_present = 0;
    for (bool p : present) n_present += p;
    if (n_present == 0) return {};
    if (n_present == kSweepBins) return {AngularCluster{0, kSweepBins}};
    // Anchor the scan right after some absent bin so seam runs stay whole.
    int anchor = 0;
    while (present[anchor]) ++anchor;
    std::vector<AngularCluster> clusters;
    int run_start = -1, run_len = 0;
    for (int k = 1; k <= kSweepBins; ++k) {
        const int bin = wrap_bin(anchor + k);
        if (present[bin]) {
            if (run_len == 0) run_start = bin;
            ++run_len;
        } else if (run_len > 0) {
            clusters.push_back(AngularCluster{run_start, run_len});
            run_len = 0;
        }
    }
    if (run_len > 0) clusters.push_back(AngularCluster{run_start, run_len});
    return clusters;
}

// Complementary runs of absent bins.
inline std::vector<AngularCluster> find_gaps(const std::array<bool, kSweepBins>& present) {
    std::array<bool, kSweepBins> absent{};
    for (int i = 0; i < kSweepBins; ++i) absent[i] = !present[i];
    return find_clusters(absent);
}

enum class AoaMethod { basic, clustering, weighted };

struct AoAObservation {
    double theta_rad = 0.0;  // grid-snapped
    int bin = 0;
    AoaMethod method = AoaMethod::basic;
};

namespace detail {

// Pattern-correlation score for one candidate arrival bin: weighted sum of
// absolute deviations between the sweep and the pattern centered there. The
// pattern array is boresight-centered (bin kSweepBins/2 is 0 degrees), so the
// expected value at sweep bin k for arrival bin c reads gain(k - c + 100).
inline double correlation_score(const NormalizedSweep& ns, const AntennaPattern& pattern, int candidate_bin,
                                const std::array<double, kSweepBins>* weights) {
    double score = 0.0;
    for (int k = 0; k < kSweepBins; ++k) {
        if (!ns.present[k]) continue;
        const double diff = std::abs(ns.values[k] - pattern.gain(k - candidate_bin + kSweepBins / 2));
        score += weights ? (*weights)[k] * diff : diff;
    }
    return score;
}

// Argmin over all 200 candidate arrival bins; ties break toward the smallest
// absolute angle, then the smaller signed angle.
inline AoAObservation best_shift(const NormalizedSweep& ns, const AntennaPattern& pattern,
                                 const std::array<double, kSweepBins>* weights, AoaMethod method) {
    int best_bin = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int cand = 0; cand < kSweepBins; ++cand) {
        const double score = correlation_score(ns, pattern, cand, weights);
        if (best_bin < 0 || score < best_score) {
            best_bin = cand;
            best_score = score;
            continue;
        }
        if (score == best_score) {
            const double a = bin_angle_deg(cand), b = bin_angle_deg(best_bin);
            if (std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b)) {
                best_bin = cand;
            }
        }
    }
    return AoAObservation{bin_angle_rad(best_bin), best_bin, method};
}

}  // namespace detail

inline AoAObservation aoa_basic(const NormalizedSweep& ns, const AntennaPattern& pattern) {
    if (std::none_of(ns.present.begin(), ns.present.end(), [](bool p) { return p; })) {
        throw NoObservationError("aoa_basic: empty sweep");
    }
    return detail::best_shift(ns, pattern, nullptr, AoaMethod::basic);
}

// Same correlation with each bin weighted by the reciprocal of its cluster
// size, so one long run of beacons cannot outvote the rest of the sweep.
inline AoAObservation aoa_clustering(const NormalizedSweep& ns, const AntennaPattern& pattern) {
    const auto clusters = find_clusters(ns.present);
    if (clusters.empty()) throw NoObservationError("aoa_clustering: empty sweep");
    std::array<double, kSweepBins> weights{};
    for (const AngularCluster& c : clusters) {
        for (int k = 0; k < c.size; ++k) {
            weights[wrap_bin(c.first_bin + k)] = 1.0 / c.size;
        }
    }
    AoAObservation obs = detail::best_shift(ns, pattern, &weights, AoaMethod::clustering);
    return obs;
}

// Blend of the two candidates, keyed to how fragmented the sweep is: with
// mean cluster extent lam and mean gap extent mu, a contiguous sweep
// (lam > mu) trusts the basic estimate alone, otherwise the two estimates mix
// with weight lam/mu on the basic one (weighted circular mean, grid-snapped).
inline AoAObservation aoa_weighted(const NormalizedSweep& ns, const AntennaPattern& pattern) {
    const auto clusters = find_clusters(ns.present);
    if (clusters.empty()) throw NoObservationError("aoa_weighted: empty sweep");
    const AoAObservation basic = aoa_basic(ns, pattern);
    const auto gaps = find_gaps(ns.present);
    double lam = 0.0;
    for (const AngularCluster& c : clusters) lam += c.size;
    lam = lam / clusters.size() * kBinWidthDeg;
    double mu = 0.0;
    for (const AngularCluster& g : gaps) mu += g.size;
    mu = gaps.empty() ? 0.0 : mu / gaps.size() * kBinWidthDeg;
    if (mu <= 0.0 || lam > mu) {
        return AoAObservation{basic.theta_rad, basic.bin, AoaMethod::weighted};
    }
    const AoAObservation clustered = aoa_clustering(ns, pattern);
    const double w = lam / mu;
    const double x = w * std::cos(basic.theta_rad) + (1.0 - w) * std::cos(clustered.theta_rad);
    const double y = w * std::sin(basic.theta_rad) + (1.0 - w) * std::sin(clustered.theta_rad);
    double theta;
    if (std::hypot(x, y) < 1e-12) {
        theta = basic.theta_rad;  // antipodal candidates: no defined mean, keep the primary
    } else {
        theta = std::atan2(y, x);
    }
    const int bin = nearest_bin(theta);
    return AoAObservation{bin_angle_rad(bin), bin, AoaMethod::weighted};
}

inline AoAObservation observe_aoa(const NormalizedSweep& ns, const AntennaPattern& pattern, AoaMethod method) {
    switch (method) {
        case AoaMethod::basic:
            return aoa_basic(ns, pattern);
        case AoaMethod::clustering:
            return aoa_clustering(ns, pattern);
        case AoaMethod::weighted:
            return aoa_weighted(ns, pattern);
    }
    throw std::invalid_argument("observe_aoa: unknown method");
}

// Range from the rotation-averaged power via the log-distance model, against
// the bank-calibrated reference power p_ref_dbm.
inline double observe_distance(const RssiSweep& sweep, const ChannelParams& params) {
    if (sweep.count_present() == 0) throw NoObservationError("observe_distance: empty sweep");
    if (!(params.eta > 0.0)) throw std::invalid_argument("observe_distance: eta must be positive");
    const double mean_dbm = sweep.mean_present_dbm();
    return params.d_ref * std::pow(10.0, (params.p_ref_dbm - mean_dbm) / (10.0 * params.eta));
}

}  // namespace rssitrack

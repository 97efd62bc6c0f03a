#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "rssitrack/angles.hpp"

namespace rssitrack {

struct ProtocolError : std::logic_error {
    using std::logic_error::logic_error;
};

// Acoustic ranging sweep geometry: 20 platform orientations, 18 deg apart.
inline constexpr int kRangingOrientations = 20;
inline constexpr double kRangingStepDeg = 18.0;

inline double orientation_angle_rad(int index) {
    if (index < 0 || index >= kRangingOrientations) {
        throw std::invalid_argument("orientation_angle_rad: index out of range");
    }
    return deg_to_rad(-180.0 + kRangingStepDeg * index);
}

struct RangingConfig {
    int retry_cap = 3;              // re-requests per orientation before giving up
    double sound_speed = 343.0;     // m/s; the radio trigger is treated as instantaneous
    double noise_sigma_s = 2e-4;    // timing jitter on a valid measurement
    double half_beam_rad = deg_to_rad(9.0);  // transducer alignment tolerance
};

enum class RangingState { idle, req_sent, ready, go_sent, measured, timed_out };
enum class RangingEvent { send, deliver, lose, timeout, measure };

// Request/ready/go handshake around each orientation's ping. A lost message
// leaves the session waiting; the timeout retries the orientation up to the
// cap and then records the in-band failure value 0. A delivered ping reports
// the measured time difference through the `measure` event (0 when the
// responder heard nothing).
class RangingSession {
  public:
    explicit RangingSession(const RangingConfig& cfg = {}) : cfg_(cfg) {
        values_.fill(0.0);
        if (cfg_.retry_cap < 0) throw std::invalid_argument("RangingSession: negative retry cap");
    }

    RangingState state() const { return state_; }
    int orientation() const { return orientation_; }
    int retries_used() const { return retries_; }
    bool sweep_complete() const { return complete_; }
    const std::array<double, kRangingOrientations>& values() const { return values_; }

    void step(RangingEvent event, double measurement_s = 0.0) {
        switch (state_) {
            case RangingState::idle:
            case RangingState::measured:
            case RangingState::timed_out:
                if (event == RangingEvent::send) {
                    if (state_ == RangingState::idle && complete_) reset();
                    state_ = RangingState::req_sent;
                    return;
                }
                break;
            case RangingState::req_sent:
                if (event == RangingEvent::deliver) {
                    state_ = RangingState::ready;
                    return;
                }
                if (event == RangingEvent::lose) return;  // keep waiting for the timeout
                if (event == RangingEvent::timeout) {
                    retry_or_fail();
                    return;
                }
                break;
            case RangingState::ready:
                if (event == RangingEvent::send) {
                    state_ = RangingState::go_sent;
                    return;
                }
                break;
            case RangingState::go_sent:
                if (event == RangingEvent::lose) return;
                if (event == RangingEvent::timeout) {
                    retry_or_fail();
                    return;
                }
                if (event == RangingEvent::measure) {
                    if (!(measurement_s >= 0.0)) {
                        throw std::invalid_argument("RangingSession: negative measurement");
                    }
                    record(measurement_s, RangingState::measured);
                    return;
                }
                break;
        }
        throw ProtocolError("RangingSession: illegal event in this state");
    }

  private:
    void retry_or_fail() {
        if (retries_ < cfg_.retry_cap) {
            ++retries_;
            state_ = RangingState::idle;
        } else {
            record(0.0, RangingState::timed_out);
        }
    }

    void record(double value, RangingState terminal) {
        values_[orientation_] = value;
        retries_ = 0;
        ++orientation_;
        if (orientation_ >= kRangingOrientations) {
            orientation_ = 0;
            complete_ = true;
            state_ = RangingState::idle;
        } else {
            state_ = terminal;
        }
    }

    void reset() {
        values_.fill(0.0);
        orientation_ = 0;
        retries_ = 0;
        complete_ = false;
    }

    RangingConfig cfg_;
    RangingState state_ = RangingState::idle;
    int orientation_ = 0;
    int retries_ = 0;
    bool complete_ = false;
    std::array<double, kRangingOrientations> values_{};
};

// Physical layer for one orientation: the ping arrives only with line of
// sight and the transducer aligned within the half beam; otherwise the
// responder reports the failure value 0.
inline double measure_tdoa(double distance_m, double theta_true_rad, int orientation_index, bool los,
                           const RangingConfig& cfg, std::mt19937_64& rng) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("measure_tdoa: distance must be positive");
    if (!los) return 0.0;
    const double offset = wrap_angle(orientation_angle_rad(orientation_index) - theta_true_rad);
    if (std::abs(offset) > cfg.half_beam_rad + 1e-12) return 0.0;
    double dt = distance_m / cfg.sound_speed;
    if (cfg.noise_sigma_s > 0.0) {
        std::normal_distribution<double> n(0.0, cfg.noise_sigma_s);
        dt += n(rng);
    }
    return std::max(dt, 1e-12);
}

struct RangingLink {
    double loss_prob = 0.0;  // per radio message
};

// Drives a full 20-orientation sweep through the protocol machine against a
// lossy radio link. Returns the recorded time differences (0 = failure).
inline std::array<double, kRangingOrientations> run_ranging_sweep(double distance_m, double theta_true_rad,
                                                                  bool los, const RangingLink& link,
                                                                  const RangingConfig& cfg,
                                                                  std::mt19937_64& rng) {
    std::bernoulli_distribution lost(link.loss_prob);
    RangingSession session(cfg);
    const int orientations = kRangingOrientations;
    for (int o = 0; o < orientations; ++o) {
        while (true) {
            session.step(RangingEvent::send);  // REQ
            const bool req_lost = lost(rng);
            const bool rdy_lost = lost(rng);
            if (req_lost || rdy_lost) {
                session.step(RangingEvent::lose);
                session.step(RangingEvent::timeout);
                if (session.state() == RangingState::timed_out ||
                    (session.state() == RangingState::idle && session.sweep_complete())) {
                    break;  // retries exhausted, orientation failed
                }
                continue;
            }
            session.step(RangingEvent::deliver);
            session.step(RangingEvent::send);  // GO
            if (lost(rng)) {
                session.step(RangingEvent::lose);
                session.step(RangingEvent::timeout);
                if (session.state() == RangingState::timed_out ||
                    (session.state() == RangingState::idle && session.sweep_complete())) {
                    break;
                }
                continue;
            }
            session.step(RangingEvent::measure, measure_tdoa(distance_m, theta_true_rad, o, los, cfg, rng));
            break;
        }
    }
    if (!session.sweep_complete()) throw ProtocolError("run_ranging_sweep: sweep did not complete");
    return session.values();
}

struct RangingFix {
    double distance_m = 0.0;
    double angle_rad = 0.0;
};

// The aligned orientation hears the shortest flight time, so the minimum
// nonzero entry carries both the range and the bearing.
inline std::optional<RangingFix> reconstruct(const std::array<double, kRangingOrientations>& values,
                                             const RangingConfig& cfg) {
    int best = -1;
    for (int i = 0; i < kRangingOrientations; ++i) {
        if (values[i] > 0.0 && (best < 0 || values[i] < values[best])) best = i;
    }
    if (best < 0) return std::nullopt;
    return RangingFix{values[best] * cfg.sound_speed, orientation_angle_rad(best)};
}

}  // namespace rssitrack

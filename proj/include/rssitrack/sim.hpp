#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "rssitrack/angles.hpp"
#include "rssitrack/channel.hpp"
#include "rssitrack/estimation.hpp"
#include "rssitrack/geometry.hpp"
#include "rssitrack/lqg.hpp"
#include "rssitrack/pattern.hpp"
#include "rssitrack/policy.hpp"
#include "rssitrack/rng.hpp"
#include "rssitrack/speed.hpp"

namespace rssitrack {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Slot timing. The chassis only translates for part of each slot; the rest
// goes to the antenna sweep and the rotation phase, while the target keeps
// moving the whole time. That duty cycle is what caps the usable speed
// advantage: a follower rated at v_f only closes at translate/dt * v_f.
enum class TimingMode { emulation, robot };

struct TimingModel {
    TimingMode mode = TimingMode::emulation;

    double dt() const { return mode == TimingMode::emulation ? 1.0 : 4.0; }
    double translate_seconds() const { return mode == TimingMode::emulation ? 0.58 : 2.0; }
};

enum class LeaderKind { waypoint, scripted, static_ };

struct LeaderConfig {
    LeaderKind kind = LeaderKind::waypoint;
    double v_max = 2.0;
    double reversal_prob = 0.05;    // per-slot chance of a full direction flip
    double speed_min_frac = 0.7;    // slot speed drawn from [frac, 1] * v_max
    std::vector<Point> waypoints;   // scripted route
};

struct ArenaConfig {
    double half_extent = 20.0;  // square arena, centered on the origin
};

enum class MultipathScenario { los, strong_multipath, weak_multipath };

// Cluttered-environment abstraction. Outside los_radius the direct path is
// blocked and only reflected components (fixed world bearings, fixed
// effective path length) reach the receiver.
struct MultipathConfig {
    MultipathScenario scenario = MultipathScenario::los;
    double secondary_gain_db = -3.0;
    double los_radius = 3.0;
    double path_length_m = 8.0;
    // Reflected bearings sit at offset_1 ~ U[min, max] from the leader's
    // initial bearing, the second component 90 degrees further.
    double offset_min_deg = -110.0;
    double offset_max_deg = 20.0;
};

enum class ObservationMode { channel, oracle };

// Oracle observations for controlled-error studies: truth plus a configured
// bias plus small noise. Distance bias follows the "true minus observed"
// convention, so a positive bias means the follower underestimates range.
struct OracleConfig {
    double dist_bias_m = 0.0;
    double angle_bias_rad = 0.0;
    double dist_sigma_m = 0.1;
    double angle_sigma_rad = deg_to_rad(2.0);
};

struct WorldConfig {
    int slots = 300;
    double initial_distance = 4.0;
    double d_th = 5.0;           // bounded-tracking threshold
    double success_radius = 1.0; // catch radius for the clutter study
    TimingModel timing;
    ArenaConfig arena;
    LeaderConfig leader;
    ChannelParams channel;
    SparsityModel sparsity{0.1, 0.5, 30.0};
    AntennaPattern pattern = make_default_pattern();
    MultipathConfig multipath;
    ObservationMode observation = ObservationMode::channel;
    OracleConfig oracle;
    PolicyConfig policy;
    bool calibrate_eta = true;
    bool auto_reference_power = true;
    std::optional<ControllerConfig> controller_override;
};

struct SlotRecord {
    int slot = 0;
    double leader_x = 0.0, leader_y = 0.0;
    double bot_x = 0.0, bot_y = 0.0, bot_heading = 0.0;
    double d_true = 0.0;
    double theta_true = 0.0;       // leader bearing in the body frame
    double leader_speed = 0.0;     // ground speed this slot
    double leader_radial_speed = kNaN;  // toward the follower, along the bearing
    int present_bins = 0;
    double d_obs = kNaN;
    double theta_obs = kNaN;
    double v_rel_obs = kNaN;
    double v_leader_obs = kNaN;    // leader ground-speed estimate (displacement triangle)
    double d_est = kNaN;           // controller range estimate (post-update)
    double v_rel_est = kNaN;
    double rotate_cmd = 0.0;
    double v_cmd = 0.0;
    double v_achieved = 0.0;
    bool obstacle_hit = false;
    bool randomized = false;
};

struct EpisodeLog {
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::pragmatic;
    double dt = 1.0;
    std::vector<SlotRecord> slots;
    std::optional<int> success_slot;  // first slot within success_radius
};

// Random-waypoint leader with occasional full reversals.
class LeaderSim {
  public:
    LeaderSim(const LeaderConfig& cfg, const ArenaConfig& arena, Point start, std::mt19937_64& rng)
        : cfg_(cfg), arena_(arena), pos_(start) {
        if (cfg_.kind == LeaderKind::waypoint) {
            waypoint_ = draw_waypoint(rng);
        } else if (cfg_.kind == LeaderKind::scripted) {
            if (cfg_.waypoints.empty()) throw std::invalid_argument("LeaderSim: scripted route empty");
            waypoint_ = cfg_.waypoints.front();
        }
    }

    const Point& position() const { return pos_; }

    // Advances one slot and returns the ground speed used.
    double step(double dt, std::mt19937_64& rng) {
        if (cfg_.kind == LeaderKind::static_) return 0.0;
        if (cfg_.kind == LeaderKind::waypoint) {
            std::bernoulli_distribution reverse(cfg_.reversal_prob);
            if (reverse(rng)) {
                waypoint_ = clamp_point({2.0 * pos_.x - waypoint_.x, 2.0 * pos_.y - waypoint_.y});
            }
            std::uniform_real_distribution<double> frac(cfg_.speed_min_frac, 1.0);
            const double speed = frac(rng) * cfg_.v_max;
            const double moved = advance_toward(waypoint_, speed * dt);
            if (std::hypot(waypoint_.x - pos_.x, waypoint_.y - pos_.y) < 1e-9) {
                waypoint_ = draw_waypoint(rng);
            }
            return moved / dt;
        }
        // Scripted: run the route at v_max, holding at the final waypoint.
        const Point target = cfg_.waypoints[std::min(route_index_, cfg_.waypoints.size() - 1)];
        const double moved = advance_toward(target, cfg_.v_max * dt);
        if (std::hypot(target.x - pos_.x, target.y - pos_.y) < 1e-9 &&
            route_index_ + 1 < cfg_.waypoints.size()) {
            ++route_index_;
        }
        return moved / dt;
    }

  private:
    Point draw_waypoint(std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-arena_.half_extent, arena_.half_extent);
        return Point{u(rng), u(rng)};
    }

    Point clamp_point(Point p) const {
        p.x = std::clamp(p.x, -arena_.half_extent, arena_.half_extent);
        p.y = std::clamp(p.y, -arena_.half_extent, arena_.half_extent);
        return p;
    }

    double advance_toward(const Point& target, double max_step) {
        const double dx = target.x - pos_.x;
        const double dy = target.y - pos_.y;
        const double dist = std::hypot(dx, dy);
        const double step = std::min(dist, max_step);
        if (dist > 1e-12) {
            pos_.x += dx / dist * step;
            pos_.y += dy / dist * step;
        }
        return step;
    }

    LeaderConfig cfg_;
    ArenaConfig arena_;
    Point pos_;
    Point waypoint_{};
    std::size_t route_index_ = 0;
};

// Public seam for clutter studies: a sweep synthesized from an explicit set
// of propagation paths (a single direct path reproduces generate_sweep).
inline RssiSweep multipath_sweep_mixture(const RelativePosition& true_rel,
                                         std::span<const PathComponent> paths, const ChannelParams& params,
                                         const AntennaPattern& pattern, const SparsityModel& sparsity,
                                         std::mt19937_64& rng) {
    const double d = true_rel.distance();
    if (!(d > 0.0)) throw std::invalid_argument("multipath_sweep_mixture: target at zero range");
    return sweep_from_paths(d, paths, params, pattern, sparsity, rng);
}

namespace detail {

struct EscapeGeometry {
    double bearing_1 = 0.0;  // world bearing of the first reflected component
    double bearing_2 = 0.0;
};

inline std::vector<PathComponent> scenario_paths(const WorldConfig& w, const EscapeGeometry& geo,
                                                 double d_true, double theta_true, double bot_heading) {
    std::vector<PathComponent> paths;
    const bool los = w.multipath.scenario == MultipathScenario::los || d_true <= w.multipath.los_radius;
    if (los) {
        paths.push_back(PathComponent{0.0, theta_true, d_true});
        return paths;
    }
    const double len = std::max(w.multipath.path_length_m, 1e-3);
    paths.push_back(
        PathComponent{w.multipath.secondary_gain_db, wrap_angle(geo.bearing_1 - bot_heading), len});
    if (w.multipath.scenario == MultipathScenario::weak_multipath) {
        paths.push_back(
            PathComponent{w.multipath.secondary_gain_db, wrap_angle(geo.bearing_2 - bot_heading), len});
    }
    return paths;
}

}  // namespace detail

inline EpisodeLog run_episode(const WorldConfig& w, std::uint64_t seed) {
    if (w.slots <= 0) throw std::invalid_argument("run_episode: slots must be positive");
    auto rng_leader = make_stream(seed, "leader");
    auto rng_channel = make_stream(seed, "channel");
    auto rng_policy = make_stream(seed, "policy");

    const double dt = w.timing.dt();
    const double translate_s = w.timing.translate_seconds();
    // The controller plans in effective velocities (displacement per slot
    // second); duty converts between those and chassis speed commands.
    const double duty = translate_s / dt;

    GlobalPose bot{0.0, 0.0, 0.0};
    std::uniform_real_distribution<double> bearing_dist(-pi, pi);
    const double bearing0 = bearing_dist(rng_leader);
    const double d0 = std::min(w.initial_distance, w.arena.half_extent * 0.9);
    Point leader_start{d0 * std::cos(bearing0), d0 * std::sin(bearing0)};
    LeaderSim leader(w.leader, w.arena, leader_start, rng_leader);

    detail::EscapeGeometry geo;
    {
        std::uniform_real_distribution<double> off(deg_to_rad(w.multipath.offset_min_deg),
                                                   deg_to_rad(w.multipath.offset_max_deg));
        geo.bearing_1 = wrap_angle(bearing0 + off(rng_channel));
        geo.bearing_2 = wrap_angle(geo.bearing_1 + pi / 2.0);
    }

    ChannelParams est_params = w.channel;
    if (w.auto_reference_power) {
        est_params.p_ref_dbm = calibrated_reference_power(w.channel, w.pattern);
    }
    ChannelParams world_params = est_params;

    // Startup calibration: one sweep at the known initial range fits the
    // path-loss exponent the estimator will use from then on.
    if (w.observation == ObservationMode::channel && w.calibrate_eta &&
        std::abs(std::log10(d0 / world_params.d_ref)) > 0.05) {
        const RelativePosition rel0{d0 * std::cos(bearing0), d0 * std::sin(bearing0)};
        const RssiSweep sweep0 =
            generate_sweep(rel0, world_params, w.pattern, w.sparsity, rng_channel);
        if (sweep0.count_present() > 0) {
            const std::pair<double, double> pt{d0, sweep0.mean_present_dbm()};
            est_params.eta = estimate_eta(std::span<const std::pair<double, double>>(&pt, 1),
                                          est_params.p_ref_dbm, est_params.d_ref);
        }
    }

    const double v_f_max_eff = w.policy.v_f_max * duty;
    ControllerConfig ctrl_cfg = w.controller_override
                                    ? *w.controller_override
                                    : make_controller_config(dt, w.leader.v_max, v_f_max_eff,
                                                             w.policy.strategy);
    std::optional<LqgController> controller;
    if (w.policy.strategy != Strategy::baseline) {
        controller.emplace(ctrl_cfg, v_f_max_eff, d0);
    }
    StallMonitor monitor(w.policy);

    EpisodeLog log;
    log.seed = seed;
    log.strategy = w.policy.strategy;
    log.dt = dt;
    log.slots.reserve(w.slots);

    double v_f_now_eff = 0.0;    // effective follower speed over the elapsed slot
    bool obstacle_prev = false;
    Point leader_prev = leader.position();

    for (int n = 0; n < w.slots; ++n) {
        SlotRecord rec;
        rec.slot = n;
        rec.leader_speed = leader.step(dt, rng_leader);
        const Point lp = leader.position();

        const RelativePosition rel = to_local(lp, bot);
        const double d_true = std::max(rel.distance(), 1e-3);
        const double theta_true = rel.bearing();
        rec.leader_x = lp.x;
        rec.leader_y = lp.y;
        rec.bot_x = bot.x;
        rec.bot_y = bot.y;
        rec.bot_heading = bot.heading;
        rec.d_true = d_true;
        rec.theta_true = theta_true;
        if (n > 0) {
            const double ux = std::cos(theta_true + bot.heading);
            const double uy = std::sin(theta_true + bot.heading);
            rec.leader_radial_speed = ((lp.x - leader_prev.x) * ux + (lp.y - leader_prev.y) * uy) / dt;
        }

        // Observation.
        bool have_obs = false;
        double d_m = 0.0, theta_m = 0.0;
        double theta_baseline = 0.0;
        if (w.observation == ObservationMode::oracle) {
            std::normal_distribution<double> nd(0.0, 1.0);
            const double eps_d = w.oracle.dist_sigma_m > 0.0 ? nd(rng_channel) * w.oracle.dist_sigma_m : 0.0;
            const double eps_a =
                w.oracle.angle_sigma_rad > 0.0 ? nd(rng_channel) * w.oracle.angle_sigma_rad : 0.0;
            d_m = std::max(0.01, d_true - w.oracle.dist_bias_m + eps_d);
            theta_m = wrap_angle(theta_true + w.oracle.angle_bias_rad + eps_a);
            theta_baseline = theta_m;
            rec.present_bins = kSweepBins;
            have_obs = true;
        } else {
            const auto paths = detail::scenario_paths(w, geo, d_true, theta_true, bot.heading);
            const RssiSweep sweep = sweep_from_paths(d_true, paths, world_params, w.pattern, w.sparsity,
                                                     rng_channel);
            rec.present_bins = sweep.count_present();
            if (rec.present_bins > 0) {
                const NormalizedSweep ns = normalize(sweep);
                d_m = observe_distance(sweep, est_params);
                theta_m = observe_aoa(ns, w.pattern, w.policy.aoa_method).theta_rad;
                if (w.policy.strategy == Strategy::baseline) {
                    theta_baseline = w.policy.aoa_method == AoaMethod::basic
                                         ? theta_m
                                         : aoa_basic(ns, w.pattern).theta_rad;
                }
                have_obs = true;
            }
        }

        // Decision.
        ControlDecision decision;
        if (w.policy.strategy == Strategy::baseline) {
            // The reference policy commands a wheel speed straight from the
            // measurement and knows nothing about the slot duty cycle, so it
            // only ever closes part of the range it intends to.
            decision = have_obs ? baseline_decide(d_m, theta_baseline, w.policy.v_f_max, dt)
                                : ControlDecision{};
            if (have_obs) {
                rec.d_obs = d_m;
                rec.theta_obs = theta_m;
            }
        } else {
            const RelativeState prior = controller->predicted();
            // Static-leader reference for the displacement triangle: the last
            // posterior dead-reckoned by the follower's own (exactly known)
            // displacement, so the residual is the leader's motion alone. A
            // negative value means the old spot is now behind the follower.
            const double ref_d = controller->state().d_e - v_f_now_eff * dt;
            SpeedObservation sobs;
            ObservationVector obs;
            if (have_obs) {
                sobs = w.policy.strategy == Strategy::optimistic
                           ? optimistic_observe(d_m, theta_m, prior.d_e, prior.v_rel_e, dt)
                           : pragmatic_observe(d_m, theta_m, ref_d, v_f_now_eff, dt);
                obs = ObservationVector{d_m, sobs.v_rel_m, theta_m};
                rec.d_obs = d_m;
                rec.theta_obs = theta_m;
                rec.v_rel_obs = sobs.v_rel_m;
                if (w.policy.strategy == Strategy::pragmatic) {
                    // Displacement-triangle speed magnitude; the optimistic
                    // strategy never forms a leader-speed estimate.
                    rec.v_leader_obs = std::hypot(d_m * std::cos(theta_m) - ref_d,
                                                  d_m * std::sin(theta_m)) / dt;
                }
            } else {
                // Beaconless slot: coast on the prediction (zero innovation).
                sobs = SpeedObservation{prior.v_rel_e, 0.0};
                obs = ObservationVector{prior.d_e, prior.v_rel_e, prior.theta_e};
            }
            decision = controller->step(obs, sobs.v_leader_next);
            rec.d_est = controller->state().d_e;
            rec.v_rel_est = controller->state().v_rel_e;
        }

        // Randomized escape override, held for exactly one slot; longer
        // randomized runs degrade tracking more than they help exploration.
        bool randomized = false;
        if (w.policy.escape_enabled) {
            const double d_for_monitor =
                w.policy.strategy == Strategy::baseline ? (have_obs ? d_m : 0.0) : controller->state().d_e;
            const auto heading =
                check_multipath_escape(monitor, obstacle_prev, d_for_monitor, w.policy, rng_policy);
            if (heading) {
                bot.heading = *heading;
                randomized = true;
            }
        }
        if (!randomized) {
            bot.heading = wrap_angle(bot.heading + decision.rotate_by);
        }
        rec.rotate_cmd = decision.rotate_by;
        rec.randomized = randomized;

        // Translate; the bumper cancels any move that would leave the arena.
        // LQG speeds are effective displacements per slot second and convert
        // back to chassis speed; baseline speeds are chassis speeds already.
        double v_cmd;
        if (randomized) {
            v_cmd = w.policy.v_f_max;
        } else if (w.policy.strategy == Strategy::baseline) {
            v_cmd = decision.v_f_next;
        } else {
            v_cmd = decision.v_f_next / duty;
        }
        rec.v_cmd = v_cmd;
        const double step_len = v_cmd * translate_s;
        const Point target{bot.x + step_len * std::cos(bot.heading),
                           bot.y + step_len * std::sin(bot.heading)};
        bool hit = false;
        if (std::abs(target.x) > w.arena.half_extent || std::abs(target.y) > w.arena.half_extent) {
            hit = true;
        } else {
            bot.x = target.x;
            bot.y = target.y;
        }
        rec.obstacle_hit = hit;
        rec.v_achieved = hit ? 0.0 : v_cmd;
        v_f_now_eff = rec.v_achieved * duty;
        obstacle_prev = hit;
        leader_prev = lp;

        if (!log.success_slot && d_true <= w.success_radius) log.success_slot = n;
        log.slots.push_back(rec);
    }
    return log;
}

// Aggregate metrics over one or more episodes.
struct Metrics {
    double p_within = 0.0;       // share of slots with range <= d_th
    double mean_distance = 0.0;
    double path_ratio = kNaN;    // follower path length / leader path length
    double success_rate = kNaN;  // share of episodes that reached success_radius
    std::vector<double> distance_sorted;
    std::vector<double> err_dist_sorted;   // |range estimate - truth|
    std::vector<double> err_angle_sorted;  // |bearing observation - truth|, radians
    std::vector<double> err_speed_sorted;  // |leader speed estimate - true ground speed|
};

inline double cdf_at(const std::vector<double>& sorted, double x) {
    if (sorted.empty()) return kNaN;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / sorted.size();
}

inline double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return kNaN;
    const double pos = std::clamp(q, 0.0, 1.0) * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

inline Metrics compute_metrics(std::span<const EpisodeLog> logs, double d_th) {
    Metrics m;
    double dist_sum = 0.0;
    std::size_t slot_count = 0, within = 0;
    double bot_path = 0.0, leader_path = 0.0;
    int successes = 0;
    for (const EpisodeLog& log : logs) {
        if (log.success_slot) ++successes;
        for (std::size_t i = 0; i < log.slots.size(); ++i) {
            const SlotRecord& r = log.slots[i];
            m.distance_sorted.push_back(r.d_true);
            dist_sum += r.d_true;
            within += r.d_true <= d_th;
            ++slot_count;
            if (std::isfinite(r.d_est)) m.err_dist_sorted.push_back(std::abs(r.d_est - r.d_true));
            if (std::isfinite(r.theta_obs)) {
                m.err_angle_sorted.push_back(std::abs(wrap_angle(r.theta_obs - r.theta_true)));
            }
            if (std::isfinite(r.v_leader_obs)) {
                m.err_speed_sorted.push_back(std::abs(r.v_leader_obs - r.leader_speed));
            }
            if (i > 0) {
                const SlotRecord& p = log.slots[i - 1];
                bot_path += std::hypot(r.bot_x - p.bot_x, r.bot_y - p.bot_y);
                leader_path += std::hypot(r.leader_x - p.leader_x, r.leader_y - p.leader_y);
            }
        }
    }
    if (slot_count == 0) throw std::invalid_argument("compute_metrics: no slots");
    m.p_within = static_cast<double>(within) / slot_count;
    m.mean_distance = dist_sum / slot_count;
    if (leader_path > 1e-9) m.path_ratio = bot_path / leader_path;
    if (!logs.empty()) m.success_rate = static_cast<double>(successes) / logs.size();
    std::sort(m.distance_sorted.begin(), m.distance_sorted.end());
    std::sort(m.err_dist_sorted.begin(), m.err_dist_sorted.end());
    std::sort(m.err_angle_sorted.begin(), m.err_angle_sorted.end());
    std::sort(m.err_speed_sorted.begin(), m.err_speed_sorted.end());
    return m;
}

inline Metrics compute_metrics(const EpisodeLog& log, double d_th) {
    return compute_metrics(std::span<const EpisodeLog>(&log, 1), d_th);
}

// Controlled-error study: oracle observations with the given biases
// (distance bias in the "true minus observed" convention).
inline Metrics run_controlled_error(double mean_dist_err_m, double mean_angle_err_rad, WorldConfig w,
                                    int episodes, std::uint64_t seed) {
    if (episodes <= 0) throw std::invalid_argument("run_controlled_error: episodes must be positive");
    w.observation = ObservationMode::oracle;
    w.oracle.dist_bias_m = mean_dist_err_m;
    w.oracle.angle_bias_rad = mean_angle_err_rad;
    std::vector<EpisodeLog> logs;
    logs.reserve(episodes);
    for (int e = 0; e < episodes; ++e) {
        logs.push_back(run_episode(w, splitmix64(seed) + e));
    }
    return compute_metrics(logs, w.d_th);
}

// Sampling-rate study: fixed geometry, one full noisy sweep per trial,
// nested random bin subsets per rate (paired across rates).
struct RateStats {
    int rate = 0;
    double mean_angle_err_deg = 0.0;
    double ci95_angle_deg = 0.0;
    double mean_dist_err_m = 0.0;
    double ci95_dist_m = 0.0;
};

inline std::vector<RateStats> run_sampling_sweep(std::span<const int> rates, int trials, double distance_m,
                                                 double theta_deg, const ChannelParams& params,
                                                 const AntennaPattern& pattern, std::uint64_t seed) {
    if (trials <= 1) throw std::invalid_argument("run_sampling_sweep: need at least two trials");
    std::vector<int> sorted_rates(rates.begin(), rates.end());
    std::sort(sorted_rates.begin(), sorted_rates.end(), std::greater<int>());
    for (int r : sorted_rates) {
        if (r <= 0 || r > kSweepBins) throw std::invalid_argument("run_sampling_sweep: rate outside (0,200]");
    }
    ChannelParams est = params;
    est.p_ref_dbm = calibrated_reference_power(params, pattern);
    auto rng = make_stream(seed, "sampling");
    const double theta_rad = deg_to_rad(theta_deg);
    SparsityModel no_sparsity{};

    std::vector<std::vector<double>> angle_errs(sorted_rates.size());
    std::vector<std::vector<double>> dist_errs(sorted_rates.size());
    std::vector<int> order(kSweepBins);
    for (int t = 0; t < trials; ++t) {
        const RelativePosition rel{distance_m * std::cos(theta_rad), distance_m * std::sin(theta_rad)};
        const RssiSweep full = generate_sweep(rel, est, pattern, no_sparsity, rng);
        // One random bin order per trial; each rate keeps its first `rate`
        // entries, so lower rates see strict subsets of higher ones.
        for (int i = 0; i < kSweepBins; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t ri = 0; ri < sorted_rates.size(); ++ri) {
            RssiSweep sub;
            for (int k = 0; k < sorted_rates[ri]; ++k) {
                const int bin = order[k];
                sub.values_dbm[bin] = full.values_dbm[bin];
                sub.present[bin] = true;
            }
            const NormalizedSweep ns = normalize(sub);
            const AoAObservation aoa = aoa_weighted(ns, pattern);
            angle_errs[ri].push_back(std::abs(rad_to_deg(wrap_angle(aoa.theta_rad - theta_rad))));
            dist_errs[ri].push_back(std::abs(observe_distance(sub, est) - distance_m));
        }
    }

    auto stats = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= (v.size() - 1);
        return std::pair<double, double>{mean, 1.96 * std::sqrt(var / v.size())};
    };
    std::vector<RateStats> out;
    for (std::size_t ri = 0; ri < sorted_rates.size(); ++ri) {
        const auto [ma, ca] = stats(angle_errs[ri]);
        const auto [md, cd] = stats(dist_errs[ri]);
        out.push_back(RateStats{sorted_rates[ri], ma, ca, md, cd});
    }
    return out;
}

}  // namespace rssitrack

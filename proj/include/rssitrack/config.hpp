#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rssitrack/angles.hpp"
#include "rssitrack/lqg.hpp"
#include "rssitrack/sim.hpp"

namespace rssitrack {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Wraps a JSON object so every key access is tracked; leftovers are errors.
class StrictObject {
  public:
    StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        seen_.push_back(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path_ + "." + key + ": wrong type");
        }
    }

    // Returns a reference into the parent object, which must outlive the
    // nested StrictObject built on top of it.
    const nlohmann::json& take(const std::string& key) {
        seen_.push_back(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
                throw ConfigError(path_ + ": unknown key \"" + it.key() + "\"");
            }
        }
    }

  private:
    const nlohmann::json& j_;
    std::string path_;
    std::vector<std::string> seen_;
};

template <typename Enum>
Enum parse_enum(const std::string& value, std::initializer_list<std::pair<const char*, Enum>> table,
                const std::string& path) {
    for (const auto& [name, e] : table) {
        if (value == name) return e;
    }
    std::ostringstream msg;
    msg << path << ": unknown value \"" << value << "\" (expected one of:";
    for (const auto& [name, e] : table) msg << ' ' << name;
    msg << ')';
    throw ConfigError(msg.str());
}

}  // namespace detail

inline WorldConfig parse_world_config(const nlohmann::json& j) {
    WorldConfig w;
    detail::StrictObject root(j, "config");
    root.get("slots", w.slots);
    root.get("initial_distance_m", w.initial_distance);
    root.get("d_th_m", w.d_th);
    root.get("success_radius_m", w.success_radius);
    root.get("calibrate_eta", w.calibrate_eta);
    root.get("auto_reference_power", w.auto_reference_power);

    if (root.has("timing")) {
        std::string mode;
        root.get("timing", mode);
        w.timing.mode = detail::parse_enum<TimingMode>(
            mode, {{"emulation", TimingMode::emulation}, {"robot", TimingMode::robot}}, "config.timing");
    }
    if (root.has("arena_half_extent_m")) {
        root.get("arena_half_extent_m", w.arena.half_extent);
        if (!(w.arena.half_extent > 0.0)) throw ConfigError("config.arena_half_extent_m: must be positive");
    }
    if (root.has("observation")) {
        std::string mode;
        root.get("observation", mode);
        w.observation = detail::parse_enum<ObservationMode>(
            mode, {{"channel", ObservationMode::channel}, {"oracle", ObservationMode::oracle}},
            "config.observation");
    }

    if (root.has("leader")) {
        detail::StrictObject leader(root.take("leader"), "config.leader");
        if (leader.has("kind")) {
            std::string kind;
            leader.get("kind", kind);
            w.leader.kind = detail::parse_enum<LeaderKind>(kind,
                                                           {{"waypoint", LeaderKind::waypoint},
                                                            {"scripted", LeaderKind::scripted},
                                                            {"static", LeaderKind::static_}},
                                                           "config.leader.kind");
        }
        leader.get("v_max", w.leader.v_max);
        leader.get("reversal_prob", w.leader.reversal_prob);
        leader.get("speed_min_frac", w.leader.speed_min_frac);
        if (leader.has("waypoints")) {
            std::vector<std::vector<double>> pts;
            leader.get("waypoints", pts);
            w.leader.waypoints.clear();
            for (const auto& p : pts) {
                if (p.size() != 2) throw ConfigError("config.leader.waypoints: each entry needs [x, y]");
                w.leader.waypoints.push_back(Point{p[0], p[1]});
            }
        }
        leader.finish();
        if (!(w.leader.v_max >= 0.0)) throw ConfigError("config.leader.v_max: must be nonnegative");
        if (w.leader.reversal_prob < 0.0 || w.leader.reversal_prob > 1.0) {
            throw ConfigError("config.leader.reversal_prob: must lie in [0, 1]");
        }
    }

    if (root.has("channel")) {
        detail::StrictObject ch(root.take("channel"), "config.channel");
        ch.get("p_t_dbm", w.channel.p_t_dbm);
        ch.get("l_ref_db", w.channel.l_ref_db);
        ch.get("d_ref_m", w.channel.d_ref);
        ch.get("eta", w.channel.eta);
        ch.get("shadow_sigma_db", w.channel.shadow_sigma_db);
        ch.get("slow_sigma_db", w.channel.slow_sigma_db);
        ch.get("p_ref_dbm", w.channel.p_ref_dbm);
        ch.finish();
        if (!(w.channel.eta > 0.0)) throw ConfigError("config.channel.eta: must be positive");
        if (!(w.channel.d_ref > 0.0)) throw ConfigError("config.channel.d_ref_m: must be positive");
        if (w.channel.shadow_sigma_db < 0.0) {
            throw ConfigError("config.channel.shadow_sigma_db: must be nonnegative");
        }
        if (w.channel.slow_sigma_db < 0.0) {
            throw ConfigError("config.channel.slow_sigma_db: must be nonnegative");
        }
    }

    if (root.has("sparsity")) {
        detail::StrictObject sp(root.take("sparsity"), "config.sparsity");
        sp.get("drop_prob", w.sparsity.drop_prob);
        sp.get("gap_rate", w.sparsity.gap_rate);
        sp.get("mean_gap_width_deg", w.sparsity.mean_gap_width_deg);
        sp.finish();
        if (w.sparsity.drop_prob < 0.0 || w.sparsity.drop_prob > 1.0) {
            throw ConfigError("config.sparsity.drop_prob: must lie in [0, 1]");
        }
        if (w.sparsity.gap_rate < 0.0) throw ConfigError("config.sparsity.gap_rate: must be nonnegative");
    }

    if (root.has("multipath")) {
        detail::StrictObject mp(root.take("multipath"), "config.multipath");
        if (mp.has("scenario")) {
            std::string sc;
            mp.get("scenario", sc);
            w.multipath.scenario =
                detail::parse_enum<MultipathScenario>(sc,
                                                      {{"los", MultipathScenario::los},
                                                       {"strong", MultipathScenario::strong_multipath},
                                                       {"weak", MultipathScenario::weak_multipath}},
                                                      "config.multipath.scenario");
        }
        mp.get("secondary_gain_db", w.multipath.secondary_gain_db);
        mp.get("los_radius_m", w.multipath.los_radius);
        mp.get("path_length_m", w.multipath.path_length_m);
        mp.get("offset_min_deg", w.multipath.offset_min_deg);
        mp.get("offset_max_deg", w.multipath.offset_max_deg);
        mp.finish();
        if (w.multipath.offset_max_deg < w.multipath.offset_min_deg) {
            throw ConfigError("config.multipath: offset_max_deg below offset_min_deg");
        }
    }

    if (root.has("oracle")) {
        detail::StrictObject ora(root.take("oracle"), "config.oracle");
        ora.get("dist_bias_m", w.oracle.dist_bias_m);
        double deg;
        if (ora.has("angle_bias_deg")) {
            ora.get("angle_bias_deg", deg);
            w.oracle.angle_bias_rad = deg_to_rad(deg);
        }
        ora.get("dist_sigma_m", w.oracle.dist_sigma_m);
        if (ora.has("angle_sigma_deg")) {
            ora.get("angle_sigma_deg", deg);
            w.oracle.angle_sigma_rad = deg_to_rad(deg);
        }
        ora.finish();
        if (w.oracle.dist_sigma_m < 0.0 || w.oracle.angle_sigma_rad < 0.0) {
            throw ConfigError("config.oracle: sigmas must be nonnegative");
        }
    }

    if (root.has("policy")) {
        detail::StrictObject pol(root.take("policy"), "config.policy");
        if (pol.has("strategy")) {
            std::string s;
            pol.get("strategy", s);
            w.policy.strategy = detail::parse_enum<Strategy>(s,
                                                             {{"baseline", Strategy::baseline},
                                                              {"optimistic", Strategy::optimistic},
                                                              {"pragmatic", Strategy::pragmatic}},
                                                             "config.policy.strategy");
        }
        if (pol.has("aoa_method")) {
            std::string s;
            pol.get("aoa_method", s);
            w.policy.aoa_method = detail::parse_enum<AoaMethod>(s,
                                                                {{"basic", AoaMethod::basic},
                                                                 {"clustering", AoaMethod::clustering},
                                                                 {"weighted", AoaMethod::weighted}},
                                                                "config.policy.aoa_method");
        }
        pol.get("v_f_max", w.policy.v_f_max);
        pol.get("escape_enabled", w.policy.escape_enabled);
        pol.get("stall_window", w.policy.stall_window);
        pol.get("stall_eps", w.policy.stall_eps);
        pol.get("cooldown", w.policy.cooldown);
        pol.finish();
        if (!(w.policy.v_f_max > 0.0)) throw ConfigError("config.policy.v_f_max: must be positive");
        if (w.policy.stall_window < 1) throw ConfigError("config.policy.stall_window: must be >= 1");
        if (w.policy.cooldown < 0) throw ConfigError("config.policy.cooldown: must be nonnegative");
    }

    root.finish();
    if (w.slots <= 0) throw ConfigError("config.slots: must be positive");
    if (!(w.initial_distance > 0.0)) throw ConfigError("config.initial_distance_m: must be positive");
    if (!(w.d_th > 0.0)) throw ConfigError("config.d_th_m: must be positive");
    return w;
}

inline WorldConfig load_world_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_world_config(j);
}

}  // namespace rssitrack

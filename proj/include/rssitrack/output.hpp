#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rssitrack/sim.hpp"

namespace rssitrack {

class OutputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

// Writes via a temp file and renames, so readers never see partial output.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw OutputError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw OutputError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw OutputError("rename failed: " + path.string() + " (" + ec.message() + ")");
}

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::baseline: return "baseline";
        case Strategy::optimistic: return "optimistic";
        case Strategy::pragmatic: return "pragmatic";
    }
    return "unknown";
}

inline std::string episode_csv(const EpisodeLog& log, bool timestamp = true) {
    std::ostringstream os;
    os << std::setprecision(10);
    if (timestamp) os << "# generated " << iso8601_now() << '\n';
    os << "# seed=" << log.seed << " strategy=" << strategy_name(log.strategy) << " dt=" << log.dt << '\n';
    os << "slot,leader_x,leader_y,bot_x,bot_y,bot_heading,d_true,theta_true,leader_speed,"
          "present_bins,d_obs,theta_obs,v_rel_obs,v_leader_obs,d_est,v_rel_est,rotate_cmd,"
          "v_cmd,v_achieved,obstacle_hit,randomized\n";
    for (const SlotRecord& r : log.slots) {
        os << r.slot << ',' << r.leader_x << ',' << r.leader_y << ',' << r.bot_x << ',' << r.bot_y << ','
           << r.bot_heading << ',' << r.d_true << ',' << r.theta_true << ',' << r.leader_speed << ','
           << r.present_bins << ',' << r.d_obs << ',' << r.theta_obs << ',' << r.v_rel_obs << ','
           << r.v_leader_obs << ',' << r.d_est << ',' << r.v_rel_est << ',' << r.rotate_cmd << ','
           << r.v_cmd << ',' << r.v_achieved << ',' << (r.obstacle_hit ? 1 : 0) << ','
           << (r.randomized ? 1 : 0) << '\n';
    }
    return os.str();
}

inline std::string cdf_csv(const std::vector<double>& sorted, bool timestamp = true) {
    std::ostringstream os;
    os << std::setprecision(10);
    if (timestamp) os << "# generated " << iso8601_now() << '\n';
    os << "value,cum_prob\n";
    const std::size_t n = sorted.size();
    for (std::size_t i = 0; i < n; ++i) {
        os << sorted[i] << ',' << static_cast<double>(i + 1) / n << '\n';
    }
    return os.str();
}

inline nlohmann::json metrics_json(const Metrics& m, double d_th) {
    nlohmann::json j;
    j["p_within_threshold"] = m.p_within;
    j["threshold_m"] = d_th;
    j["mean_distance_m"] = m.mean_distance;
    if (std::isfinite(m.path_ratio)) j["path_ratio"] = m.path_ratio;
    if (std::isfinite(m.success_rate)) j["success_rate"] = m.success_rate;
    j["slots"] = m.distance_sorted.size();
    auto summary = [](const std::vector<double>& v) {
        nlohmann::json s;
        s["count"] = v.size();
        if (!v.empty()) {
            s["median"] = quantile(v, 0.5);
            s["p90"] = quantile(v, 0.9);
            s["max"] = v.back();
        }
        return s;
    };
    j["err_dist_m"] = summary(m.err_dist_sorted);
    j["err_angle_rad"] = summary(m.err_angle_sorted);
    j["err_speed_mps"] = summary(m.err_speed_sorted);
    return j;
}

}  // namespace rssitrack

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rssitrack/config.hpp"
#include "rssitrack/lqg.hpp"
#include "rssitrack/output.hpp"
#include "rssitrack/sim.hpp"
#include "rssitrack/tdoa.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitSolver = 4;
constexpr int kExitOther = 1;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int episodes = 10;
    bool no_timestamp = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_episodes = true) {
    cmd->add_option("--config", o.config_path, "scenario config (JSON)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "base RNG seed");
    if (with_episodes) cmd->add_option("--episodes", o.episodes, "episodes per setting");
    cmd->add_flag("--no-timestamp", o.no_timestamp, "omit timestamp headers from outputs");
}

rssitrack::WorldConfig load_or_default(const CommonOpts& o) {
    if (o.config_path.empty()) return rssitrack::WorldConfig{};
    return rssitrack::load_world_config(o.config_path);
}

std::vector<rssitrack::EpisodeLog> run_batch(const rssitrack::WorldConfig& w, std::uint64_t seed,
                                             int episodes) {
    std::vector<rssitrack::EpisodeLog> logs;
    logs.reserve(episodes);
    for (int e = 0; e < episodes; ++e) logs.push_back(rssitrack::run_episode(w, seed + e));
    return logs;
}

void write_json(const std::filesystem::path& path, nlohmann::json j, bool no_timestamp) {
    if (!no_timestamp) j["generated"] = rssitrack::iso8601_now();
    rssitrack::atomic_write(path, j.dump(2) + "\n");
}

int cmd_run(const CommonOpts& o) {
    const rssitrack::WorldConfig w = load_or_default(o);
    const auto logs = run_batch(w, o.seed, o.episodes);
    const std::filesystem::path out(o.out_dir);
    for (std::size_t i = 0; i < logs.size(); ++i) {
        std::ostringstream name;
        name << "episode_" << std::setw(3) << std::setfill('0') << i << ".csv";
        rssitrack::atomic_write(out / name.str(), rssitrack::episode_csv(logs[i], !o.no_timestamp));
    }
    const rssitrack::Metrics m = rssitrack::compute_metrics(logs, w.d_th);
    write_json(out / "metrics.json", rssitrack::metrics_json(m, w.d_th), o.no_timestamp);
    rssitrack::atomic_write(out / "cdf_distance.csv", rssitrack::cdf_csv(m.distance_sorted, !o.no_timestamp));
    rssitrack::atomic_write(out / "cdf_err_dist.csv", rssitrack::cdf_csv(m.err_dist_sorted, !o.no_timestamp));
    rssitrack::atomic_write(out / "cdf_err_angle.csv",
                            rssitrack::cdf_csv(m.err_angle_sorted, !o.no_timestamp));
    rssitrack::atomic_write(out / "cdf_err_speed.csv",
                            rssitrack::cdf_csv(m.err_speed_sorted, !o.no_timestamp));
    std::cout << "episodes=" << logs.size() << " p_within=" << m.p_within
              << " mean_distance=" << m.mean_distance << '\n';
    return kExitOk;
}

int cmd_sweep_leader_speed(const CommonOpts& o) {
    rssitrack::WorldConfig w = load_or_default(o);
    nlohmann::json rows = nlohmann::json::array();
    for (double v_l : {1.0, 2.0, 3.0}) {
        w.leader.v_max = v_l;
        w.policy.v_f_max = 1.8 * v_l;
        const auto logs = run_batch(w, o.seed, o.episodes);
        const rssitrack::Metrics m = rssitrack::compute_metrics(logs, w.d_th);
        rows.push_back({{"v_leader_max", v_l},
                        {"v_follower_max", w.policy.v_f_max},
                        {"p_within", m.p_within},
                        {"mean_distance_m", m.mean_distance}});
        std::cout << "v_l=" << v_l << " p_within=" << m.p_within << '\n';
    }
    write_json(std::filesystem::path(o.out_dir) / "sweep_leader_speed.json", {{"rows", rows}},
               o.no_timestamp);
    return kExitOk;
}

int cmd_sweep_follower_speed(const CommonOpts& o) {
    rssitrack::WorldConfig w = load_or_default(o);
    const double v_l = w.leader.v_max;
    nlohmann::json rows = nlohmann::json::array();
    for (double ratio : {1.2, 1.4, 1.6, 1.8, 2.0}) {
        w.policy.v_f_max = ratio * v_l;
        const auto logs = run_batch(w, o.seed, o.episodes);
        double early = 0.0, late = 0.0;
        std::size_t n_early = 0, n_late = 0;
        for (const auto& log : logs) {
            for (const auto& r : log.slots) {
                if (r.slot < 100) {
                    early += r.d_true;
                    ++n_early;
                } else if (r.slot >= 200) {
                    late += r.d_true;
                    ++n_late;
                }
            }
        }
        const rssitrack::Metrics m = rssitrack::compute_metrics(logs, w.d_th);
        rows.push_back({{"speed_ratio", ratio},
                        {"p_within", m.p_within},
                        {"mean_distance_early_m", early / n_early},
                        {"mean_distance_late_m", late / n_late}});
        std::cout << "ratio=" << ratio << " early=" << early / n_early << " late=" << late / n_late
                  << '\n';
    }
    write_json(std::filesystem::path(o.out_dir) / "sweep_follower_speed.json", {{"rows", rows}},
               o.no_timestamp);
    return kExitOk;
}

int cmd_controlled_error(const CommonOpts& o) {
    const rssitrack::WorldConfig base = load_or_default(o);
    nlohmann::json angle_rows = nlohmann::json::array();
    for (double bias_deg : {-40.0, -20.0, 0.0, 20.0, 40.0}) {
        const rssitrack::Metrics m = rssitrack::run_controlled_error(
            0.0, rssitrack::deg_to_rad(bias_deg), base, o.episodes, o.seed);
        angle_rows.push_back({{"angle_bias_deg", bias_deg}, {"mean_distance_m", m.mean_distance}});
        std::cout << "angle_bias=" << bias_deg << " mean_distance=" << m.mean_distance << '\n';
    }
    nlohmann::json dist_rows = nlohmann::json::array();
    for (double bias_m : {-1.0, 0.0, 1.0}) {
        const rssitrack::Metrics m = rssitrack::run_controlled_error(bias_m, 0.0, base, o.episodes, o.seed);
        dist_rows.push_back({{"dist_bias_m", bias_m}, {"mean_distance_m", m.mean_distance}});
        std::cout << "dist_bias=" << bias_m << " mean_distance=" << m.mean_distance << '\n';
    }
    write_json(std::filesystem::path(o.out_dir) / "controlled_error.json",
               {{"angle_bias", angle_rows}, {"dist_bias", dist_rows}}, o.no_timestamp);
    return kExitOk;
}

int cmd_sampling_rate(const CommonOpts& o, int trials) {
    const rssitrack::WorldConfig w = load_or_default(o);
    const std::vector<int> rates{200, 100, 40};
    const auto stats = rssitrack::run_sampling_sweep(rates, trials, 5.0, 30.0, w.channel, w.pattern,
                                                     o.seed);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : stats) {
        rows.push_back({{"bins", s.rate},
                        {"mean_angle_err_deg", s.mean_angle_err_deg},
                        {"ci95_angle_deg", s.ci95_angle_deg},
                        {"mean_dist_err_m", s.mean_dist_err_m},
                        {"ci95_dist_m", s.ci95_dist_m}});
        std::cout << "bins=" << s.rate << " angle_err=" << s.mean_angle_err_deg
                  << " dist_err=" << s.mean_dist_err_m << '\n';
    }
    write_json(std::filesystem::path(o.out_dir) / "sampling_rate.json", {{"rows", rows}}, o.no_timestamp);
    return kExitOk;
}

int cmd_nlos_study(const CommonOpts& o) {
    rssitrack::WorldConfig w = load_or_default(o);
    if (o.config_path.empty()) {
        w.multipath.scenario = rssitrack::MultipathScenario::weak_multipath;
    }
    nlohmann::json rows = nlohmann::json::array();
    for (bool escape : {false, true}) {
        w.policy.escape_enabled = escape;
        const auto logs = run_batch(w, o.seed, o.episodes);
        const rssitrack::Metrics m = rssitrack::compute_metrics(logs, w.d_th);
        rows.push_back({{"escape_enabled", escape}, {"success_rate", m.success_rate}});
        std::cout << "escape=" << (escape ? "on" : "off") << " success_rate=" << m.success_rate << '\n';
    }
    write_json(std::filesystem::path(o.out_dir) / "nlos_study.json", {{"rows", rows}}, o.no_timestamp);
    return kExitOk;
}

int cmd_tdoa_check(const CommonOpts& o, int trials, double loss_prob) {
    auto rng = rssitrack::make_stream(o.seed, "tdoa-cli");
    std::uniform_real_distribution<double> dist_draw(2.0, 10.0);
    std::uniform_int_distribution<int> angle_draw(0, rssitrack::kRangingOrientations - 1);
    const rssitrack::RangingConfig cfg;
    const rssitrack::RangingLink link{loss_prob};
    int ok = 0, fixes = 0;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double d = dist_draw(rng);
        const double theta = rssitrack::orientation_angle_rad(angle_draw(rng));
        const auto values = rssitrack::run_ranging_sweep(d, theta, true, link, cfg, rng);
        const auto fix = rssitrack::reconstruct(values, cfg);
        if (!fix) continue;
        ++fixes;
        const double err = std::abs(fix->distance_m - d);
        worst = std::max(worst, err);
        if (err <= 0.20) ++ok;
    }
    nlohmann::json j{{"trials", trials},
                     {"fixes", fixes},
                     {"within_20cm", fixes ? static_cast<double>(ok) / fixes : 0.0},
                     {"worst_err_m", worst}};
    write_json(std::filesystem::path(o.out_dir) / "tdoa_check.json", j, o.no_timestamp);
    std::cout << "fixes=" << fixes << "/" << trials << " within_20cm=" << j["within_20cm"] << '\n';
    return kExitOk;
}

int cmd_gains(const CommonOpts& o) {
    const rssitrack::WorldConfig w = load_or_default(o);
    const rssitrack::ControllerConfig cfg =
        w.controller_override ? *w.controller_override
                              : rssitrack::make_controller_config(w.timing.dt(), w.leader.v_max,
                                                                  w.policy.v_f_max, w.policy.strategy);
    const rssitrack::GainSolution g = rssitrack::solve_gains(cfg);
    nlohmann::json j;
    auto mat = [](const Eigen::Matrix3d& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
        return rows;
    };
    j["filter_gain"] = mat(g.k);
    j["control_gain"] = mat(g.l);
    j["residual_filter"] = g.residual_filter;
    j["residual_control"] = g.residual_control;
    j["closed_loop_spectral_radius"] = rssitrack::closed_loop_spectral_radius(cfg, g);
    write_json(std::filesystem::path(o.out_dir) / "gains.json", j, o.no_timestamp);
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSSI-based relative tracking simulator"};
    app.require_subcommand(1);

    CommonOpts run_o, lead_o, foll_o, err_o, rate_o, nlos_o, tdoa_o, gains_o;
    int rate_trials = 2000;
    int tdoa_trials = 200;
    double tdoa_loss = 0.05;

    add_common(app.add_subcommand("run", "simulate episodes and dump logs + metrics"), run_o);
    add_common(app.add_subcommand("sweep-leader-speed", "p_within vs leader speed"), lead_o);
    add_common(app.add_subcommand("sweep-follower-speed", "tracking vs speed-advantage ratio"), foll_o);
    add_common(app.add_subcommand("controlled-error", "tracking vs injected observation bias"), err_o);
    auto* rate_cmd = app.add_subcommand("sampling-rate", "estimation error vs bins per sweep");
    add_common(rate_cmd, rate_o, false);
    rate_cmd->add_option("--trials", rate_trials, "sweeps per rate");
    add_common(app.add_subcommand("nlos-study", "catch rate in clutter, with/without escape"), nlos_o);
    auto* tdoa_cmd = app.add_subcommand("tdoa-check", "acoustic ranging accuracy");
    add_common(tdoa_cmd, tdoa_o, false);
    tdoa_cmd->add_option("--trials", tdoa_trials, "ranging sweeps");
    tdoa_cmd->add_option("--loss-prob", tdoa_loss, "per-message loss probability");
    add_common(app.add_subcommand("gains", "solve and print controller gains"), gains_o, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand("run")) return cmd_run(run_o);
        if (app.got_subcommand("sweep-leader-speed")) return cmd_sweep_leader_speed(lead_o);
        if (app.got_subcommand("sweep-follower-speed")) return cmd_sweep_follower_speed(foll_o);
        if (app.got_subcommand("controlled-error")) return cmd_controlled_error(err_o);
        if (app.got_subcommand("sampling-rate")) return cmd_sampling_rate(rate_o, rate_trials);
        if (app.got_subcommand("nlos-study")) return cmd_nlos_study(nlos_o);
        if (app.got_subcommand("tdoa-check")) return cmd_tdoa_check(tdoa_o, tdoa_trials, tdoa_loss);
        if (app.got_subcommand("gains")) return cmd_gains(gains_o);
        std::cerr << "no subcommand selected\n";
        return kExitUsage;
    } catch (const rssitrack::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const rssitrack::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
}

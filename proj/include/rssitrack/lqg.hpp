#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rssitrack/angles.hpp"

namespace rssitrack {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tracked relative state: range, closing speed, and boresight offset of the
// leader in the follower's body frame.
struct RelativeState {
    double d_e = 0.0;
    double v_rel_e = 0.0;
    double theta_e = 0.0;

    Eigen::Vector3d vec() const { return {d_e, v_rel_e, theta_e}; }
    static RelativeState from_vec(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

inline RelativeState init_state(double d0) {
    if (!(d0 >= 0.0)) throw std::invalid_argument("init_state: negative initial distance");
    return RelativeState{d0, 0.0, 0.0};
}

// Per-slot measurement vector in state order.
struct ObservationVector {
    double d_m = 0.0;
    double v_rel_m = 0.0;
    double theta_m = 0.0;

    Eigen::Vector3d vec() const { return {d_m, v_rel_m, theta_m}; }
};

// Output of one controller step: rotate first, then translate at v_f_next.
struct ControlDecision {
    double rotate_by = 0.0;
    double v_f_next = 0.0;
    Eigen::Vector3d u = Eigen::Vector3d::Zero();
};

// Discrete model over one slot of length dt:
//   d[n+1]     = d[n] - dt * (v_rel[n] + u2[n])
//   v_rel[n+1] = v_rel[n] + u2[n]
//   theta[n+1] = theta[n] - u3[n]
inline Eigen::Matrix3d dynamics_a(double dt) {
    Eigen::Matrix3d a;
    a << 1.0, -dt, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;
    return a;
}

inline Eigen::Matrix3d dynamics_b(double dt) {
    Eigen::Matrix3d b;
    b << 0.0, -dt, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0;
    return b;
}

struct ControllerConfig {
    Eigen::Matrix3d a = dynamics_a(1.0);
    Eigen::Matrix3d b = dynamics_b(1.0);
    Eigen::Matrix3d c = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d q = Eigen::Matrix3d::Identity();        // state cost
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();        // control cost
    Eigen::Matrix3d sigma_zz = Eigen::Matrix3d::Identity(); // process noise
    Eigen::Matrix3d sigma_ww = Eigen::Matrix3d::Identity(); // measurement noise
    double dt = 1.0;
};

enum class Strategy { baseline, optimistic, pragmatic };

// Stock weights: range error dominates the cost proportionally to how fast
// the leader can run; measurement trust depends on the observation strategy.
inline ControllerConfig make_controller_config(double dt, double v_leader_max, double v_follower_max,
                                               Strategy strategy) {
    if (!(dt > 0.0)) throw std::invalid_argument("make_controller_config: dt must be positive");
    ControllerConfig cfg;
    cfg.dt = dt;
    cfg.a = dynamics_a(dt);
    cfg.b = dynamics_b(dt);
    cfg.q = Eigen::Vector3d(10.0 * v_leader_max, 0.1, 1.0).asDiagonal();
    cfg.h = Eigen::Matrix3d::Identity();
    cfg.sigma_zz = Eigen::Matrix3d::Identity();
    if (strategy == Strategy::pragmatic) {
        // The range/speed cross term is capped so the block stays positive
        // semidefinite even when the leader outclasses the follower.
        const double cross = std::min(v_leader_max, v_follower_max);
        cfg.sigma_ww << 1.0, cross, 0.0,
                        cross, v_follower_max * v_follower_max, 0.0,
                        0.0, 0.0, 0.1;
    } else {
        cfg.sigma_ww = Eigen::Vector3d(4.0, 2.0, 1.0).asDiagonal();
    }
    return cfg;
}

struct GainSolution {
    Eigen::Matrix3d k;          // stationary filter gain
    Eigen::Matrix3d l;          // state-feedback gain
    Eigen::Matrix3d p_filter;   // prior estimate covariance
    Eigen::Matrix3d p_control;  // cost-to-go matrix
    double residual_filter = 0.0;
    double residual_control = 0.0;
};

namespace detail {

inline double inf_norm(const Eigen::Matrix3d& m) { return m.cwiseAbs().maxCoeff(); }

// Control-form discrete Riccati fixed point:
//   P = A'PA - A'PB (H + B'PB)^-1 B'PA + Q
// iterated as the Riccati difference equation. Only (H + B'PB) is inverted,
// so semidefinite weight matrices elsewhere are fine.
inline Eigen::Matrix3d solve_dare(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b,
                                  const Eigen::Matrix3d& q, const Eigen::Matrix3d& r,
                                  const char* what) {
    Eigen::Matrix3d p = q;
    constexpr int kMaxIters = 200000;
    for (int i = 0; i < kMaxIters; ++i) {
        const Eigen::Matrix3d btp = b.transpose() * p;
        const Eigen::Matrix3d gain_denom = r + btp * b;
        const Eigen::Matrix3d next =
            a.transpose() * p * a -
            a.transpose() * p * b * gain_denom.ldlt().solve(btp * a) + q;
        if (!next.allFinite()) {
            throw SolverError(std::string(what) + ": Riccati iteration diverged");
        }
        const double delta = inf_norm(next - p);
        p = next;
        if (delta < 1e-14 * std::max(1.0, inf_norm(p))) {
            return p;
        }
    }
    throw SolverError(std::string(what) + ": Riccati iteration did not converge");
}

inline double dare_residual(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b, const Eigen::Matrix3d& q,
                            const Eigen::Matrix3d& r, const Eigen::Matrix3d& p) {
    const Eigen::Matrix3d btp = b.transpose() * p;
    const Eigen::Matrix3d res =
        a.transpose() * p * a - a.transpose() * p * b * (r + btp * b).ldlt().solve(btp * a) + q - p;
    return inf_norm(res);
}

}  // namespace detail

// Stationary gains for the given configuration. Both Riccati solutions are
// verified to a 1e-9 residual; configs that cannot reach that are rejected.
inline GainSolution solve_gains(const ControllerConfig& cfg) {
    GainSolution sol;
    // Filter Riccati is the control form on the dual pair (A', C').
    sol.p_filter = detail::solve_dare(cfg.a.transpose(), cfg.c.transpose(), cfg.sigma_zz, cfg.sigma_ww,
                                      "filter Riccati");
    sol.residual_filter = detail::dare_residual(cfg.a.transpose(), cfg.c.transpose(), cfg.sigma_zz,
                                                cfg.sigma_ww, sol.p_filter);
    const Eigen::Matrix3d innov = cfg.c * sol.p_filter * cfg.c.transpose() + cfg.sigma_ww;
    sol.k = innov.transpose().ldlt().solve(cfg.c * sol.p_filter.transpose()).transpose();

    sol.p_control = detail::solve_dare(cfg.a, cfg.b, cfg.q, cfg.h, "control Riccati");
    sol.residual_control = detail::dare_residual(cfg.a, cfg.b, cfg.q, cfg.h, sol.p_control);
    const Eigen::Matrix3d denom = cfg.h + cfg.b.transpose() * sol.p_control * cfg.b;
    sol.l = denom.ldlt().solve(cfg.b.transpose() * sol.p_control * cfg.a);

    if (!(sol.residual_filter < 1e-9) || !(sol.residual_control < 1e-9)) {
        throw SolverError("solve_gains: Riccati residual above 1e-9 (filter " +
                          std::to_string(sol.residual_filter) + ", control " +
                          std::to_string(sol.residual_control) + ")");
    }
    return sol;
}

inline double closed_loop_spectral_radius(const ControllerConfig& cfg, const GainSolution& sol) {
    const Eigen::Matrix3d m = cfg.a - cfg.b * sol.l;
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

// One-slot tracker/controller. Each step: predict with the previous control,
// correct with the new observation (boresight residual wrapped), command a
// rotation that consumes the whole angle estimate, then regulate range and
// closing speed. The follower speed for the next slot combines the assumed
// leader speed with the predicted closing speed, magnitude-capped.
class LqgController {
  public:
    LqgController(const ControllerConfig& cfg, const GainSolution& gains, double v_f_max, double d0)
        : cfg_(cfg), gains_(gains), v_f_max_(v_f_max), post_(init_state(d0)), predicted_(post_) {
        if (!(v_f_max > 0.0)) throw std::invalid_argument("LqgController: v_f_max must be positive");
        u_prev_.setZero();
    }

    LqgController(const ControllerConfig& cfg, double v_f_max, double d0)
        : LqgController(cfg, solve_gains(cfg), v_f_max, d0) {}

    ControlDecision step(const ObservationVector& obs, double v_leader_next) {
        const Eigen::Vector3d prior = cfg_.a * post_.vec() + cfg_.b * u_prev_;
        Eigen::Vector3d innovation = obs.vec() - cfg_.c * prior;
        innovation(2) = wrap_angle(innovation(2));
        Eigen::Vector3d post = prior + gains_.k * innovation;
        post(0) = std::max(0.0, post(0));  // range cannot be negative

        ControlDecision decision;
        decision.rotate_by = wrap_angle(post(2));
        post(2) = 0.0;  // the rotation consumes the angle estimate
        decision.u = -(gains_.l * post);
        const Eigen::Vector3d next = cfg_.a * post + cfg_.b * decision.u;
        decision.v_f_next = std::clamp(v_leader_next + next(1), -v_f_max_, v_f_max_);

        post_ = RelativeState::from_vec(post);
        u_prev_ = decision.u;
        predicted_ = RelativeState::from_vec(next);
        predicted_.d_e = std::max(0.0, predicted_.d_e);
        return decision;
    }

    const RelativeState& state() const { return post_; }

    // Prior for the upcoming slot (feeds the next speed observation).
    const RelativeState& predicted() const { return predicted_; }

    const GainSolution& gains() const { return gains_; }

  private:
    ControllerConfig cfg_;
    GainSolution gains_;
    double v_f_max_;
    RelativeState post_;
    RelativeState predicted_;
    Eigen::Vector3d u_prev_;
};

}  // namespace rssitrack

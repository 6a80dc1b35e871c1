#pragma once

// Receding-horizon planner over the slow energy states y = (E_B, E_S).
//
// The abstract model is affine in the battery current reference:
//   E_B⁺ = E_B + T_s λ_B V_nom I_B
//   E_S⁺ = E_S + T_s λ_S V_nom (−I_B − d̂)
// so the horizon condenses into a QP over (I_B[0], ..., I_B[N−1]).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "laycon/qp.hpp"

namespace laycon::mpc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct PlannerConfig {
  int horizon = 20;
  double t_s = 0.1;
  double q_weight = 1.0;
  double e_b_goal = 5.0;
  double v_nom = 400.0;
  double lambda_b = 1.0 / 400.0;  // energy conversion, 1/V
  double lambda_s = 1.0 / 400.0;
  double i_b_max = 1.5;
  double i_s_max = 12.0;
  Interval e_b_range{-10.0, 20.0};
  Interval e_s_range{-100.0, 100.0};
  double slew_bound = 1.0;
  double tighten_eps_e = 0.0;
  Eigen::Vector2d r_bar = Eigen::Vector2d::Zero();  // (voltage, battery current)

  /// Throws Error on N < 1, T_s ≤ 0, q < 0 or negative bounds.
  void validate() const;
  double c_b() const { return t_s * lambda_b * v_nom; }
  double c_s() const { return t_s * lambda_s * v_nom; }
};

/// y = (E_B, E_S)
Eigen::Vector2d abstract_step(const Eigen::Vector2d& y, double i_b_ref, double d_hat,
                              const PlannerConfig& cfg);

/// Condensed QP; d_forecast must hold at least N samples.
qp::QpProblem build_qp(const Eigen::Vector2d& y, std::span<const double> d_forecast,
                       double r_prev, const PlannerConfig& cfg);

/// Σ_j q·(E_B[j] − goal)², j = 1..N, along the plan starting at y.
double tracking_cost(const Eigen::Vector2d& y, const Eigen::VectorXd& plan,
                     const PlannerConfig& cfg);

struct PlanResult {
  Eigen::Vector2d r_k = Eigen::Vector2d::Zero();  // (V_nom, I_B_ref)
  bool feasible = false;
  std::optional<double> v_n_star;
  bool fallback_used = false;
  Eigen::Vector2d prediction = Eigen::Vector2d::Zero();  // abstract y one step ahead under r_k
};

PlanResult plan(const Eigen::Vector2d& y, std::span<const double> d_forecast, double r_prev,
                const PlannerConfig& cfg, qp::QpSolver& solver);

struct PlannerIssData {
  double lambda_min_p = 1.0;
  double lambda_max_p = 1.0;
  double l_v = 0.0;
  double lambda_min_q = 1.0;
};

/// ε_T = sqrt((λ_max/λ_min)·(L_V/λ_min(Q))·ε_E)
double planner_iss_bound(const PlannerIssData& data, double eps_e);

/// Empirical lower estimate of the value-function Lipschitz constant over the
/// SOC box: seeded uniform samples, zero load forecast, r_prev = 0, and the
/// largest difference quotient over pairs closer than `sample_radius`.
/// Throws AllInfeasible when no sample is feasible.
double estimate_lipschitz(const PlannerConfig& cfg, int sample_count, double sample_radius,
                          std::uint64_t seed, qp::QpSolver& solver);

struct DescentSample {
  double v_star = 0.0;
  double tracking_error = 0.0;  // |ŷ_{k+1|k} − goal| on the battery channel
};

/// V*_{k+1} − V*_k ≤ −λ_min(Q)·err_k² + L_V·ε_E, per consecutive pair.
std::vector<bool> descent_check(std::span<const DescentSample> traj, const PlannerIssData& data,
                                double eps_e);

}  // namespace laycon::mpc

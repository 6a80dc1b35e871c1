#pragma once

// Fixed-step simulation of the layered loop: planner sampled every T_s with
// zero-order hold, governor and plant integrated jointly with RK4.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "laycon/contracts.hpp"
#include "laycon/erg.hpp"
#include "laycon/hess.hpp"
#include "laycon/mpc.hpp"

namespace laycon::sim {

/// Classical four-stage update with everything but the state held fixed.
/// Throws NonFiniteState if the result is not finite.
template <typename Rhs, typename State>
State rk4_step(Rhs&& f, const State& x, double t, double h) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * h, State(x + 0.5 * h * k1));
  const State k3 = f(t + 0.5 * h, State(x + 0.5 * h * k2));
  const State k4 = f(t + h, State(x + h * k3));
  State out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) {
    throw NonFiniteState("rk4_step: non-finite state at t=" + std::to_string(t + h));
  }
  return out;
}

enum class DisturbanceMode { kNone, kMixed, kAdversarial };

DisturbanceMode disturbance_mode_from_string(const std::string& s);
const char* to_string(DisturbanceMode m);

/// W_max·(0.7 sin(15t) + 0.3ξ) with ξ ~ U[−1, 1] drawn from `stream`.
double disturbance_mixed(double t, double w_max, std::mt19937_64& stream);

/// W_max·sign(2eᵀPB), with sign(0) = +1.
double disturbance_adversarial(const Eigen::Vector2d& e, const numkit::SpdMatrix& p,
                               const Eigen::Vector2d& b, double w_max);

struct SimConfig {
  double h = 1e-3;
  double t_end = 4.0;
  double t_s = 0.1;
  std::uint64_t seed = 0;
  DisturbanceMode disturbance = DisturbanceMode::kMixed;
  double w_max = 3.0;
  bool erg_enabled = true;
  bool mpc_enabled = true;
  double r_v = 400.0;     // voltage reference (held when the planner is off)
  double r_i_b = 0.0;     // battery reference when the planner is off; r_{−1} otherwise
  hess::HessState x0 = hess::HessState::Zero();
  double v0 = 400.0;

  /// Throws Error on h ≤ 0, T_end ≤ 0 or T_s < h.
  void validate() const;
};

struct LayeredConfig {
  hess::HessParams plant;
  Eigen::Matrix2d lyap_r = Eigen::Matrix2d::Identity();
  hess::ErgMode constraint_set = hess::ErgMode::kFull;
  erg::ErgConfig erg;
  mpc::PlannerConfig planner;
  mpc::PlannerIssData planner_iss;
  contracts::ContractSpec spec;
  SimConfig sim;
  hess::LoadProfile load;
};

struct PlannerRecord {
  std::size_t step = 0;
  double t = 0.0;
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  Eigen::Vector2d prediction = Eigen::Vector2d::Zero();
  std::optional<double> v_n_star;
  bool fallback = false;
};

struct TrajectoryLog {
  std::vector<double> t, v_gr, i_s, i_b, e_s, e_b, v, r_v, r_ib, e1, e2, v_e, gamma_v, phi, w, d,
      u_s, u_b;
  std::vector<int> fallback;
  std::vector<PlannerRecord> planner;
  std::vector<std::string> warnings;

  std::size_t rows() const { return t.size(); }
};

struct MonitorReport {
  contracts::Verdicts a_env;   // per integration step
  contracts::Verdicts g_safe;  // per integration step
  contracts::Verdicts g_ref;   // per sample, k ≥ 1
  contracts::Verdicts g_track; // per sample period
  contracts::Verdicts a_mis;   // per sample, k ≥ 1
  contracts::Verdicts g_iss;   // per sample
  contracts::Verdicts descent; // per consecutive optimal pair
  std::vector<Eigen::Vector2d> w_tilde;
  std::optional<std::size_t> k_live;
  std::size_t phi_breaks = 0;  // Φ ≤ 0 at one step, Φ > 1e-9 at the next
  std::optional<std::size_t> first_phi_break;
  std::size_t fallback_count = 0;
};

/// Throws NonFiniteState or Error on invalid configuration.
std::pair<TrajectoryLog, MonitorReport> run_layered(const LayeredConfig& cfg);

}  // namespace laycon::sim

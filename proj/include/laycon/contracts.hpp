#pragma once

// Assume-guarantee clause checkers over completed trajectories, the budget
// check across layers, and the HESS energy-mismatch bound.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "laycon/iss_cert.hpp"

namespace laycon::contracts {

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  bool contains(const Eigen::VectorXd& x) const;
};

struct ContractSpec {
  double eps_e = 0.0;
  double eps_t = 0.0;
  Eigen::Vector2d eps_l = Eigen::Vector2d::Zero();  // (V, I_B)
  double eps_h = 0.0;
  Eigen::Vector2d r_bar = Eigen::Vector2d::Zero();  // (V, I_B)
  double w_max = 0.0;
  double t_s = 0.1;
  double delta = 0.1;
  Box x_safe;                                        // over (V_gr, I_S, I_B)
  Eigen::Vector2d u_bounds = Eigen::Vector2d::Zero();  // (Ū_S, Ū_B)
  double y_goal = 0.0;                               // battery energy goal

  /// Throws Error on negative tolerances or δ ≤ 0.
  void validate() const;
};

using Verdicts = std::vector<bool>;

/// Index of the first false entry.
std::optional<std::size_t> first_violation(const Verdicts& v);
std::size_t count_violations(const Verdicts& v);

/// |w| ≤ W_max per sample.
Verdicts check_A_env(std::span<const double> w, double w_max);

/// ‖r_k − r_{k−1}‖ ≤ r̄ componentwise for k ≥ 1; one verdict per step.
Verdicts check_G_ref(std::span<const Eigen::Vector2d> r_seq, const Eigen::Vector2d& r_bar);

/// (V_gr, I_S, I_B) ∈ X_safe and |u| ≤ (Ū_S, Ū_B) per integration sample, up to 1e-9.
Verdicts check_G_safe(std::span<const Eigen::Vector3d> x_traj,
                      std::span<const Eigen::Vector2d> u_traj, const ContractSpec& spec);

/// |h_r(x((k+1)T_s)) − r_k| ≤ ε_L componentwise.
Verdicts check_G_track(std::span<const Eigen::Vector2d> h_r_next,
                       std::span<const Eigen::Vector2d> r_seq, const Eigen::Vector2d& eps_l);

struct MismatchCheck {
  Verdicts verdicts;
  std::vector<Eigen::Vector2d> w_tilde;
};

/// w̃_k = y_k − prediction_{k−1} for k ≥ 1, checked in the max-norm.
MismatchCheck check_A_mis(std::span<const Eigen::Vector2d> y_samples,
                          std::span<const Eigen::Vector2d> predictions, double eps_e);

struct LivenessCheck {
  Verdicts verdicts;
  std::optional<std::size_t> k_live;
};

/// |y_k − y_goal| ≤ ε_T + δ; K_live is the first index from which every
/// later sample satisfies the band.
LivenessCheck check_G_iss(std::span<const double> y_seq, double y_goal, double eps_t,
                          double delta);

/// ε_E + ε_T + δ < ε_H
bool vertical_compat(double eps_e, double eps_t, double delta, double eps_h);

struct MismatchInputs {
  double z_peak = 0.0;
  double eta = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double delta = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double kappa_max = 0.0;
  double v_nom = 400.0;
  double lambda_b_energy = 1.0 / 400.0;
  double lambda_b_gain = 20.0;
  double lambda_s = 1.0 / 400.0;
  double i_b_max = 0.0;
  double i_s_max = 0.0;
  double c_bus = 1.0;
  double u_b_max = 0.0;
};

struct MismatchBound {
  double eps_e = 0.0;
  double delta_tr_b = 0.0;
  double d_ss_b = 0.0;
  double delta_tr_s = 0.0;
  double d_ss_s = 0.0;
  double tau2 = 0.0;
};

MismatchBound mismatch_bound_hess(const MismatchInputs& in);

struct CertificateReport {
  iss::TimingVerdict timing;
  bool vertical_compat = false;
  bool admissibility = false;
  double gamma_inf = 0.0;
  double v_bar_h = 0.0;
  double eps_e = 0.0;
  double eps_t = 0.0;
  bool all_ok = false;
};

/// Folds the numeric certificates into the well-posedness verdicts.
CertificateReport certificate_report(const ContractSpec& spec, double v_bar_h,
                                     const iss::SettlingTimes& settling, double gamma_inf,
                                     double eps_t, const MismatchBound& mismatch);

}  // namespace laycon::contracts

#pragma once

// Input-to-state stability certificates for the frozen tracking-error
// dynamics ė = Ae + Bw: ultimate sublevel thresholds, per-coordinate bounds,
// the linear ISS gain, overshoot calibration and the two-phase settling time.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "laycon/numkit.hpp"

namespace laycon::iss {

/// α(s) = c·sᵖ with c, p > 0 (class-K∞).
struct PowerLawK {
  double coefficient = 1.0;
  double exponent = 1.0;

  PowerLawK() = default;
  PowerLawK(double c, double p);

  double operator()(double s) const;
  double inverse(double y) const;
};

/// ᾱ(α⁻¹(σ(H_max))).
double ultimate_level_generic(const PowerLawK& alpha_bar, const PowerLawK& alpha,
                              const PowerLawK& sigma, double h_max);

struct OptimizedLevel {
  double v_bar_h = 0.0;
  double theta_star = 0.0;  // radians, canonicalised to [0, π)
  Eigen::Vector2d z_star = Eigen::Vector2d::Zero();
};

/// Largest V(e) = eᵀPe on the surface V̇(e, w) = 0 under the worst-case
/// disturbance |w| ≤ H_max, for a planar error space.
OptimizedLevel ultimate_level_optimized(const numkit::SpdMatrix& p, const numkit::SpdMatrix& r,
                                        const Eigen::Vector2d& b, double h_max);

/// sqrt(V̄_h · [P⁻¹]_ii)
double coordinate_bound(const numkit::SpdMatrix& p, double v_bar_h, Eigen::Index i);

/// Every coordinate bound at once.
Eigen::VectorXd coordinate_bounds(const numkit::SpdMatrix& p, double v_bar_h);

/// γ_ISS = m‖B‖/λ_e
double iss_gain(double m, double norm_b, double lambda_e);

/// ε = γ_ISS · H_max
double noise_floor(double gamma_iss, double h_max);

struct NormSample {
  double t = 0.0;
  double norm = 0.0;
};

/// Tightest m ≥ 1 such that ‖e(t)‖ ≤ m e^{−λt}‖e₀‖ + ε(1 − e^{−λt}) at every
/// sample. Returns 1 when ‖e₀‖ = 0.
double calibrate_overshoot(std::span<const NormSample> traj, double lambda_e, double epsilon,
                           double e0_norm);

/// Overshoot calibration with the noise floor tied to m through
/// ε(m) = m‖B‖H_max/λ_e; returns the unique fixed point of the calibration.
double calibrate_overshoot_consistent(std::span<const NormSample> traj, double lambda_e,
                                      double norm_b, double h_max, double e0_norm);

enum class SettlingMode { kAbsolute, kRelative };

struct SettlingInputs {
  double m = 1.0;
  double lambda_e = 1.0;
  double r_bar = 0.0;         // reference step bound of the governed channel
  double epsilon = 0.0;       // ISS noise floor
  double kappa_low = 1.0;     // κ_erg(1 − δ_rep)
  double r_low = 1.0;         // guaranteed-progress margin
  double delta = 0.1;         // settling tolerance
  double h_max = 0.0;
  double feedforward_residual = 0.0;  // M
  double gamma_iss = 0.0;
  SettlingMode mode = SettlingMode::kRelative;
};

struct SettlingTimes {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau_ll = 0.0;
  double z_peak = 0.0;
  double tau1_max = 0.0;
};

/// (1/λ_e)·ln(m·z_peak/δ) (absolute) or (1/λ_e)·ln(m·z_peak/(δ·ε)) (relative);
/// zero when the logarithm argument is at most one.
double decay_time(double m, double lambda_e, double z_peak, double delta, double epsilon,
                  SettlingMode mode);

SettlingTimes settling_time(const SettlingInputs& in);

struct TimingVerdict {
  bool settle_ok = false;  // T_s ≥ τ_LL
  double settle_slack = 0.0;
  bool window_ok = false;  // 0 ≤ T_s − τ₂ ≤ τ₁ᴹ
  double window_lower_slack = 0.0;
  double window_upper_slack = 0.0;
};

TimingVerdict timing_check(double t_s, const SettlingTimes& times);

}  // namespace laycon::iss

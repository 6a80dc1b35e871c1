#pragma once

// Battery + supercapacitor hybrid storage on a shared DC bus: plant model,
// low-level controllers, error coordinates, constraint rows and load profiles.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "laycon/erg.hpp"

namespace laycon::hess {

/// State layout (V_gr, I_S, I_B, E_S, E_B).
enum StateIndex : Eigen::Index { kVgr = 0, kIs = 1, kIb = 2, kEs = 3, kEb = 4 };
using HessState = Eigen::Matrix<double, 5, 1>;

struct HessParams {
  double c_bus = 1.0;              // F
  double lambda_s = 1.0 / 400.0;   // 1/V, supercap energy conversion
  double lambda_b_energy = 1.0 / 400.0;
  double lambda_b_gain = 20.0;     // 1/s, battery current loop
  double k1 = 35.0;
  double k2 = 12.0;
  double v_nom = 400.0;
  double v_min = 380.0;
  double v_max = 420.0;
  double i_s_max = 12.0;
  double i_b_max = 1.5;
  double u_s_max = 50.0;           // A/s
  double u_b_max = 30.0;           // A/s
  double rho_d = 6.0;              // A, load bound
  double d_bar_max = 0.0;          // reserved current for the lumped load in constraint rows
  double d_bar_dot_max = 0.0;      // reserved slew for the lumped load in constraint rows
  double kappa_bar = 0.0;          // |v̇| ≤ κ̄·Γ(v)

  /// Throws Error on nonpositive physical constants or a non-Hurwitz loop.
  void validate() const;
};

/// ẋ of the bus, both currents and both energies.
HessState plant_rhs(const HessState& x, const Eigen::Vector2d& u, double w, double d,
                    const HessParams& p);

/// u_B = −λ(I_B − I_B_ref)
double control_ub(double i_b, double i_b_ref, double lambda_b_gain);

/// u_S = −C·k₁·(V_gr − v) − k₂·(I_S + d̄) − d̄̇
double control_us(double v_gr, double i_s, double v, double d_bar, double d_bar_dot,
                  const HessParams& p);

/// e = (V_gr − v, (I_S + d̄)/C − v̇)
Eigen::Vector2d error_state(const HessState& x, double v, double v_dot, double d_bar,
                            const HessParams& p);

struct ErrorMatrices {
  Eigen::Matrix2d a;
  Eigen::Vector2d b;
  Eigen::Vector2d b_v;
};

/// A = [[0, 1], [−k₁, −k₂]], B = (0, 1/C), B_v = (0, 1). Throws NotHurwitz.
ErrorMatrices error_matrices(const HessParams& p);

enum class ErgMode { kFull, kScenarioBInputOnly };

ErgMode erg_mode_from_string(const std::string& s);
const char* to_string(ErgMode m);

/// Half-space rows over e = (e₁, e₂) with a scalar voltage reference.
std::vector<erg::HalfspaceConstraint> hess_constraints(const HessParams& p, ErgMode mode);

struct BatteryBounds {
  double r_bar_b = 0.0;
  double eps_l_ib = 0.0;
};

/// r̄_B = (Ū_B/λ)(1 − e^{−λT_s}), ε_L = (Ū_B/λ)e^{−λT_s}
BatteryBounds battery_interface_bounds(const HessParams& p, double t_s);

struct LoadSegment {
  enum class Kind { kConstant, kCubicRamp };
  double t_start = 0.0;
  double t_end = 0.0;
  Kind kind = Kind::kConstant;
  double from = 0.0;  // constant level, or ramp start value
  double to = 0.0;    // ramp end value (ignored for constants)
  double osc_amplitude = 0.0;
  double osc_frequency = 0.0;  // Hz
};

struct LoadSample {
  double d = 0.0;
  double d_dot = 0.0;
};

/// Piecewise load d(t). Ramps are cubic Hermite with zero end slopes; an
/// oscillation a·sin(2πf(t − t₀)) on a segment is windowed by 16s²(1 − s)²
/// so value and slope stay continuous across joins.
class LoadProfile {
 public:
  LoadProfile() = default;
  /// Throws Error if segments are empty, non-contiguous or not C¹ at joins.
  explicit LoadProfile(std::vector<LoadSegment> segments);

  static LoadProfile constant(double level, double t_end);

  LoadSample operator()(double t) const;
  double t_begin() const;
  double t_end() const;
  const std::vector<LoadSegment>& segments() const { return segments_; }

 private:
  std::vector<LoadSegment> segments_;
};

/// Throws OutOfSpan outside the profile span.
LoadSample load(double t, const LoadProfile& profile);

struct Outputs {
  Eigen::Vector2d h_r;  // (V_gr, I_B)
  Eigen::Vector2d h_y;  // (E_B, E_S)
};

Outputs outputs(const HessState& x);

}  // namespace laycon::hess

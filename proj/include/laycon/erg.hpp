#pragma once

// Explicit reference governor with quadratic Lyapunov thresholds.
//
// Constraints live in error space: cᵀe ≤ d0 − c_vᵀv − g·Γ(v), with the error
// normal c = (c_a, c_b) stacked. The g·Γ term covers rows whose margin
// reserves room for the governor's own motion; Γ then solves a fixed point.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "laycon/numkit.hpp"

namespace laycon::erg {

struct HalfspaceConstraint {
  Eigen::VectorXd c_a;  // error-position part of the normal
  Eigen::VectorXd c_b;  // error-rate part of the normal
  double d0 = 0.0;
  Eigen::VectorXd c_v;  // reference coupling
  double g_gamma = 0.0;
  std::string label;

  /// (c_a, c_b) stacked.
  Eigen::VectorXd normal() const;
};

struct ErgConfig {
  double kappa_erg = 1.0;
  double eta = 1.0;
  std::vector<double> eta_rep;  // one per constraint row; missing entries read as 0

  double delta_rep() const;
  /// Throws Error when κ_erg ≤ 0, η ≤ 0, any η_i < 0 or δ_rep ≥ 1.
  void validate() const;
};

/// d0 − c_vᵀv − g·Γ_prev
double margin(const HalfspaceConstraint& c, const Eigen::VectorXd& v, double gamma_prev = 0.0);

/// margin² / (cᵀP⁻¹c), or 0 when the margin is not positive.
double gamma_i(const HalfspaceConstraint& c, const Eigen::VectorXd& v, const numkit::SpdMatrix& p,
               double gamma_prev = 0.0);

/// min_i Γ_i(v). Rows with g > 0 are resolved by iterating Γ ← min_i Γ_i(v, Γ)
/// from the minimum over the g = 0 rows. An empty list gives +∞.
double gamma(const Eigen::VectorXd& v, const std::vector<HalfspaceConstraint>& constraints,
             const numkit::SpdMatrix& p, int fixed_point_iters = 5);

/// ρ_att(r, v): (r − v)/max(‖r − v‖, η).
Eigen::VectorXd attraction(const Eigen::VectorXd& r, const Eigen::VectorXd& v, double eta);

/// ρ = ρ_att + Σ_i −η_i ∇_vΓ_i/‖∇_vΓ_i‖.
Eigen::VectorXd navigation_field(const Eigen::VectorXd& r, const Eigen::VectorXd& v,
                                 const std::vector<HalfspaceConstraint>& constraints,
                                 const numkit::SpdMatrix& p, const ErgConfig& cfg);

/// v̇ = κ_erg · max(0, Γ(v) − V(e)) · ρ(r, v)
Eigen::VectorXd erg_rhs(const Eigen::VectorXd& e, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& r,
                        const std::vector<HalfspaceConstraint>& constraints,
                        const numkit::SpdMatrix& p, const ErgConfig& cfg);

/// Φ = eᵀPe − Γ(v)
double barrier(const Eigen::VectorXd& e, const Eigen::VectorXd& v,
               const std::vector<HalfspaceConstraint>& constraints, const numkit::SpdMatrix& p);

}  // namespace laycon::erg

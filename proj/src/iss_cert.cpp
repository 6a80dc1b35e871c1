#include "laycon/iss_cert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace laycon::iss {

PowerLawK::PowerLawK(double c, double p) : coefficient(c), exponent(p) {
  if (!(c > 0) || !(p > 0)) throw Error("PowerLawK: coefficient and exponent must be positive");
}

double PowerLawK::operator()(double s) const { return coefficient * std::pow(s, exponent); }

double PowerLawK::inverse(double y) const { return std::pow(y / coefficient, 1.0 / exponent); }

double ultimate_level_generic(const PowerLawK& alpha_bar, const PowerLawK& alpha,
                              const PowerLawK& sigma, double h_max) {
  if (h_max < 0) throw Error("ultimate_level_generic: H_max must be nonnegative");
  return alpha_bar(alpha.inverse(sigma(h_max)));
}

namespace {

struct LevelObjective {
  const Eigen::Matrix2d& p;
  const Eigen::Matrix2d& r;
  const Eigen::Vector2d& b_in;
  double h_max;

  double radius(double theta) const {
    const Eigen::Vector2d b(std::cos(theta), std::sin(theta));
    return 2.0 * std::abs(b.dot(p * b_in)) * h_max / b.dot(r * b);
  }

  double operator()(double theta) const {
    const Eigen::Vector2d b(std::cos(theta), std::sin(theta));
    const double a = radius(theta);
    return a * a * b.dot(p * b);
  }
};

}  // namespace

OptimizedLevel ultimate_level_optimized(const numkit::SpdMatrix& p, const numkit::SpdMatrix& r,
                                        const Eigen::Vector2d& b, double h_max) {
  if (p.size() != 2 || r.size() != 2) {
    throw DimensionError("ultimate_level_optimized: planar error space required");
  }
  if (h_max < 0) throw Error("ultimate_level_optimized: H_max must be nonnegative");

  const Eigen::Matrix2d pm = p.matrix();
  const Eigen::Matrix2d rm = r.matrix();
  const LevelObjective f{pm, rm, b, h_max};

  constexpr int kGrid = 3600;
  const double step = 2.0 * std::numbers::pi / kGrid;
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double val = f(i * step);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }

  // Golden-section refinement on the bracketing grid cell pair.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = (best - 1) * step;
  double hi = (best + 1) * step;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-7) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  double theta = 0.5 * (lo + hi);
  double value = f(theta);
  if (value < best_val) {
    theta = best * step;
    value = best_val;
  }

  OptimizedLevel out;
  if (value <= 0.0) return out;
  // The objective is π-periodic; report the representative in [0, π).
  theta = std::fmod(theta, std::numbers::pi);
  if (theta < 0) theta += std::numbers::pi;
  out.v_bar_h = value;
  out.theta_star = theta;
  out.z_star = f.radius(theta) * Eigen::Vector2d(std::cos(theta), std::sin(theta));
  return out;
}

double coordinate_bound(const numkit::SpdMatrix& p, double v_bar_h, Eigen::Index i) {
  if (i < 0 || i >= p.size()) {
    throw IndexOutOfRange("coordinate_bound: index " + std::to_string(i) + " outside 0.." +
                          std::to_string(p.size() - 1));
  }
  if (v_bar_h < 0) throw Error("coordinate_bound: V_bar_h must be nonnegative");
  const auto p_inv = numkit::invert_spd(p);
  return std::sqrt(v_bar_h * p_inv(i, i));
}

Eigen::VectorXd coordinate_bounds(const numkit::SpdMatrix& p, double v_bar_h) {
  Eigen::VectorXd out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out(i) = coordinate_bound(p, v_bar_h, i);
  return out;
}

double iss_gain(double m, double norm_b, double lambda_e) {
  if (m < 1.0) throw Error("iss_gain: m must be at least 1");
  if (!(lambda_e > 0)) throw Error("iss_gain: decay rate must be positive");
  return m * norm_b / lambda_e;
}

double noise_floor(double gamma_iss, double h_max) { return gamma_iss * h_max; }

double calibrate_overshoot(std::span<const NormSample> traj, double lambda_e, double epsilon,
                           double e0_norm) {
  if (traj.empty()) throw EmptyTrajectory("calibrate_overshoot: empty trajectory");
  if (e0_norm == 0.0) return 1.0;
  double m = 1.0;
  for (const auto& s : traj) {
    const double decay = std::exp(-lambda_e * s.t);
    const double excess = s.norm - epsilon * (1.0 - decay);
    if (excess <= 0.0) continue;
    if (decay <= std::numeric_limits<double>::min()) return std::numeric_limits<double>::infinity();
    m = std::max(m, excess / (decay * e0_norm));
  }
  return m;
}

double calibrate_overshoot_consistent(std::span<const NormSample> traj, double lambda_e,
                                      double norm_b, double h_max, double e0_norm) {
  auto calibrated = [&](double m) {
    return calibrate_overshoot(traj, lambda_e, noise_floor(iss_gain(m, norm_b, lambda_e), h_max),
                               e0_norm);
  };
  // calibrated(m) is nonincreasing in m, so m ↦ calibrated(m) − m has one root.
  double lo = 1.0;
  double hi = calibrated(1.0);
  if (hi <= lo) return 1.0;
  if (!std::isfinite(hi)) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (calibrated(mid) > mid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double decay_time(double m, double lambda_e, double z_peak, double delta, double epsilon,
                  SettlingMode mode) {
  if (!(lambda_e > 0)) throw Error("decay_time: decay rate must be positive");
  const double denom = mode == SettlingMode::kAbsolute ? delta : delta * epsilon;
  if (!(denom > 0)) throw Error("decay_time: settling tolerance must be positive");
  const double arg = m * z_peak / denom;
  if (arg <= 1.0) return 0.0;
  return std::log(arg) / lambda_e;
}

SettlingTimes settling_time(const SettlingInputs& in) {
  if (!(in.kappa_low > 0) || !(in.r_low > 0)) {
    throw Error("settling_time: progress rate and margin must be positive");
  }
  SettlingTimes out;
  const double step = in.r_bar + in.epsilon;
  out.tau1 = step / (in.kappa_low * in.r_low);
  out.tau1_max = out.tau1;
  out.z_peak = in.m * std::exp(-in.lambda_e * out.tau1) * step +
               in.gamma_iss * (in.h_max + in.feedforward_residual);
  out.tau2 = decay_time(in.m, in.lambda_e, out.z_peak, in.delta, in.epsilon, in.mode);
  out.tau_ll = out.tau1 + out.tau2;
  return out;
}

TimingVerdict timing_check(double t_s, const SettlingTimes& times) {
  if (!(t_s > 0)) throw Error("timing_check: sampling period must be positive");
  TimingVerdict v;
  v.settle_slack = t_s - times.tau_ll;
  v.settle_ok = v.settle_slack >= 0.0;
  v.window_lower_slack = t_s - times.tau2;
  v.window_upper_slack = times.tau1_max - (t_s - times.tau2);
  v.window_ok = v.window_lower_slack >= 0.0 && v.window_upper_slack >= 0.0;
  return v;
}

}  // namespace laycon::iss

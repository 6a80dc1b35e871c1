#include "laycon/hess.hpp"

#include <cmath>
#include <numbers>

namespace laycon::hess {

void HessParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw Error(std::string("HessParams: ") + name + " must be positive");
  };
  positive(c_bus, "C_bus");
  positive(lambda_s, "lambda_S");
  positive(lambda_b_energy, "lambda_B_energy");
  positive(lambda_b_gain, "lambda_B_gain");
  positive(k1, "k1");
  positive(k2, "k2");
  positive(v_nom, "V_nom");
  positive(i_s_max, "I_S_max");
  positive(i_b_max, "I_B_max");
  positive(u_s_max, "U_S_max");
  positive(u_b_max, "U_B_max");
  if (!(v_min < v_max)) throw Error("HessParams: V_min must be below V_max");
  if (d_bar_max < 0 || d_bar_dot_max < 0 || kappa_bar < 0 || rho_d < 0) {
    throw Error("HessParams: reserve terms must be nonnegative");
  }
  const double lambda_e = numkit::decay_rate(error_matrices(*this).a);
  if (!(lambda_b_gain > lambda_e)) {
    throw Error("HessParams: battery loop gain " + std::to_string(lambda_b_gain) +
                " must exceed the voltage-loop decay rate " + std::to_string(lambda_e));
  }
}

HessState plant_rhs(const HessState& x, const Eigen::Vector2d& u, double w, double d,
                    const HessParams& p) {
  HessState dx;
  dx(kVgr) = (x(kIs) + x(kIb) + d) / p.c_bus;
  dx(kIs) = u(0) + w;
  dx(kIb) = u(1);
  dx(kEs) = p.lambda_s * x(kVgr) * x(kIs);
  dx(kEb) = p.lambda_b_energy * x(kVgr) * x(kIb);
  return dx;
}

double control_ub(double i_b, double i_b_ref, double lambda_b_gain) {
  return -lambda_b_gain * (i_b - i_b_ref);
}

double control_us(double v_gr, double i_s, double v, double d_bar, double d_bar_dot,
                  const HessParams& p) {
  return -p.c_bus * p.k1 * (v_gr - v) - p.k2 * (i_s + d_bar) - d_bar_dot;
}

Eigen::Vector2d error_state(const HessState& x, double v, double v_dot, double d_bar,
                            const HessParams& p) {
  return {x(kVgr) - v, (x(kIs) + d_bar) / p.c_bus - v_dot};
}

ErrorMatrices error_matrices(const HessParams& p) {
  ErrorMatrices m;
  m.a << 0.0, 1.0, -p.k1, -p.k2;
  m.b << 0.0, 1.0 / p.c_bus;
  m.b_v << 0.0, 1.0;
  if (!numkit::is_hurwitz(m.a)) {
    throw NotHurwitz("error_matrices: gains k1=" + std::to_string(p.k1) +
                     ", k2=" + std::to_string(p.k2) + " do not give a Hurwitz loop");
  }
  return m;
}

ErgMode erg_mode_from_string(const std::string& s) {
  if (s == "full") return ErgMode::kFull;
  if (s == "scenario_b_input_only") return ErgMode::kScenarioBInputOnly;
  throw Error("unknown constraint set '" + s + "'");
}

const char* to_string(ErgMode m) {
  return m == ErgMode::kFull ? "full" : "scenario_b_input_only";
}

namespace {

erg::HalfspaceConstraint row(double ca, double cb, double d0, double cv, double g,
                             std::string label) {
  erg::HalfspaceConstraint c;
  c.c_a = Eigen::VectorXd::Constant(1, ca);
  c.c_b = Eigen::VectorXd::Constant(1, cb);
  c.d0 = d0;
  c.c_v = Eigen::VectorXd::Constant(1, cv);
  c.g_gamma = g;
  c.label = std::move(label);
  return c;
}

}  // namespace

std::vector<erg::HalfspaceConstraint> hess_constraints(const HessParams& p, ErgMode mode) {
  const double k2t = p.k2 * p.c_bus;
  if (mode == ErgMode::kScenarioBInputOnly) {
    return {row(p.k1, k2t, p.u_s_max, 0.0, 0.0, "u_S_upper"),
            row(-p.k1, -k2t, p.u_s_max, 0.0, 0.0, "u_S_lower")};
  }
  const double i_s_eff = p.i_s_max - p.d_bar_max;
  const double u_s_eff = p.u_s_max - p.d_bar_dot_max / p.c_bus;
  return {
      row(-1.0, 0.0, -p.v_min, -1.0, 0.0, "V_min"),
      row(1.0, 0.0, p.v_max, 1.0, 0.0, "V_max"),
      row(0.0, p.c_bus, i_s_eff, 0.0, p.c_bus * p.kappa_bar, "I_S_upper"),
      row(0.0, -p.c_bus, i_s_eff, 0.0, p.c_bus * p.kappa_bar, "I_S_lower"),
      row(p.k1, k2t, u_s_eff, 0.0, k2t * p.kappa_bar, "u_S_upper"),
      row(-p.k1, -k2t, u_s_eff, 0.0, k2t * p.kappa_bar, "u_S_lower"),
  };
}

BatteryBounds battery_interface_bounds(const HessParams& p, double t_s) {
  if (t_s < 0) throw Error("battery_interface_bounds: T_s must be nonnegative");
  const double span = p.u_b_max / p.lambda_b_gain;
  const double decay = std::exp(-p.lambda_b_gain * t_s);
  return {span * (1.0 - decay), span * decay};
}

namespace {

LoadSample eval_segment(const LoadSegment& s, double t) {
  LoadSample out;
  const double len = s.t_end - s.t_start;
  if (s.kind == LoadSegment::Kind::kConstant) {
    out.d = s.from;
  } else {
    const double u = (t - s.t_start) / len;
    const double delta = s.to - s.from;
    out.d = s.from + delta * u * u * (3.0 - 2.0 * u);
    out.d_dot = delta * 6.0 * u * (1.0 - u) / len;
  }
  if (s.osc_amplitude != 0.0) {
    const double omega = 2.0 * std::numbers::pi * s.osc_frequency;
    const double tau = t - s.t_start;
    double win = 1.0;
    double win_dot = 0.0;
    if (std::isfinite(len)) {
      const double u = tau / len;
      win = 16.0 * u * u * (1.0 - u) * (1.0 - u);
      win_dot = 32.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / len;
    }
    out.d += s.osc_amplitude * win * std::sin(omega * tau);
    out.d_dot += s.osc_amplitude * (win_dot * std::sin(omega * tau) +
                                    win * omega * std::cos(omega * tau));
  }
  return out;
}

}  // namespace

LoadProfile::LoadProfile(std::vector<LoadSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw Error("LoadProfile: no segments");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.t_end > s.t_start)) {
      throw Error("LoadProfile: segment " + std::to_string(i) + " has t_end <= t_start");
    }
    if (s.kind == LoadSegment::Kind::kCubicRamp && !std::isfinite(s.t_end)) {
      throw Error("LoadProfile: ramp segment " + std::to_string(i) + " must be bounded");
    }
    if (i == 0) continue;
    const auto& prev = segments_[i - 1];
    if (std::abs(prev.t_end - s.t_start) > 1e-12) {
      throw Error("LoadProfile: segment " + std::to_string(i) + " does not start where " +
                  std::to_string(i - 1) + " ends");
    }
    const LoadSample left = eval_segment(prev, prev.t_end);
    const LoadSample right = eval_segment(s, s.t_start);
    if (std::abs(left.d - right.d) > 1e-9 || std::abs(left.d_dot - right.d_dot) > 1e-9) {
      throw Error("LoadProfile: load is not continuously differentiable at t=" +
                  std::to_string(s.t_start));
    }
  }
}

LoadProfile LoadProfile::constant(double level, double t_end) {
  LoadSegment s;
  s.t_start = 0.0;
  s.t_end = t_end;
  s.from = level;
  return LoadProfile({s});
}

double LoadProfile::t_begin() const { return segments_.front().t_start; }
double LoadProfile::t_end() const { return segments_.back().t_end; }

LoadSample LoadProfile::operator()(double t) const { return load(t, *this); }

LoadSample load(double t, const LoadProfile& profile) {
  const auto& segs = profile.segments();
  if (segs.empty() || t < segs.front().t_start - 1e-12 || t > segs.back().t_end + 1e-12) {
    throw OutOfSpan("load: t=" + std::to_string(t) + " outside the profile span");
  }
  for (const auto& s : segs) {
    if (t < s.t_end) return eval_segment(s, std::max(t, s.t_start));
  }
  return eval_segment(segs.back(), segs.back().t_end);
}

Outputs outputs(const HessState& x) {
  return {Eigen::Vector2d(x(kVgr), x(kIb)), Eigen::Vector2d(x(kEb), x(kEs))};
}

}  // namespace laycon::hess

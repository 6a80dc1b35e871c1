#include "laycon/contracts.hpp"

#include <algorithm>
#include <cmath>

#include "laycon/errors.hpp"

namespace laycon::contracts {

bool Box::contains(const Eigen::VectorXd& x) const {
  if (lo.size() == 0) return true;
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

void ContractSpec::validate() const {
  if (eps_e < 0 || eps_t < 0 || eps_h < 0 || w_max < 0 || (eps_l.array() < 0).any() ||
      (r_bar.array() < 0).any() || (u_bounds.array() < 0).any()) {
    throw Error("ContractSpec: tolerances must be nonnegative");
  }
  if (!(delta > 0)) throw Error("ContractSpec: delta must be positive");
  if (!(t_s > 0)) throw Error("ContractSpec: T_s must be positive");
}

std::optional<std::size_t> first_violation(const Verdicts& v) {
  const auto it = std::find(v.begin(), v.end(), false);
  if (it == v.end()) return std::nullopt;
  return static_cast<std::size_t>(it - v.begin());
}

std::size_t count_violations(const Verdicts& v) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), false));
}

Verdicts check_A_env(std::span<const double> w, double w_max) {
  Verdicts out;
  out.reserve(w.size());
  for (double x : w) out.push_back(std::abs(x) <= w_max);
  return out;
}

Verdicts check_G_ref(std::span<const Eigen::Vector2d> r_seq, const Eigen::Vector2d& r_bar) {
  Verdicts out;
  for (std::size_t k = 1; k < r_seq.size(); ++k) {
    out.push_back(((r_seq[k] - r_seq[k - 1]).cwiseAbs().array() <= r_bar.array()).all());
  }
  return out;
}

namespace {
// Absolute slack for integrator round-off on a state resting at its bound.
constexpr double kSafeTol = 1e-9;
}  // namespace

Verdicts check_G_safe(std::span<const Eigen::Vector3d> x_traj,
                      std::span<const Eigen::Vector2d> u_traj, const ContractSpec& spec) {
  if (x_traj.size() != u_traj.size()) {
    throw DimensionError("check_G_safe: state and input traces differ in length");
  }
  Verdicts out;
  out.reserve(x_traj.size());
  for (std::size_t i = 0; i < x_traj.size(); ++i) {
    const bool in_box = spec.x_safe.lo.size() == 0 ||
                        (((x_traj[i] - spec.x_safe.lo).array() >= -kSafeTol).all() &&
                         ((spec.x_safe.hi - x_traj[i]).array() >= -kSafeTol).all());
    const bool in_u =
        (u_traj[i].cwiseAbs().array() <= spec.u_bounds.array() + kSafeTol).all();
    out.push_back(in_box && in_u);
  }
  return out;
}

Verdicts check_G_track(std::span<const Eigen::Vector2d> h_r_next,
                       std::span<const Eigen::Vector2d> r_seq, const Eigen::Vector2d& eps_l) {
  if (h_r_next.size() != r_seq.size()) {
    throw DimensionError("check_G_track: outputs and references differ in length");
  }
  Verdicts out;
  out.reserve(r_seq.size());
  for (std::size_t k = 0; k < r_seq.size(); ++k) {
    out.push_back(((h_r_next[k] - r_seq[k]).cwiseAbs().array() <= eps_l.array()).all());
  }
  return out;
}

MismatchCheck check_A_mis(std::span<const Eigen::Vector2d> y_samples,
                          std::span<const Eigen::Vector2d> predictions, double eps_e) {
  MismatchCheck out;
  for (std::size_t k = 1; k < y_samples.size() && k - 1 < predictions.size(); ++k) {
    const Eigen::Vector2d w = y_samples[k] - predictions[k - 1];
    out.w_tilde.push_back(w);
    out.verdicts.push_back(w.lpNorm<Eigen::Infinity>() <= eps_e);
  }
  return out;
}

LivenessCheck check_G_iss(std::span<const double> y_seq, double y_goal, double eps_t,
                          double delta) {
  LivenessCheck out;
  out.verdicts.reserve(y_seq.size());
  for (double y : y_seq) out.verdicts.push_back(std::abs(y - y_goal) <= eps_t + delta);
  std::size_t k = y_seq.size();
  while (k > 0 && out.verdicts[k - 1]) --k;
  if (k < y_seq.size()) out.k_live = k;
  return out;
}

bool vertical_compat(double eps_e, double eps_t, double delta, double eps_h) {
  return eps_e + eps_t + delta < eps_h;
}

MismatchBound mismatch_bound_hess(const MismatchInputs& in) {
  MismatchBound b;
  const double lead = in.v_nom + in.z_peak + in.eta;
  const double settle = (1.0 + in.delta) * in.eps1 + in.eta;
  b.delta_tr_b = in.lambda_b_energy * in.i_b_max * in.z_peak * in.tau1 +
                 lead * (in.u_b_max / in.lambda_b_gain) *
                     (1.0 - std::exp(-in.lambda_b_gain * in.tau1));
  b.d_ss_b = in.lambda_b_energy * in.i_b_max * settle;
  b.delta_tr_s = in.lambda_s * in.i_s_max * (in.z_peak + in.eta) * in.tau1 +
                 lead * in.c_bus * (in.kappa_max + in.z_peak) * in.tau1;
  b.d_ss_s = in.lambda_s * in.i_s_max * settle +
             (in.v_nom + in.eps1 + in.eta) * in.c_bus * in.eps2;
  b.tau2 = in.tau2;
  b.eps_e = std::max(b.delta_tr_b + b.d_ss_b * in.tau2, b.delta_tr_s + b.d_ss_s * in.tau2);
  return b;
}

CertificateReport certificate_report(const ContractSpec& spec, double v_bar_h,
                                     const iss::SettlingTimes& settling, double gamma_inf,
                                     double eps_t, const MismatchBound& mismatch) {
  CertificateReport r;
  r.timing = iss::timing_check(spec.t_s, settling);
  r.eps_e = mismatch.eps_e;
  r.eps_t = eps_t;
  r.vertical_compat = vertical_compat(mismatch.eps_e, eps_t, spec.delta, spec.eps_h);
  r.gamma_inf = gamma_inf;
  r.v_bar_h = v_bar_h;
  r.admissibility = v_bar_h < gamma_inf;
  r.all_ok = r.timing.settle_ok && r.timing.window_ok && r.vertical_compat && r.admissibility;
  return r;
}

}  // namespace laycon::contracts

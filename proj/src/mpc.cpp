#include "laycon/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "laycon/errors.hpp"

namespace laycon::mpc {

void PlannerConfig::validate() const {
  if (horizon < 1) throw Error("PlannerConfig: horizon must be at least 1");
  if (!(t_s > 0)) throw Error("PlannerConfig: T_s must be positive");
  if (q_weight < 0) throw Error("PlannerConfig: q_weight must be nonnegative");
  if (i_b_max < 0 || i_s_max < 0 || slew_bound < 0 || tighten_eps_e < 0) {
    throw Error("PlannerConfig: bounds must be nonnegative");
  }
  if (!(e_b_range.lo <= e_b_range.hi) || !(e_s_range.lo <= e_s_range.hi)) {
    throw Error("PlannerConfig: empty SOC range");
  }
}

Eigen::Vector2d abstract_step(const Eigen::Vector2d& y, double i_b_ref, double d_hat,
                              const PlannerConfig& cfg) {
  return {y(0) + cfg.c_b() * i_b_ref, y(1) + cfg.c_s() * (-i_b_ref - d_hat)};
}

qp::QpProblem build_qp(const Eigen::Vector2d& y, std::span<const double> d_forecast,
                       double r_prev, const PlannerConfig& cfg) {
  const int n = cfg.horizon;
  if (static_cast<int>(d_forecast.size()) < n) {
    throw DimensionError("build_qp: forecast shorter than the horizon");
  }
  const double cb = cfg.c_b();
  const double cs = cfg.c_s();
  // E_B[j+1] = E_B + cb·(S x)_j with S lower-triangular ones.
  const Eigen::MatrixXd s = Eigen::MatrixXd::Ones(n, n).triangularView<Eigen::Lower>();
  // Cumulative forecast Σ_{i≤j} d̂[i].
  Eigen::VectorXd d_cum(n);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    acc += d_forecast[static_cast<std::size_t>(j)];
    d_cum(j) = acc;
  }

  qp::QpProblem p;
  const double offset = y(0) - cfg.e_b_goal;
  // Tiny ridge keeps H positive definite when q = 0.
  p.H = 2.0 * cfg.q_weight * cb * cb * s.transpose() * s +
        1e-12 * Eigen::MatrixXd::Identity(n, n);
  p.g = 2.0 * cfg.q_weight * cb * offset * s.transpose() * Eigen::VectorXd::Ones(n);

  const int rows = 2 * n + 2 * n + 2 * n + 4 * n;
  p.A_ineq = Eigen::MatrixXd::Zero(rows, n);
  p.b_ineq = Eigen::VectorXd::Zero(rows);
  int r = 0;
  auto add = [&](const Eigen::RowVectorXd& a, double b) {
    p.A_ineq.row(r) = a;
    p.b_ineq(r) = b;
    ++r;
  };
  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Unit(n, j);
    add(e, cfg.i_b_max);
    add(-e, cfg.i_b_max);
    // Slew against the previous step (the first against r_prev).
    Eigen::RowVectorXd diff = e;
    double rhs_shift = 0.0;
    if (j == 0) {
      rhs_shift = r_prev;
    } else {
      diff(j - 1) = -1.0;
    }
    add(diff, cfg.slew_bound + rhs_shift);
    add(-diff, cfg.slew_bound - rhs_shift);
    // Supercap absorbs the balance: −Ī_S ≤ −I_B − d̂ ≤ Ī_S.
    const double dj = d_forecast[static_cast<std::size_t>(j)];
    add(-e, cfg.i_s_max + dj);
    add(e, cfg.i_s_max - dj);
  }
  for (int j = 0; j < n; ++j) {
    const double tight = (j + 1) * cfg.tighten_eps_e;
    const Eigen::RowVectorXd srow = s.row(j);
    // E_B[j+1] = y0 + cb·srow·x
    add(cb * srow, cfg.e_b_range.hi - tight - y(0));
    add(-cb * srow, y(0) - cfg.e_b_range.lo - tight);
    // E_S[j+1] = y1 − cs·srow·x − cs·d_cum
    add(-cs * srow, cfg.e_s_range.hi - tight - y(1) + cs * d_cum(j));
    add(cs * srow, y(1) + -cs * d_cum(j) - cfg.e_s_range.lo - tight);
  }
  return p;
}

double tracking_cost(const Eigen::Vector2d& y, const Eigen::VectorXd& plan,
                     const PlannerConfig& cfg) {
  double e_b = y(0);
  double cost = 0.0;
  for (Eigen::Index j = 0; j < plan.size(); ++j) {
    e_b += cfg.c_b() * plan(j);
    const double err = e_b - cfg.e_b_goal;
    cost += cfg.q_weight * err * err;
  }
  return cost;
}

PlanResult plan(const Eigen::Vector2d& y, std::span<const double> d_forecast, double r_prev,
                const PlannerConfig& cfg, qp::QpSolver& solver) {
  PlanResult out;
  const qp::QpSolution sol = solver.solve(build_qp(y, d_forecast, r_prev, cfg));
  double i_ref = r_prev;
  if (sol.status == qp::QpStatus::kOptimal) {
    out.feasible = true;
    // Clip round-off so the slew and current bounds hold exactly.
    i_ref = std::clamp(sol.x(0), r_prev - cfg.slew_bound, r_prev + cfg.slew_bound);
    i_ref = std::clamp(i_ref, -cfg.i_b_max, cfg.i_b_max);
    out.v_n_star = tracking_cost(y, sol.x, cfg);
  } else {
    out.fallback_used = true;
  }
  out.r_k = Eigen::Vector2d(cfg.v_nom, i_ref);
  out.prediction = abstract_step(y, i_ref, d_forecast.empty() ? 0.0 : d_forecast[0], cfg);
  return out;
}

double planner_iss_bound(const PlannerIssData& data, double eps_e) {
  if (eps_e < 0) throw Error("planner_iss_bound: eps_E must be nonnegative");
  if (!(data.lambda_min_p > 0) || !(data.lambda_min_q > 0)) {
    throw Error("planner_iss_bound: sandwich and descent coefficients must be positive");
  }
  return std::sqrt((data.lambda_max_p / data.lambda_min_p) * (data.l_v / data.lambda_min_q) *
                   eps_e);
}

double estimate_lipschitz(const PlannerConfig& cfg, int sample_count, double sample_radius,
                          std::uint64_t seed, qp::QpSolver& solver) {
  if (sample_count < 2) throw Error("estimate_lipschitz: need at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eb(cfg.e_b_range.lo, cfg.e_b_range.hi);
  std::uniform_real_distribution<double> es(cfg.e_s_range.lo, cfg.e_s_range.hi);
  const std::vector<double> zeros(static_cast<std::size_t>(cfg.horizon), 0.0);

  std::vector<std::pair<Eigen::Vector2d, double>> pts;
  for (int i = 0; i < sample_count; ++i) {
    const Eigen::Vector2d y(eb(rng), es(rng));
    const PlanResult r = plan(y, zeros, 0.0, cfg, solver);
    if (r.v_n_star) pts.emplace_back(y, *r.v_n_star);
  }
  if (pts.empty()) throw AllInfeasible("estimate_lipschitz: no sampled state is feasible");

  double l = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dist = (pts[i].first - pts[j].first).norm();
      if (dist <= 0.0 || dist > sample_radius) continue;
      l = std::max(l, std::abs(pts[i].second - pts[j].second) / dist);
    }
  }
  return l;
}

std::vector<bool> descent_check(std::span<const DescentSample> traj, const PlannerIssData& data,
                                double eps_e) {
  std::vector<bool> ok;
  if (traj.size() < 2) return ok;
  ok.reserve(traj.size() - 1);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double lhs = traj[k + 1].v_star - traj[k].v_star;
    const double err = traj[k].tracking_error;
    const double rhs = -data.lambda_min_q * err * err + data.l_v * eps_e;
    ok.push_back(lhs <= rhs + 1e-9 * (1.0 + std::abs(traj[k].v_star)));
  }
  return ok;
}

}  // namespace laycon::mpc

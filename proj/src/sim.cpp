#include "laycon/sim.hpp"

#include <algorithm>
#include <cmath>

namespace laycon::sim {

DisturbanceMode disturbance_mode_from_string(const std::string& s) {
  if (s == "none") return DisturbanceMode::kNone;
  if (s == "mixed") return DisturbanceMode::kMixed;
  if (s == "adversarial") return DisturbanceMode::kAdversarial;
  throw Error("unknown disturbance mode '" + s + "'");
}

const char* to_string(DisturbanceMode m) {
  switch (m) {
    case DisturbanceMode::kNone:
      return "none";
    case DisturbanceMode::kMixed:
      return "mixed";
    case DisturbanceMode::kAdversarial:
      return "adversarial";
  }
  return "unknown";
}

double disturbance_mixed(double t, double w_max, std::mt19937_64& stream) {
  std::uniform_real_distribution<double> xi(-1.0, 1.0);
  const double w = w_max * (0.7 * std::sin(15.0 * t) + 0.3 * xi(stream));
  return std::clamp(w, -w_max, w_max);
}

double disturbance_adversarial(const Eigen::Vector2d& e, const numkit::SpdMatrix& p,
                               const Eigen::Vector2d& b, double w_max) {
  const double s = 2.0 * e.dot(p.matrix() * b);
  return s >= 0.0 ? w_max : -w_max;
}

void SimConfig::validate() const {
  if (!(h > 0)) throw Error("SimConfig: h must be positive");
  if (!(t_end > 0)) throw Error("SimConfig: T_end must be positive");
  if (!(t_s >= h)) throw Error("SimConfig: T_s must be at least h");
  if (w_max < 0) throw Error("SimConfig: W_max must be nonnegative");
  if (!x0.allFinite() || !std::isfinite(v0)) throw Error("SimConfig: initial state not finite");
}

namespace {

using Joint = Eigen::Matrix<double, 6, 1>;  // (x, v)

struct Held {
  double r_v = 0.0;
  double r_ib = 0.0;
  double w = 0.0;
};

struct Aux {
  double d = 0.0;
  double u_s = 0.0;
  double u_b = 0.0;
  double v_dot = 0.0;
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
  double v_e = 0.0;
  double gamma = 0.0;
};

class LoopModel {
 public:
  LoopModel(const LayeredConfig& cfg, const numkit::SpdMatrix& p,
            std::vector<erg::HalfspaceConstraint> constraints)
      : cfg_(cfg), p_(p), constraints_(std::move(constraints)) {}

  hess::LoadSample load_at(double t) const {
    return hess::load(std::clamp(t, cfg_.load.t_begin(), cfg_.load.t_end()), cfg_.load);
  }

  Aux evaluate(double t, const Joint& z, const Held& held) const {
    Aux a;
    const hess::HessState x = z.head<5>();
    const double v = z(5);
    const hess::LoadSample ld = load_at(t);
    a.d = ld.d;
    a.u_b = hess::control_ub(x(hess::kIb), held.r_ib, cfg_.plant.lambda_b_gain);
    const double d_bar = ld.d + x(hess::kIb);
    const double d_bar_dot = ld.d_dot + a.u_b;
    a.u_s = hess::control_us(x(hess::kVgr), x(hess::kIs), v, d_bar, d_bar_dot, cfg_.plant);

    const Eigen::VectorXd vv = Eigen::VectorXd::Constant(1, v);
    a.gamma = erg::gamma(vv, constraints_, p_);
    const double e1 = x(hess::kVgr) - v;
    const double q = (x(hess::kIs) + d_bar) / cfg_.plant.c_bus;
    if (cfg_.sim.erg_enabled) a.v_dot = governor_rate(e1, q, vv, held.r_v, a.gamma);
    a.e = Eigen::Vector2d(e1, q - a.v_dot);
    a.v_e = p_.quad_form(a.e);
    return a;
  }

  Joint rhs(double t, const Joint& z, const Held& held) const {
    const Aux a = evaluate(t, z, held);
    Joint dz;
    dz.head<5>() = hess::plant_rhs(z.head<5>(), Eigen::Vector2d(a.u_s, a.u_b), held.w, a.d,
                                   cfg_.plant);
    dz(5) = a.v_dot;
    return dz;
  }

 private:
  // v̇ enters the error through e₂ = q − v̇, so the governor law is implicit
  // in v̇. For a scalar reference the solution is bracketed between 0 and
  // κΓρ; bisection finds it.
  double governor_rate(double e1, double q, const Eigen::VectorXd& v, double r_v,
                       double gamma) const {
    const Eigen::VectorXd r = Eigen::VectorXd::Constant(1, r_v);
    const double rho = erg::navigation_field(r, v, constraints_, p_, cfg_.erg)(0);
    if (rho == 0.0 || !(gamma > 0)) return 0.0;
    if (std::isinf(gamma)) throw Error("governor: no constraint bounds the reference");
    auto f = [&](double s) {
      const double vs = p_.quad_form(Eigen::Vector2d(e1, q - s));
      return cfg_.erg.kappa_erg * std::max(0.0, gamma - vs) * rho;
    };
    double lo = 0.0;
    double hi = cfg_.erg.kappa_erg * gamma * rho;
    if (lo > hi) std::swap(lo, hi);
    // g(s) = f(s) − s is ≥ 0 at the end nearer zero and ≤ 0 at the far end.
    const bool increasing = rho > 0;
    for (int it = 0; it < 100 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const bool above = f(mid) - mid > 0;
      if (above == increasing) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  const LayeredConfig& cfg_;
  const numkit::SpdMatrix& p_;
  std::vector<erg::HalfspaceConstraint> constraints_;
};

}  // namespace

std::pair<TrajectoryLog, MonitorReport> run_layered(const LayeredConfig& cfg) {
  cfg.plant.validate();
  cfg.sim.validate();
  cfg.spec.validate();
  if (cfg.sim.erg_enabled) cfg.erg.validate();
  if (cfg.sim.mpc_enabled) cfg.planner.validate();

  const hess::ErrorMatrices em = hess::error_matrices(cfg.plant);
  const numkit::SpdMatrix p = numkit::solve_lyapunov(em.a, cfg.lyap_r);
  const LoopModel model(cfg, p, hess::hess_constraints(cfg.plant, cfg.constraint_set));

  TrajectoryLog log;
  MonitorReport mon;

  const double h = cfg.sim.h;
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.sim.t_end / h));
  const double ratio = cfg.sim.t_s / h;
  const auto per_period = static_cast<std::size_t>(std::max<long long>(1, std::llround(ratio)));
  if (std::abs(ratio - static_cast<double>(per_period)) > 1e-9 * ratio) {
    log.warnings.push_back("T_s is not a multiple of h; using " + std::to_string(per_period) +
                           " steps per period");
  }

  Joint z;
  z.head<5>() = cfg.sim.x0;
  z(5) = cfg.sim.erg_enabled ? cfg.sim.v0 : cfg.sim.r_v;

  std::mt19937_64 stream(cfg.sim.seed);
  Held held{cfg.sim.r_v, cfg.sim.r_i_b, 0.0};
  double r_prev = cfg.sim.r_i_b;
  bool fallback_now = false;

  std::vector<Eigen::Vector2d> r_seq, h_r_samples, y_samples, predictions;
  std::vector<double> eb_samples;
  std::vector<Eigen::Vector3d> x_safe_trace;
  std::vector<Eigen::Vector2d> u_trace;
  qp::QpSolver solver;
  double prev_phi = 0.0;
  std::vector<double> forecast(static_cast<std::size_t>(std::max(cfg.planner.horizon, 1)));

  const std::size_t reserve = n_steps + 1;
  for (auto* col : {&log.t, &log.v_gr, &log.i_s, &log.i_b, &log.e_s, &log.e_b, &log.v, &log.r_v,
                    &log.r_ib, &log.e1, &log.e2, &log.v_e, &log.gamma_v, &log.phi, &log.w,
                    &log.d, &log.u_s, &log.u_b}) {
    col->reserve(reserve);
  }

  for (std::size_t i = 0; i <= n_steps; ++i) {
    const double t = static_cast<double>(i) * h;

    if (i % per_period == 0) {
      const hess::Outputs out = hess::outputs(z.head<5>());
      y_samples.push_back(out.h_y);
      h_r_samples.push_back(out.h_r);
      eb_samples.push_back(out.h_y(0));
      if (i < n_steps) {
        fallback_now = false;
        if (cfg.sim.mpc_enabled) {
          for (std::size_t j = 0; j < forecast.size(); ++j) {
            forecast[j] = model.load_at(t + static_cast<double>(j) * cfg.planner.t_s).d;
          }
          const mpc::PlanResult pr = mpc::plan(out.h_y, forecast, r_prev, cfg.planner, solver);
          held.r_v = pr.r_k(0);
          held.r_ib = pr.r_k(1);
          fallback_now = pr.fallback_used;
          if (pr.fallback_used) ++mon.fallback_count;
          predictions.push_back(pr.prediction);
          log.planner.push_back({i, t, out.h_y, pr.r_k, pr.prediction, pr.v_n_star,
                                 pr.fallback_used});
        }
        r_prev = held.r_ib;
        r_seq.emplace_back(held.r_v, held.r_ib);
        if (!cfg.sim.erg_enabled) z(5) = held.r_v;
      }
    }

    // Disturbance held over [t, t + h).
    switch (cfg.sim.disturbance) {
      case DisturbanceMode::kNone:
        held.w = 0.0;
        break;
      case DisturbanceMode::kMixed:
        held.w = disturbance_mixed(t, cfg.sim.w_max, stream);
        break;
      case DisturbanceMode::kAdversarial: {
        const Aux a = model.evaluate(t, z, held);
        held.w = disturbance_adversarial(a.e, p, em.b, cfg.sim.w_max);
        break;
      }
    }

    const Aux a = model.evaluate(t, z, held);
    const double phi = a.v_e - a.gamma;
    log.t.push_back(t);
    log.v_gr.push_back(z(hess::kVgr));
    log.i_s.push_back(z(hess::kIs));
    log.i_b.push_back(z(hess::kIb));
    log.e_s.push_back(z(hess::kEs));
    log.e_b.push_back(z(hess::kEb));
    log.v.push_back(z(5));
    log.r_v.push_back(held.r_v);
    log.r_ib.push_back(held.r_ib);
    log.e1.push_back(a.e(0));
    log.e2.push_back(a.e(1));
    log.v_e.push_back(a.v_e);
    log.gamma_v.push_back(a.gamma);
    log.phi.push_back(phi);
    log.w.push_back(held.w);
    log.d.push_back(a.d);
    log.u_s.push_back(a.u_s);
    log.u_b.push_back(a.u_b);
    log.fallback.push_back(fallback_now ? 1 : 0);

    x_safe_trace.emplace_back(z(hess::kVgr), z(hess::kIs), z(hess::kIb));
    u_trace.emplace_back(a.u_s, a.u_b);
    if (i > 0 && prev_phi <= 0.0 && phi > 1e-9) {
      if (!mon.first_phi_break) mon.first_phi_break = i;
      ++mon.phi_breaks;
    }
    prev_phi = phi;

    if (i == n_steps) break;
    z = rk4_step([&](double ts, const Joint& zs) { return model.rhs(ts, zs, held); }, z, t, h);
  }

  mon.a_env = contracts::check_A_env(log.w, cfg.spec.w_max);
  mon.g_safe = contracts::check_G_safe(x_safe_trace, u_trace, cfg.spec);

  std::vector<Eigen::Vector2d> r_with_prev;
  r_with_prev.emplace_back(cfg.sim.r_v, cfg.sim.r_i_b);
  r_with_prev.insert(r_with_prev.end(), r_seq.begin(), r_seq.end());
  mon.g_ref = contracts::check_G_ref(r_with_prev, cfg.spec.r_bar);

  const std::size_t periods = std::min(r_seq.size(), h_r_samples.size() - 1);
  mon.g_track = contracts::check_G_track(
      std::span(h_r_samples).subspan(1, periods), std::span(r_seq).first(periods),
      cfg.spec.eps_l);

  if (cfg.sim.mpc_enabled) {
    const auto mis = contracts::check_A_mis(y_samples, predictions, cfg.spec.eps_e);
    mon.a_mis = mis.verdicts;
    mon.w_tilde = mis.w_tilde;
    const auto live =
        contracts::check_G_iss(eb_samples, cfg.spec.y_goal, cfg.spec.eps_t, cfg.spec.delta);
    mon.g_iss = live.verdicts;
    mon.k_live = live.k_live;

    // Descent is checked inside runs of consecutive optimal plans.
    std::vector<mpc::DescentSample> window;
    auto flush = [&] {
      const auto d = mpc::descent_check(window, cfg.planner_iss, cfg.spec.eps_e);
      mon.descent.insert(mon.descent.end(), d.begin(), d.end());
      window.clear();
    };
    for (const auto& rec : log.planner) {
      if (!rec.v_n_star) {
        flush();
        continue;
      }
      window.push_back({*rec.v_n_star, std::abs(rec.prediction(0) - cfg.planner.e_b_goal)});
    }
    flush();
  }
  return {std::move(log), std::move(mon)};
}

}  // namespace laycon::sim

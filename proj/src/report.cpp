#include "laycon/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "laycon/erg.hpp"
#include "laycon/mpc.hpp"

namespace laycon::report {

using nlohmann::ordered_json;

Certificate compute_certificate(const config::RunConfig& cfg) {
  const auto& lc = cfg.layered;
  const auto& pl = lc.plant;
  Certificate c;

  const hess::ErrorMatrices em = hess::error_matrices(pl);
  const numkit::SpdMatrix p = numkit::solve_lyapunov(em.a, lc.lyap_r);
  const numkit::SpdMatrix r(lc.lyap_r);
  c.p = p.matrix();
  const auto eig = numkit::eigenvalues(em.a);
  // Report eigenvalues in descending real part (slowest first).
  std::vector<std::complex<double>> ev(eig.data(), eig.data() + eig.size());
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() > b.real(); });
  for (int i = 0; i < 2; ++i) {
    c.eig_re(i) = ev[static_cast<std::size_t>(i)].real();
    c.eig_im(i) = ev[static_cast<std::size_t>(i)].imag();
  }
  c.kappa_p = p.condition_number();
  c.lambda_e = numkit::decay_rate(em.a);
  c.norm_b = em.b.norm();

  const double h_max = lc.sim.w_max;
  c.level = iss::ultimate_level_optimized(p, r, em.b, h_max);
  c.v_bar_h = cfg.iss.v_bar_h_override.value_or(c.level.v_bar_h);
  c.eps_l = iss::coordinate_bounds(p, c.v_bar_h);
  c.gamma_iss = iss::iss_gain(cfg.iss.m, c.norm_b, c.lambda_e);
  c.epsilon = iss::noise_floor(c.gamma_iss, h_max);

  iss::SettlingInputs si;
  si.m = cfg.iss.m;
  si.lambda_e = c.lambda_e;
  si.r_bar = cfg.iss.r_bar_v;
  si.epsilon = c.epsilon;
  si.kappa_low = lc.erg.kappa_erg * (1.0 - lc.erg.delta_rep());
  si.r_low = cfg.iss.r_low;
  si.delta = lc.spec.delta;
  si.h_max = h_max;
  si.feedforward_residual = cfg.iss.feedforward_residual;
  si.gamma_iss = c.gamma_iss;
  si.mode = cfg.iss.settling_mode;
  c.settling = iss::settling_time(si);
  c.battery = hess::battery_interface_bounds(pl, lc.sim.t_s);

  const auto constraints = hess::hess_constraints(pl, lc.constraint_set);
  double gamma_inf = std::numeric_limits<double>::infinity();
  for (double v : cfg.reference_grid) {
    gamma_inf = std::min(gamma_inf, erg::gamma(Eigen::VectorXd::Constant(1, v), constraints, p));
  }

  contracts::MismatchInputs mi;
  mi.z_peak = c.settling.z_peak;
  mi.eta = lc.erg.eta;
  mi.eps1 = c.eps_l(0);
  mi.eps2 = c.eps_l(1);
  mi.delta = lc.spec.delta;
  mi.tau1 = c.settling.tau1;
  mi.tau2 = c.settling.tau2;
  mi.kappa_max = pl.kappa_bar > 0 ? pl.kappa_bar * gamma_inf : 0.0;
  mi.v_nom = pl.v_nom;
  mi.lambda_b_energy = pl.lambda_b_energy;
  mi.lambda_b_gain = pl.lambda_b_gain;
  mi.lambda_s = pl.lambda_s;
  mi.i_b_max = pl.i_b_max;
  mi.i_s_max = pl.i_s_max;
  mi.c_bus = pl.c_bus;
  mi.u_b_max = pl.u_b_max;
  c.mismatch = contracts::mismatch_bound_hess(mi);

  if (cfg.lipschitz.l_v) {
    c.l_v = *cfg.lipschitz.l_v;
  } else {
    qp::QpSolver solver;
    c.l_v = mpc::estimate_lipschitz(lc.planner, cfg.lipschitz.samples, cfg.lipschitz.radius,
                                    cfg.lipschitz.seed, solver);
  }
  mpc::PlannerIssData data = lc.planner_iss;
  data.l_v = c.l_v;
  c.eps_t = data.lambda_min_q > 0 ? mpc::planner_iss_bound(data, c.mismatch.eps_e)
                                  : std::numeric_limits<double>::infinity();

  c.verdict = contracts::certificate_report(lc.spec, c.v_bar_h, c.settling, gamma_inf, c.eps_t,
                                            c.mismatch);
  return c;
}

void apply_certificate(config::RunConfig& cfg, const Certificate& cert) {
  auto& spec = cfg.layered.spec;
  spec.eps_e = cert.mismatch.eps_e;
  spec.eps_t = cert.eps_t;
  spec.eps_l = Eigen::Vector2d(cert.eps_l(0), cert.battery.eps_l_ib);
  cfg.layered.planner_iss.l_v = cert.l_v;
}

namespace {

ordered_json vec(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json mat(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

ordered_json bools(const contracts::Verdicts& v) {
  ordered_json a = ordered_json::array();
  for (bool b : v) a.push_back(b);
  return a;
}

template <typename T>
ordered_json optional_value(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

ordered_json certificate_json(const Certificate& c) {
  ordered_json j;
  j["P"] = mat(c.p);
  j["eigenvalues"] = vec(c.eig_re);
  j["eigenvalues_imag"] = vec(c.eig_im);
  j["kappa_P"] = c.kappa_p;
  j["lambda_e"] = c.lambda_e;
  j["V_bar_h"] = c.v_bar_h;
  j["V_bar_h_optimized"] = c.level.v_bar_h;
  j["theta_star"] = c.level.theta_star;
  j["theta_star_deg"] = c.level.theta_star * 180.0 / std::numbers::pi;
  j["z_star"] = vec(c.level.z_star);
  j["eps_L"] = vec(c.eps_l);
  j["gamma_iss"] = c.gamma_iss;
  j["epsilon"] = c.epsilon;
  j["tau1"] = c.settling.tau1;
  j["tau2"] = c.settling.tau2;
  j["tau_LL"] = c.settling.tau_ll;
  j["tau1_max"] = c.settling.tau1_max;
  j["z_peak"] = c.settling.z_peak;
  j["r_bar_B"] = c.battery.r_bar_b;
  j["eps_L_IB"] = c.battery.eps_l_ib;
  j["L_V"] = c.l_v;
  j["eps_T"] = c.eps_t;
  j["eps_E"] = c.mismatch.eps_e;
  j["Delta_tr_B"] = c.mismatch.delta_tr_b;
  j["d_ss_B"] = c.mismatch.d_ss_b;
  j["Delta_tr_S"] = c.mismatch.delta_tr_s;
  j["d_ss_S"] = c.mismatch.d_ss_s;
  j["settle_ok"] = c.verdict.timing.settle_ok;
  j["settle_slack"] = c.verdict.timing.settle_slack;
  j["window_ok"] = c.verdict.timing.window_ok;
  j["window_lower_slack"] = c.verdict.timing.window_lower_slack;
  j["window_upper_slack"] = c.verdict.timing.window_upper_slack;
  j["vertical_compat"] = c.verdict.vertical_compat;
  j["admissibility"] = c.verdict.admissibility;
  // +∞ (no constraints) has no JSON number; it is written as null.
  j["Gamma_inf"] = std::isfinite(c.verdict.gamma_inf) ? ordered_json(c.verdict.gamma_inf)
                                                      : ordered_json(nullptr);
  j["all_ok"] = c.verdict.all_ok;
  return j;
}

ordered_json monitor_json(const sim::MonitorReport& m) {
  ordered_json j;
  auto clause = [&](const std::string& name, const contracts::Verdicts& v) {
    j[name + "_count"] = v.size();
    j[name + "_violations"] = contracts::count_violations(v);
    j[name + "_first_violation"] = optional_value(contracts::first_violation(v));
  };
  clause("A_env", m.a_env);
  clause("G_safe", m.g_safe);
  clause("G_ref", m.g_ref);
  clause("G_track", m.g_track);
  clause("A_mis", m.a_mis);
  clause("G_iss", m.g_iss);
  clause("descent", m.descent);
  j["G_ref"] = bools(m.g_ref);
  j["G_track"] = bools(m.g_track);
  j["A_mis"] = bools(m.a_mis);
  j["G_iss"] = bools(m.g_iss);
  j["descent"] = bools(m.descent);
  ordered_json wb = ordered_json::array();
  ordered_json ws = ordered_json::array();
  for (const auto& w : m.w_tilde) {
    wb.push_back(w(0));
    ws.push_back(w(1));
  }
  j["w_tilde_E_B"] = wb;
  j["w_tilde_E_S"] = ws;
  j["K_live"] = optional_value(m.k_live);
  j["phi_breaks"] = m.phi_breaks;
  j["first_phi_break"] = optional_value(m.first_phi_break);
  j["fallback_count"] = m.fallback_count;
  return j;
}

Summary summarize(const sim::TrajectoryLog& log, const sim::MonitorReport& mon,
                  const config::RunConfig& cfg, const Certificate& cert) {
  Summary s;
  if (log.rows() == 0) throw EmptyTrajectory("summarize: empty trajectory");
  s.k_live = mon.k_live;
  s.max_phi = *std::max_element(log.phi.begin(), log.phi.end());
  s.max_v_e = *std::max_element(log.v_e.begin(), log.v_e.end());
  for (std::size_t i = 0; i < log.rows(); ++i) {
    if (!s.omega_h_entry_time) {
      if (log.v_e[i] <= cert.v_bar_h) s.omega_h_entry_time = log.t[i];
    } else if (log.v_e[i] > cert.v_bar_h) {
      ++s.omega_h_exits;
    }
  }
  for (const auto& w : mon.w_tilde) {
    s.max_abs_w_tilde = std::max(s.max_abs_w_tilde, w.lpNorm<Eigen::Infinity>());
  }

  std::vector<iss::NormSample> norms;
  norms.reserve(log.rows());
  for (std::size_t i = 0; i < log.rows(); ++i) {
    norms.push_back({log.t[i] - log.t[0], std::hypot(log.e1[i], log.e2[i])});
  }
  s.m_calibrated = iss::calibrate_overshoot_consistent(norms, cert.lambda_e, cert.norm_b,
                                                       cfg.layered.sim.w_max, norms[0].norm);

  s.g_safe_violations = contracts::count_violations(mon.g_safe);
  s.phi_breaks = mon.phi_breaks;
  s.fallback_count = mon.fallback_count;
  const auto [lo, hi] = std::minmax_element(log.v_gr.begin(), log.v_gr.end());
  s.v_gr_min = *lo;
  s.v_gr_max = *hi;
  s.e_b_final = log.e_b.back();
  return s;
}

ordered_json summary_json(const Summary& s) {
  ordered_json j;
  j["K_live"] = optional_value(s.k_live);
  j["max_Phi"] = s.max_phi;
  j["max_V_e"] = s.max_v_e;
  j["omega_h_entry_time"] = optional_value(s.omega_h_entry_time);
  j["omega_h_exits_after_entry"] = s.omega_h_exits;
  j["max_abs_w_tilde"] = s.max_abs_w_tilde;
  j["m_calibrated"] = s.m_calibrated;
  j["G_safe_violations"] = s.g_safe_violations;
  j["phi_violations"] = s.phi_breaks;
  j["fallback_count"] = s.fallback_count;
  j["V_gr_min"] = s.v_gr_min;
  j["V_gr_max"] = s.v_gr_max;
  j["E_B_final"] = s.e_b_final;
  return j;
}

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = {
      "t",  "V_gr", "I_S", "I_B",     "E_S", "E_B", "v", "r_V", "r_IB",    "e1",
      "e2", "V_e",  "Gamma_v", "Phi", "w",   "d",   "u_S", "u_B", "fallback"};
  return cols;
}

std::string format_decimal(double x) {
  if (!std::isfinite(x)) {
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
  }
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed);
  if (res.ec != std::errc()) throw Error("format_decimal: value does not fit");
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::filesystem::path& path, const sim::TrajectoryLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const auto& cols = trajectory_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  const std::vector<const std::vector<double>*> data = {
      &log.t,  &log.v_gr, &log.i_s, &log.i_b,     &log.e_s, &log.e_b, &log.v,
      &log.r_v, &log.r_ib, &log.e1, &log.e2, &log.v_e, &log.gamma_v, &log.phi,
      &log.w,  &log.d,    &log.u_s, &log.u_b};
  std::string line;
  for (std::size_t i = 0; i < log.rows(); ++i) {
    line.clear();
    for (const auto* col : data) {
      line += format_decimal((*col)[i]);
      line += ',';
    }
    line += std::to_string(log.fallback[i]);
    line += '\n';
    out << line;
  }
}

std::vector<std::vector<double>> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> cols(trajectory_columns().size());
  while (std::getline(in, line)) {
    std::size_t c = 0;
    std::size_t start = 0;
    while (start <= line.size() && c < cols.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      const auto res = std::from_chars(line.data() + start, line.data() + end, v);
      if (res.ec != std::errc()) throw Error("read_trajectory_csv: bad number in " + path.string());
      cols[c++].push_back(v);
      start = end + 1;
    }
  }
  return cols;
}

RunOutcome run_scenario(config::RunConfig cfg, const Certificate& cert) {
  apply_certificate(cfg, cert);
  RunOutcome out;
  auto [log, mon] = sim::run_layered(cfg.layered);
  out.summary = summarize(log, mon, cfg, cert);
  out.log = std::move(log);
  out.monitor = std::move(mon);
  return out;
}

namespace {

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_certify(const std::string& config_path, const std::filesystem::path& out_dir) {
  return guarded([&] {
    const config::RunConfig cfg = config::load_config(config_path);
    const Certificate cert = compute_certificate(cfg);
    ensure_dir(out_dir);
    write_json(out_dir / "certificate.json", certificate_json(cert));
    return cert.verdict.all_ok ? 0 : 2;
  });
}

int cmd_run(const std::string& scenario, const std::optional<std::string>& config_path,
            std::uint64_t seed, const std::filesystem::path& out_dir) {
  return guarded([&] {
    if (scenario != "a" && scenario != "b" && scenario != "custom") {
      throw ConfigError("--scenario", "unknown scenario '" + scenario + "'");
    }
    config::RunConfig cfg;
    if (scenario == "custom") {
      if (!config_path) throw ConfigError("--config", "scenario custom needs a config file");
      cfg = config::load_config(*config_path);
    } else if (config_path) {
      cfg = config::load_config(*config_path, scenario);
    } else {
      cfg = config::scenario_config(scenario);
    }
    cfg.layered.sim.seed = seed;
    const Certificate cert = compute_certificate(cfg);
    const RunOutcome r = run_scenario(cfg, cert);
    ensure_dir(out_dir);
    write_trajectory_csv(out_dir / "trajectory.csv", r.log);
    write_json(out_dir / "monitor.json", monitor_json(r.monitor));
    write_json(out_dir / "summary.json", summary_json(r.summary));
    for (const auto& w : r.log.warnings) std::cerr << "warning: " << w << '\n';
    return r.summary.g_safe_violations == 0 && r.summary.phi_breaks == 0 ? 0 : 2;
  });
}

int cmd_sweep(const std::string& config_path, std::uint64_t seeds,
              const std::filesystem::path& out_dir) {
  return guarded([&] {
    if (seeds < 1) throw ConfigError("--seeds", "seed count must be at least 1");
    const config::RunConfig cfg = config::load_config(config_path);
    const Certificate cert = compute_certificate(cfg);

    std::vector<Summary> results(seeds);
    const std::uint64_t workers =
        std::max<std::uint64_t>(1, std::min<std::uint64_t>(seeds, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> jobs;
    for (std::uint64_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::uint64_t s = w; s < seeds; s += workers) {
          config::RunConfig local = cfg;
          local.layered.sim.seed = s;
          results[s] = run_scenario(std::move(local), cert).summary;
        }
      }));
    }
    for (auto& j : jobs) j.get();

    ordered_json agg;
    std::size_t safe = 0, phi = 0, fallback = 0, bad_runs = 0, exits = 0;
    ordered_json ms = ordered_json::array();
    ordered_json entries = ordered_json::array();
    double m_min = std::numeric_limits<double>::infinity();
    double m_max = 0.0;
    double m_sum = 0.0;
    for (const auto& r : results) {
      safe += r.g_safe_violations;
      phi += r.phi_breaks;
      fallback += r.fallback_count;
      exits += r.omega_h_exits;
      if (r.g_safe_violations + r.phi_breaks > 0) ++bad_runs;
      ms.push_back(r.m_calibrated);
      entries.push_back(optional_value(r.omega_h_entry_time));
      m_min = std::min(m_min, r.m_calibrated);
      m_max = std::max(m_max, r.m_calibrated);
      m_sum += r.m_calibrated;
    }
    agg["seeds"] = seeds;
    agg["G_safe_violations"] = safe;
    agg["phi_violations"] = phi;
    agg["runs_with_violations"] = bad_runs;
    agg["omega_h_exits_after_entry"] = exits;
    agg["fallback_count"] = fallback;
    agg["m_calibrated"] = ms;
    agg["m_min"] = m_min;
    agg["m_max"] = m_max;
    agg["m_mean"] = m_sum / static_cast<double>(seeds);
    agg["omega_h_entry_time"] = entries;
    ensure_dir(out_dir);
    write_json(out_dir / "aggregate.json", agg);
    return bad_runs == 0 ? 0 : 2;
  });
}

}  // namespace laycon::report

#pragma once

// Certificate assembly and the certify / run / sweep pipelines with their
// CSV and JSON outputs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "laycon/config.hpp"
#include "laycon/contracts.hpp"
#include "laycon/hess.hpp"
#include "laycon/iss_cert.hpp"
#include "laycon/sim.hpp"

namespace laycon::report {

struct Certificate {
  Eigen::Matrix2d p = Eigen::Matrix2d::Zero();
  Eigen::Vector2d eig_re = Eigen::Vector2d::Zero();
  Eigen::Vector2d eig_im = Eigen::Vector2d::Zero();
  double kappa_p = 0.0;
  double lambda_e = 0.0;
  double norm_b = 0.0;
  iss::OptimizedLevel level;  // optimized value, whatever the override
  double v_bar_h = 0.0;       // value used downstream
  Eigen::Vector2d eps_l = Eigen::Vector2d::Zero();
  double gamma_iss = 0.0;
  double epsilon = 0.0;
  iss::SettlingTimes settling;
  hess::BatteryBounds battery;
  double l_v = 0.0;
  double eps_t = 0.0;
  contracts::MismatchBound mismatch;
  contracts::CertificateReport verdict;
};

Certificate compute_certificate(const config::RunConfig& cfg);

/// Copies certified tolerances (ε_E, ε_T, ε_L, L_V) into the run contract.
void apply_certificate(config::RunConfig& cfg, const Certificate& cert);

nlohmann::ordered_json certificate_json(const Certificate& cert);
nlohmann::ordered_json monitor_json(const sim::MonitorReport& mon);

struct Summary {
  std::optional<std::size_t> k_live;
  double max_phi = 0.0;
  double max_v_e = 0.0;
  std::optional<double> omega_h_entry_time;  // first time V(e) ≤ V̄_h
  std::size_t omega_h_exits = 0;             // rows with V(e) > V̄_h after entry
  double max_abs_w_tilde = 0.0;
  double m_calibrated = 1.0;
  std::size_t g_safe_violations = 0;
  std::size_t phi_breaks = 0;
  std::size_t fallback_count = 0;
  double v_gr_min = 0.0;
  double v_gr_max = 0.0;
  double e_b_final = 0.0;
};

Summary summarize(const sim::TrajectoryLog& log, const sim::MonitorReport& mon,
                  const config::RunConfig& cfg, const Certificate& cert);
nlohmann::ordered_json summary_json(const Summary& s);

/// Header used by trajectory.csv.
const std::vector<std::string>& trajectory_columns();
void write_trajectory_csv(const std::filesystem::path& path, const sim::TrajectoryLog& log);
/// Column-major numeric contents of a trajectory.csv.
std::vector<std::vector<double>> read_trajectory_csv(const std::filesystem::path& path);

/// Shortest decimal that parses back to exactly `x`, without exponent.
std::string format_decimal(double x);

struct RunOutcome {
  sim::TrajectoryLog log;
  sim::MonitorReport monitor;
  Summary summary;
};

/// Certificate + simulation for one configuration.
RunOutcome run_scenario(config::RunConfig cfg, const Certificate& cert);

/// Exit codes: 0 success, 1 configuration error, 2 a verdict or safety check failed.
int cmd_certify(const std::string& config_path, const std::filesystem::path& out_dir);
int cmd_run(const std::string& scenario, const std::optional<std::string>& config_path,
            std::uint64_t seed, const std::filesystem::path& out_dir);
int cmd_sweep(const std::string& config_path, std::uint64_t seeds,
              const std::filesystem::path& out_dir);

}  // namespace laycon::report

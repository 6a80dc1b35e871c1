#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "laycon/report.hpp"

namespace laycon::report {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("laycon_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LAYCON_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_path(const std::string& name) {
  return std::string(LAYCON_CONFIG_DIR) + "/" + name;
}

TEST(FormatDecimal, ShortestRoundTrip) {
  EXPECT_EQ(format_decimal(0.0), "0");
  EXPECT_EQ(format_decimal(400.0), "400");
  EXPECT_EQ(format_decimal(0.1), "0.1");
  EXPECT_EQ(format_decimal(-1.5e-7), "-0.00000015");
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mant(-1, 1);
  std::uniform_int_distribution<int> exp(-20, 20);
  for (int i = 0; i < 5000; ++i) {
    const double x = std::ldexp(mant(rng), exp(rng));
    const std::string s = format_decimal(x);
    EXPECT_EQ(s.find('e'), std::string::npos);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), x) << s;
  }
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  const config::RunConfig cfg = config::scenario_config("b");
  const Certificate cert = compute_certificate(cfg);
  const RunOutcome out = run_scenario(cfg, cert);
  const fs::path dir = scratch("csv");
  write_trajectory_csv(dir / "trajectory.csv", out.log);

  std::ifstream in(dir / "trajectory.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,V_gr,I_S,I_B,E_S,E_B,v,r_V,r_IB,e1,e2,V_e,Gamma_v,Phi,w,d,u_S,u_B,fallback");

  const auto cols = read_trajectory_csv(dir / "trajectory.csv");
  ASSERT_EQ(cols.size(), 19u);
  ASSERT_EQ(cols[0].size(), out.log.rows());
  EXPECT_EQ(cols[0], out.log.t);
  EXPECT_EQ(cols[1], out.log.v_gr);
  EXPECT_EQ(cols[5], out.log.e_b);
  EXPECT_EQ(cols[9], out.log.e1);
  EXPECT_EQ(cols[13], out.log.phi);
  EXPECT_EQ(cols[14], out.log.w);
  EXPECT_EQ(cols[17], out.log.u_b);
  for (std::size_t i = 0; i < out.log.rows(); ++i) EXPECT_EQ(cols[18][i], out.log.fallback[i]);
}

TEST(Cli, CertifyScenarioA) {
  const fs::path dir = scratch("certify_a");
  // Timing and vertical compatibility fail for the shipped gains.
  EXPECT_EQ(run_cli("certify --config " + config_path("scenario_a.json") + " --out " + dir.string()), 2);
  const auto j = nlohmann::json::parse(slurp(dir / "certificate.json"));
  EXPECT_NEAR(j["V_bar_h"].get<double>(), 0.51, 0.01);
  for (const char* key : {"P", "eigenvalues", "kappa_P", "theta_star", "z_star", "eps_L", "gamma_iss",
                          "epsilon", "tau1", "tau2", "tau_LL", "tau1_max", "eps_T", "eps_E",
                          "Delta_tr_B", "d_ss_B", "Delta_tr_S", "d_ss_S", "settle_ok", "window_ok",
                          "vertical_compat", "admissibility"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["admissibility"].get<bool>());
}

TEST(Cli, CertifyIsPure) {
  const fs::path a = scratch("pure_a");
  const fs::path b = scratch("pure_b");
  run_cli("certify --config " + config_path("scenario_b.json") + " --out " + a.string());
  run_cli("certify --config " + config_path("scenario_b.json") + " --out " + b.string());
  const std::string first = slurp(a / "certificate.json");
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, slurp(b / "certificate.json"));
}

TEST(Cli, CertifyZeroBudget) {
  const fs::path dir = scratch("zero_budget");
  std::ofstream(dir / "cfg.json") << R"({"base": "b", "contract": {"eps_H": 0.0}})";
  EXPECT_EQ(run_cli("certify --config " + (dir / "cfg.json").string() + " --out " + dir.string()), 2);
  EXPECT_FALSE(nlohmann::json::parse(slurp(dir / "certificate.json"))["vertical_compat"].get<bool>());
}

TEST(Cli, AllVerdictsTrueExitsZero) {
  // The two timing verdicts only hold together at T_s = τ_LL. Zero disturbance
  // and a fast loop give τ₁ = 5/10 = T_s exactly and τ₂ = 0.
  const fs::path dir = scratch("all_ok");
  std::ofstream(dir / "cfg.json") << R"({
  "base": "b",
  "plant": {"k1": 150.0, "k2": 25.0},
  "iss": {"m": 1.0, "settling_mode": "absolute", "r_bar_V": 5.0},
  "sim": {"T_s": 0.5, "W_max": 0.0},
  "planner": {"L_V": 0.0},
  "contract": {"eps_H": 1e6}
})";
  EXPECT_EQ(run_cli("certify --config " + (dir / "cfg.json").string() + " --out " + dir.string()), 0);
  const auto j = nlohmann::json::parse(slurp(dir / "certificate.json"));
  EXPECT_TRUE(j["all_ok"].get<bool>());
  EXPECT_EQ(j["tau_LL"].get<double>(), 0.5);
}

TEST(Cli, ConfigErrorsExitOne) {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.json") << "{ \"plant\": ";
  EXPECT_EQ(run_cli("certify --config " + (dir / "bad.json").string() + " --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("run --scenario z --seed 0 --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("run --scenario custom --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("sweep --config " + config_path("scenario_a.json") + " --seeds 0 --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
}

TEST(Cli, RunScenarioA) {
  const fs::path dir = scratch("run_a");
  EXPECT_EQ(run_cli("run --scenario a --config " + config_path("scenario_a.json") + " --seed 0 --out " +
                    dir.string()),
            0);
  const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(s["phi_violations"].get<int>(), 0);
  for (const char* key : {"K_live", "max_Phi", "max_V_e", "omega_h_entry_time", "max_abs_w_tilde"}) {
    EXPECT_TRUE(s.contains(key)) << key;
  }
  EXPECT_TRUE(fs::exists(dir / "monitor.json"));
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
}

TEST(Cli, RunScenarioB) {
  const fs::path dir = scratch("run_b");
  EXPECT_EQ(run_cli("run --scenario b --seed 0 --out " + dir.string()), 0);
  const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_FALSE(s["K_live"].is_null());
  EXPECT_NEAR(s["E_B_final"].get<double>(), 5.0, 0.05);
}

TEST(Cli, ScenarioFlagMustMatchConfigBase) {
  const fs::path dir = scratch("mismatch");
  EXPECT_EQ(run_cli("run --scenario b --config " + config_path("scenario_a.json") + " --out " + dir.string()), 1);
}

TEST(Cli, SweepOfOneMatchesRun) {
  const fs::path run_dir = scratch("sweep_run");
  const fs::path sweep_dir = scratch("sweep_one");
  ASSERT_EQ(run_cli("run --scenario custom --config " + config_path("scenario_a.json") +
                    " --seed 0 --out " + run_dir.string()),
            0);
  ASSERT_EQ(run_cli("sweep --config " + config_path("scenario_a.json") + " --seeds 1 --out " +
                    sweep_dir.string()),
            0);
  const auto s = nlohmann::json::parse(slurp(run_dir / "summary.json"));
  const auto a = nlohmann::json::parse(slurp(sweep_dir / "aggregate.json"));
  EXPECT_EQ(a["m_calibrated"][0].get<double>(), s["m_calibrated"].get<double>());
  EXPECT_EQ(a["omega_h_entry_time"][0].get<double>(), s["omega_h_entry_time"].get<double>());
  EXPECT_EQ(a["phi_violations"].get<int>(), s["phi_violations"].get<int>());
}

TEST(Cli, SweepIsDeterministic) {
  const fs::path a = scratch("sweep_a");
  const fs::path b = scratch("sweep_b");
  run_cli("sweep --config " + config_path("scenario_a.json") + " --seeds 6 --out " + a.string());
  run_cli("sweep --config " + config_path("scenario_a.json") + " --seeds 6 --out " + b.string());
  EXPECT_EQ(slurp(a / "aggregate.json"), slurp(b / "aggregate.json"));
}

}  // namespace
}  // namespace laycon::report

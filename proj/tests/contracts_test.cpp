#include "laycon/contracts.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

namespace laycon::contracts {
namespace {

ContractSpec spec_with_box() {
  ContractSpec s;
  s.x_safe.lo = Eigen::Vector3d(380, -12, -1.5);
  s.x_safe.hi = Eigen::Vector3d(420, 12, 1.5);
  s.u_bounds = Eigen::Vector2d(50, 30);
  return s;
}

TEST(Verdicts, Counting) {
  const Verdicts v{true, false, true, false};
  EXPECT_EQ(first_violation(v), 1u);
  EXPECT_EQ(count_violations(v), 2u);
  EXPECT_FALSE(first_violation(Verdicts{true}).has_value());
}

TEST(AEnv, ClosedBound) {
  const std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(count_violations(check_A_env(zeros, 3.0)), 0u);
  const std::vector<double> edge{3.0, -3.0};
  EXPECT_EQ(count_violations(check_A_env(edge, 3.0)), 0u);
  const std::vector<double> over{3.0000001};
  EXPECT_EQ(count_violations(check_A_env(over, 3.0)), 1u);
}

TEST(GRef, Steps) {
  const Eigen::Vector2d rb(0.0, 1.3);
  const std::vector<Eigen::Vector2d> constant(4, Eigen::Vector2d(400, 0.5));
  const Verdicts c = check_G_ref(constant, rb);
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(count_violations(c), 0u);
  const std::vector<Eigen::Vector2d> exact{{400, 0.0}, {400, 1.3}};
  EXPECT_EQ(count_violations(check_G_ref(exact, rb)), 0u);
  const std::vector<Eigen::Vector2d> over{{400, 0.0}, {400, 1.31}};
  EXPECT_EQ(count_violations(check_G_ref(over, rb)), 1u);
}

TEST(GSafe, InteriorAndBoundary) {
  const ContractSpec s = spec_with_box();
  const std::vector<Eigen::Vector3d> x{{400, 0, 0}, {420, 12, -1.5}, {420.1, 0, 0}};
  const std::vector<Eigen::Vector2d> u{{0, 0}, {50, -30}, {0, 0}};
  const Verdicts v = check_G_safe(x, u, s);
  EXPECT_EQ(v, Verdicts({true, true, false}));
  const std::vector<Eigen::Vector2d> short_u{{0, 0}};
  EXPECT_THROW(check_G_safe(x, short_u, s), DimensionError);
}

TEST(GTrack, Tolerance) {
  const Eigen::Vector2d eps(0.1, 0.2);
  const std::vector<Eigen::Vector2d> r{{400, 1}, {400, 1}};
  const std::vector<Eigen::Vector2d> h{{400, 1}, {400.0625, 1.1875}};
  EXPECT_EQ(count_violations(check_G_track(h, r, eps)), 0u);
  const std::vector<Eigen::Vector2d> off{{400, 1}, {400, 1.3}};
  EXPECT_EQ(count_violations(check_G_track(off, r, eps)), 1u);
}

TEST(AMis, ExactAbstraction) {
  const std::vector<Eigen::Vector2d> y{{0, 0}, {1, 2}, {2, 3}};
  const std::vector<Eigen::Vector2d> pred{{1, 2}, {2, 3}, {9, 9}};
  const MismatchCheck m = check_A_mis(y, pred, 0.0);
  EXPECT_EQ(m.verdicts.size(), 2u);
  EXPECT_EQ(count_violations(m.verdicts), 0u);
  for (const auto& w : m.w_tilde) EXPECT_TRUE(w.isZero());
  const std::vector<Eigen::Vector2d> off{{1, 2.5}, {2, 3}, {0, 0}};
  EXPECT_EQ(count_violations(check_A_mis(y, off, 0.0).verdicts), 1u);
}

TEST(GIss, LiveIndex) {
  const std::vector<double> at(5, 5.0);
  EXPECT_EQ(check_G_iss(at, 5.0, 0.0, 0.1).k_live, 0u);
  // |5 − y_k| = 2^{3−k} enters the 0.1 band at k = 7.
  std::vector<double> conv;
  for (int k = 0; k < 15; ++k) conv.push_back(5.0 - std::pow(2.0, 3 - k));
  EXPECT_EQ(check_G_iss(conv, 5.0, 0.0, 0.1).k_live, 7u);
  std::vector<double> div;
  for (int k = 0; k < 10; ++k) div.push_back(5.0 + k);
  EXPECT_FALSE(check_G_iss(div, 5.0, 0.0, 0.1).k_live.has_value());
}

TEST(VerticalCompat, Strict) {
  EXPECT_TRUE(vertical_compat(0.0, 0.0, 0.1, 0.2));
  EXPECT_FALSE(vertical_compat(0.1, 0.0, 0.1, 0.2));
  EXPECT_TRUE(vertical_compat(0.05, 0.1, 0.01, 0.2));
}

TEST(Mismatch, AllTermsVanish) {
  MismatchInputs in;
  in.i_b_max = 1.5;
  in.i_s_max = 12;
  in.u_b_max = 30;
  EXPECT_DOUBLE_EQ(mismatch_bound_hess(in).eps_e, 0.0);
}

TEST(Mismatch, BatteryHandEvaluation) {
  MismatchInputs in;
  in.lambda_b_energy = 1.0;
  in.i_b_max = 1.0;
  in.z_peak = 1.0;
  in.tau1 = 1.0;
  in.v_nom = 400.0;
  in.eta = 0.0;
  in.lambda_b_gain = 1e4;
  in.u_b_max = 100.0;  // Ū_B/λ = 0.01
  const MismatchBound b = mismatch_bound_hess(in);
  EXPECT_NEAR(b.delta_tr_b, 1.0 + 401.0 * 0.01, 1e-12);
}

TEST(Mismatch, MaxOverChannels) {
  MismatchInputs in;
  in.z_peak = 2.0;
  in.eta = 1.0;
  in.eps1 = 0.1;
  in.eps2 = 0.3;
  in.delta = 0.1;
  in.tau1 = 0.2;
  in.tau2 = 0.8;
  in.i_b_max = 1.5;
  in.i_s_max = 12.0;
  in.u_b_max = 30.0;
  const MismatchBound b = mismatch_bound_hess(in);
  EXPECT_DOUBLE_EQ(b.eps_e, std::max(b.delta_tr_b + b.d_ss_b * in.tau2, b.delta_tr_s + b.d_ss_s * in.tau2));
  in.z_peak = 3.0;
  EXPECT_GT(mismatch_bound_hess(in).eps_e, b.eps_e);
}

TEST(CertificateReport, Verdicts) {
  ContractSpec s = spec_with_box();
  s.t_s = 2.0;
  s.delta = 0.1;
  s.eps_h = 1.0;
  iss::SettlingTimes st;
  st.tau1 = 0.5;
  st.tau2 = 1.5;
  st.tau_ll = 2.0;
  st.tau1_max = 0.5;
  MismatchBound mb;
  mb.eps_e = 0.2;
  const CertificateReport ok = certificate_report(s, 0.5, st, 4.8, 0.3, mb);
  EXPECT_TRUE(ok.all_ok);
  const CertificateReport empty =
      certificate_report(s, 0.5, st, std::numeric_limits<double>::infinity(), 0.3, mb);
  EXPECT_TRUE(empty.admissibility);
  s.eps_h = 0.5;
  EXPECT_FALSE(certificate_report(s, 0.5, st, 4.8, 0.3, mb).all_ok);
}

TEST(ContractSpec, Validation) {
  ContractSpec s;
  EXPECT_NO_THROW(s.validate());
  s.delta = 0.0;
  EXPECT_THROW(s.validate(), Error);
}

}  // namespace
}  // namespace laycon::contracts

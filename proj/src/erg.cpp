#include "laycon/erg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace laycon::erg {

Eigen::VectorXd HalfspaceConstraint::normal() const {
  Eigen::VectorXd c(c_a.size() + c_b.size());
  c << c_a, c_b;
  return c;
}

double ErgConfig::delta_rep() const {
  double s = 0.0;
  for (double e : eta_rep) s += e;
  return s;
}

void ErgConfig::validate() const {
  if (!(kappa_erg > 0)) throw Error("ErgConfig: kappa_erg must be positive");
  if (!(eta > 0)) throw Error("ErgConfig: eta must be positive");
  for (double e : eta_rep) {
    if (e < 0) throw Error("ErgConfig: repulsion strengths must be nonnegative");
  }
  if (!(delta_rep() < 1.0)) throw Error("ErgConfig: repulsion strengths must sum below 1");
}

double margin(const HalfspaceConstraint& c, const Eigen::VectorXd& v, double gamma_prev) {
  if (c.c_v.size() != v.size()) {
    throw DimensionError("margin: reference coupling has " + std::to_string(c.c_v.size()) +
                         " entries, reference has " + std::to_string(v.size()));
  }
  double m = c.d0 - c.c_v.dot(v);
  if (c.g_gamma > 0) m -= c.g_gamma * gamma_prev;
  return m;
}

namespace {

double metric(const HalfspaceConstraint& c, const numkit::SpdMatrix& p) {
  const Eigen::VectorXd n = c.normal();
  if (n.size() != p.size()) {
    throw DimensionError("gamma_i: constraint normal does not match P");
  }
  const double q = numkit::inverse_quad_form(p, n);
  if (!(q > 0)) throw ZeroNormal("gamma_i: constraint '" + c.label + "' has a zero normal");
  return q;
}

}  // namespace

double gamma_i(const HalfspaceConstraint& c, const Eigen::VectorXd& v, const numkit::SpdMatrix& p,
               double gamma_prev) {
  const double q = metric(c, p);
  const double m = margin(c, v, gamma_prev);
  if (m <= 0) return 0.0;
  return m * m / q;
}

double gamma(const Eigen::VectorXd& v, const std::vector<HalfspaceConstraint>& constraints,
             const numkit::SpdMatrix& p, int fixed_point_iters) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double base = kInf;
  bool coupled = false;
  for (const auto& c : constraints) {
    if (c.g_gamma > 0) {
      coupled = true;
      continue;
    }
    base = std::min(base, gamma_i(c, v, p));
  }
  if (!coupled) return base;

  auto sweep = [&](double g_prev) {
    double g = base;
    for (const auto& c : constraints) {
      if (c.g_gamma > 0) g = std::min(g, gamma_i(c, v, p, g_prev));
    }
    return g;
  };
  // With no uncoupled rows there is no finite starting point; start from Γ = 0.
  double g = std::isinf(base) ? sweep(0.0) : base;
  for (int it = 0; it < fixed_point_iters; ++it) g = sweep(g);
  return g;
}

Eigen::VectorXd attraction(const Eigen::VectorXd& r, const Eigen::VectorXd& v, double eta) {
  const Eigen::VectorXd diff = r - v;
  return diff / std::max(diff.norm(), eta);
}

Eigen::VectorXd navigation_field(const Eigen::VectorXd& r, const Eigen::VectorXd& v,
                                 const std::vector<HalfspaceConstraint>& constraints,
                                 const numkit::SpdMatrix& p, const ErgConfig& cfg) {
  Eigen::VectorXd rho = attraction(r, v, cfg.eta);
  if (cfg.delta_rep() <= 0) return rho;
  const double g_now = gamma(v, constraints, p);
  for (std::size_t i = 0; i < constraints.size() && i < cfg.eta_rep.size(); ++i) {
    const double strength = cfg.eta_rep[i];
    if (strength <= 0) continue;
    const auto& c = constraints[i];
    const double m = margin(c, v, std::isfinite(g_now) ? g_now : 0.0);
    if (m <= 0) continue;
    const Eigen::VectorXd grad = 2.0 * m * (-c.c_v) / metric(c, p);
    const double gn = grad.norm();
    if (gn <= 1e-12) continue;
    rho -= strength * grad / gn;
  }
  return rho;
}

Eigen::VectorXd erg_rhs(const Eigen::VectorXd& e, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& r,
                        const std::vector<HalfspaceConstraint>& constraints,
                        const numkit::SpdMatrix& p, const ErgConfig& cfg) {
  const double slack = gamma(v, constraints, p) - p.quad_form(e);
  if (!(slack > 0)) return Eigen::VectorXd::Zero(v.size());
  if (std::isinf(slack)) {
    throw Error("erg_rhs: no constraints bound the governor; Γ is infinite");
  }
  return cfg.kappa_erg * slack * navigation_field(r, v, constraints, p, cfg);
}

double barrier(const Eigen::VectorXd& e, const Eigen::VectorXd& v,
               const std::vector<HalfspaceConstraint>& constraints, const numkit::SpdMatrix& p) {
  return p.quad_form(e) - gamma(v, constraints, p);
}

}  // namespace laycon::erg

#include "laycon/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "laycon/errors.hpp"

namespace laycon::qp {

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kInfeasible:
      return "infeasible";
    case QpStatus::kIterLimit:
      return "iter_limit";
  }
  return "unknown";
}

double max_violation(const QpProblem& p, const Eigen::VectorXd& x) {
  if (p.A_ineq.rows() == 0) return 0.0;
  return std::max(0.0, (p.A_ineq * x - p.b_ineq).maxCoeff());
}

double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x,
                    const std::vector<int>& active_set, const Eigen::VectorXd& multipliers) {
  Eigen::VectorXd stat = p.H * x + p.g;
  double res = 0.0;
  for (std::size_t k = 0; k < active_set.size(); ++k) {
    const int i = active_set[k];
    const double lam = multipliers(static_cast<Eigen::Index>(k));
    stat += lam * p.A_ineq.row(i).transpose();
    res = std::max(res, -lam);
    res = std::max(res, std::abs(lam * (p.b_ineq(i) - p.A_ineq.row(i).dot(x))));
  }
  res = std::max(res, stat.lpNorm<Eigen::Infinity>());
  return std::max(res, max_violation(p, x));
}

namespace {

void check_shapes(const QpProblem& p) {
  const Eigen::Index n = p.H.rows();
  if (p.H.cols() != n || p.g.size() != n) throw DimensionError("solve_qp: H and g disagree");
  if (p.A_ineq.rows() != p.b_ineq.size()) {
    throw DimensionError("solve_qp: A_ineq has " + std::to_string(p.A_ineq.rows()) +
                         " rows but b_ineq has " + std::to_string(p.b_ineq.size()));
  }
  if (p.A_ineq.rows() > 0 && p.A_ineq.cols() != n) {
    throw DimensionError("solve_qp: A_ineq column count does not match H");
  }
}

}  // namespace

QpSolution QpSolver::solve(const QpProblem& p) {
  check_shapes(p);
  const Eigen::Index n = p.H.rows();
  const Eigen::Index m = p.A_ineq.rows();

  Eigen::LLT<Eigen::MatrixXd> llt(p.H);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("solve_qp: H is not positive definite");
  h_inv_ = llt.solve(Eigen::MatrixXd::Identity(n, n));

  QpSolution sol;
  sol.x = -h_inv_ * p.g;
  std::vector<int> active;
  std::vector<double> u;
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);

  // Slack of row i in the ≥ form: bᵢ − aᵢᵀx.
  auto slack = [&](Eigen::Index i) { return p.b_ineq(i) - p.A_ineq.row(i).dot(sol.x); };
  auto tol = [&](Eigen::Index i) {
    return 1e-11 * (1.0 + std::abs(p.b_ineq(i)) +
                    p.A_ineq.row(i).lpNorm<Eigen::Infinity>() * sol.x.lpNorm<Eigen::Infinity>());
  };

  int iters = 0;
  auto finish = [&](QpStatus status) {
    sol.status = status;
    sol.active_set = active;
    sol.multipliers = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
    sol.objective = 0.5 * sol.x.dot(p.H * sol.x) + p.g.dot(sol.x);
    sol.kkt_residual = kkt_residual(p, sol.x, active, sol.multipliers);
    return sol;
  };

  while (true) {
    // Most violated inactive row.
    Eigen::Index q = -1;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = slack(i);
      if (s < -tol(i) && s < worst) {
        worst = s;
        q = i;
      }
    }
    if (q < 0) return finish(QpStatus::kOptimal);

    const Eigen::VectorXd n_plus = -p.A_ineq.row(q).transpose();
    double u_plus = 0.0;
    while (true) {
      if (++iters > max_iters_) return finish(QpStatus::kIterLimit);

      const auto k = static_cast<Eigen::Index>(active.size());
      n_active_.resize(n, k);
      for (Eigen::Index j = 0; j < k; ++j) n_active_.col(j) = -p.A_ineq.row(active[j]).transpose();
      const Eigen::VectorXd hn = h_inv_ * n_plus;
      Eigen::VectorXd r = Eigen::VectorXd::Zero(k);
      Eigen::VectorXd z = hn;
      if (k > 0) {
        const Eigen::MatrixXd hn_act = h_inv_ * n_active_;
        const Eigen::MatrixXd gram = n_active_.transpose() * hn_act;
        r = gram.ldlt().solve(n_active_.transpose() * hn);
        z -= hn_act * r;
      }

      // Partial (dual) step limit from the active multipliers.
      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (r(j) > 1e-12) {
          const double t = u[static_cast<std::size_t>(j)] / r(j);
          if (t < t1) {
            t1 = t;
            drop = j;
          }
        }
      }
      // Full (primal) step that makes row q active.
      const double zn = z.dot(n_plus);
      double t2 = std::numeric_limits<double>::infinity();
      if (zn > 1e-12 * std::max(hn.dot(n_plus), 1e-300)) t2 = -slack(q) / zn;

      if (std::isinf(t1) && std::isinf(t2)) return finish(QpStatus::kInfeasible);

      const double t = std::min(t1, t2);
      if (std::isfinite(t2)) sol.x += t * z;
      for (Eigen::Index j = 0; j < k; ++j) u[static_cast<std::size_t>(j)] -= t * r(j);
      u_plus += t;

      if (t2 <= t1) {
        active.push_back(static_cast<int>(q));
        u.push_back(u_plus);
        is_active[static_cast<std::size_t>(q)] = 1;
        break;
      }
      is_active[static_cast<std::size_t>(active[drop])] = 0;
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }
}

QpSolution solve_qp(const QpProblem& p, int max_iters) {
  QpSolver solver(max_iters);
  return solver.solve(p);
}

bool feasibility_check(const QpProblem& p) {
  const Eigen::Index n = p.A_ineq.cols();
  if (p.A_ineq.rows() == 0) return true;
  QpProblem phase1{Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n), p.A_ineq, p.b_ineq};
  const QpSolution s = solve_qp(phase1);
  return s.status == QpStatus::kOptimal && max_violation(p, s.x) <= 1e-8;
}

}  // namespace laycon::qp

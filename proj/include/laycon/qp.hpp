#pragma once

// Dense strictly convex QP
//
//   minimize ½xᵀHx + gᵀx   subject to   A x ≤ b
//
// solved with the Goldfarb–Idnani dual active-set method. The dual method
// starts from the unconstrained minimizer, so no phase-1 point is needed and
// primal infeasibility shows up as an unbounded dual step.

#include <vector>

#include <Eigen/Dense>

namespace laycon::qp {

struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A_ineq;  // rows aᵢᵀ
  Eigen::VectorXd b_ineq;
};

enum class QpStatus { kOptimal, kInfeasible, kIterLimit };

const char* to_string(QpStatus s);

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  QpStatus status = QpStatus::kIterLimit;
  std::vector<int> active_set;
  Eigen::VectorXd multipliers;  // one per active row, ≥ 0
  double kkt_residual = 0.0;
};

/// Largest of: stationarity ‖Hx + g + A_activeᵀλ‖∞, primal violation,
/// negative multipliers and |λᵢ·slackᵢ| over the active rows.
double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x,
                    const std::vector<int>& active_set, const Eigen::VectorXd& multipliers);

/// max_i (aᵢᵀx − bᵢ)⁺
double max_violation(const QpProblem& p, const Eigen::VectorXd& x);

class QpSolver {
 public:
  explicit QpSolver(int max_iters = 500) : max_iters_(max_iters) {}

  /// Throws DimensionError on inconsistent shapes and NotPositiveDefinite
  /// when H has no Cholesky factor; every other outcome is a status.
  QpSolution solve(const QpProblem& p);

  int max_iters() const { return max_iters_; }

 private:
  int max_iters_;
  // Scratch reused across calls.
  Eigen::MatrixXd h_inv_;
  Eigen::MatrixXd n_active_;
};

QpSolution solve_qp(const QpProblem& p, int max_iters = 500);

/// True iff some x satisfies A x ≤ b to within 1e-8.
bool feasibility_check(const QpProblem& p);

}  // namespace laycon::qp

#pragma once

// Small dense linear algebra used by every certificate: continuous Lyapunov
// equation, symmetric eigendecomposition (cyclic Jacobi), SPD inversion and
// decay rates. Everything is templated on the scalar type and accepts any
// Eigen expression.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "laycon/errors.hpp"

namespace laycon::numkit {

inline constexpr int kMaxDim = 8;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > kMaxDim) {
    throw DimensionError(std::string(who) + ": expected a square matrix of size 1.." +
                         std::to_string(kMaxDim) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw DimensionError(std::string(who) + ": non-finite entries");
  }
}

template <typename Derived>
typename Derived::Scalar inf_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace detail

/// True when `m` is symmetric within `rel_tol` relative to its infinity norm.
template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m,
                  typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) return false;
  const Scalar scale = std::max(detail::inf_norm(m), Scalar(1e-300));
  return detail::inf_norm(m - m.transpose()) <= rel_tol * scale;
}

template <typename Scalar>
struct SymEigen {
  VectorX<Scalar> values;   // ascending
  MatrixX<Scalar> vectors;  // orthonormal columns, matching `values`
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
template <typename Derived>
SymEigen<typename Derived::Scalar> sym_eigen(const Eigen::MatrixBase<Derived>& s_in) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(s_in, "sym_eigen");
  if (!is_symmetric(s_in)) throw NotSymmetric("sym_eigen: matrix is not symmetric");

  const Eigen::Index n = s_in.rows();
  MatrixX<Scalar> a = Scalar(0.5) * (s_in + s_in.transpose());
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  const Scalar scale = a.norm();
  const Scalar stop = std::numeric_limits<Scalar>::epsilon() * std::max(scale, Scalar(1e-300));

  for (int sweep = 0; sweep < 64; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= stop) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<Scalar>::min()) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymEigen<Scalar> out{VectorX<Scalar>(n), MatrixX<Scalar>(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// A symmetric positive-definite matrix with cached extreme eigenvalues.
template <typename Scalar>
class BasicSpdMatrix {
 public:
  explicit BasicSpdMatrix(MatrixX<Scalar> m) : m_(std::move(m)) {
    detail::require_square(m_, "SpdMatrix");
    if (!is_symmetric(m_)) throw NotSymmetric("SpdMatrix: matrix is not symmetric");
    const auto eig = sym_eigen(m_);
    lambda_min_ = eig.values(0);
    lambda_max_ = eig.values(eig.values.size() - 1);
    if (!(lambda_min_ > 0)) {
      throw NotPositiveDefinite("SpdMatrix: smallest eigenvalue " + std::to_string(lambda_min_) +
                                " is not positive");
    }
  }

  const MatrixX<Scalar>& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  Scalar lambda_min() const { return lambda_min_; }
  Scalar lambda_max() const { return lambda_max_; }
  Scalar condition_number() const { return lambda_max_ / lambda_min_; }

  /// xᵀ M x
  template <typename Derived>
  Scalar quad_form(const Eigen::MatrixBase<Derived>& x) const {
    return x.dot(m_ * x);
  }

 private:
  MatrixX<Scalar> m_;
  Scalar lambda_min_{};
  Scalar lambda_max_{};
};

using SpdMatrix = BasicSpdMatrix<double>;

/// Eigenvalues of a general square matrix.
template <typename Derived>
VectorX<std::complex<typename Derived::Scalar>> eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(a, "eigenvalues");
  Eigen::EigenSolver<MatrixX<Scalar>> es(MatrixX<Scalar>(a), /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw SingularSystem("eigenvalues: QR iteration failed");
  return es.eigenvalues();
}

/// min |Re λ| over the spectrum of a Hurwitz matrix.
template <typename Derived>
typename Derived::Scalar decay_rate(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const auto ev = eigenvalues(a);
  Scalar rate = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i).real() < 0)) {
      throw NotHurwitz("decay_rate: eigenvalue with real part " + std::to_string(ev(i).real()));
    }
    rate = std::min(rate, -ev(i).real());
  }
  return rate;
}

template <typename Derived>
bool is_hurwitz(const Eigen::MatrixBase<Derived>& a) {
  const auto ev = eigenvalues(a);
  return (ev.real().array() < 0).all();
}

/// Solves AᵀP + PA = −R for Hurwitz A and SPD R.
///
/// The n(n+1)/2 independent entries of the symmetric unknown are solved from
/// the reduced linear system, followed by a refinement pass if the residual is
/// above 1e-9·‖R‖∞.
template <typename DerivedA, typename DerivedR>
BasicSpdMatrix<typename DerivedA::Scalar> solve_lyapunov(const Eigen::MatrixBase<DerivedA>& a,
                                                         const Eigen::MatrixBase<DerivedR>& r) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_square(a, "solve_lyapunov");
  detail::require_square(r, "solve_lyapunov");
  if (a.rows() != r.rows()) throw DimensionError("solve_lyapunov: A and R differ in size");
  if (!is_hurwitz(a)) throw NotHurwitz("solve_lyapunov: A is not Hurwitz");
  // Validates R (symmetric, positive definite).
  const BasicSpdMatrix<Scalar> r_spd{MatrixX<Scalar>(r)};

  const Eigen::Index n = a.rows();
  const Eigen::Index m = n * (n + 1) / 2;
  auto idx = [n](Eigen::Index i, Eigen::Index j) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i - 1) / 2 + (j - i);
  };

  MatrixX<Scalar> lhs = MatrixX<Scalar>::Zero(m, m);
  VectorX<Scalar> rhs(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const Eigen::Index row = idx(i, j);
      rhs(row) = -r(i, j);
      for (Eigen::Index k = 0; k < n; ++k) {
        lhs(row, idx(k, j)) += a(k, i);  // (AᵀP)_ij
        lhs(row, idx(i, k)) += a(k, j);  // (PA)_ij
      }
    }
  }

  Eigen::FullPivLU<MatrixX<Scalar>> lu(lhs);
  lu.setThreshold(Scalar(1e-13));
  if (!lu.isInvertible()) throw SingularSystem("solve_lyapunov: reduced system is singular");

  auto unpack = [&](const VectorX<Scalar>& x) {
    MatrixX<Scalar> p(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) p(i, j) = x(idx(i, j));
    return p;
  };

  VectorX<Scalar> x = lu.solve(rhs);
  const Scalar r_norm = detail::inf_norm(r);
  for (int pass = 0; pass < 3; ++pass) {
    const VectorX<Scalar> res = rhs - lhs * x;
    const MatrixX<Scalar> p = unpack(x);
    const Scalar full_res = detail::inf_norm(a.transpose() * p + p * a + r);
    if (full_res <= Scalar(1e-9) * r_norm) return BasicSpdMatrix<Scalar>(p);
    x += lu.solve(res);
  }
  throw SingularSystem("solve_lyapunov: residual did not reach tolerance");
}

/// P⁻¹ via Cholesky.
template <typename Scalar>
BasicSpdMatrix<Scalar> invert_spd(const BasicSpdMatrix<Scalar>& p) {
  Eigen::LLT<MatrixX<Scalar>> llt(p.matrix());
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("invert_spd: Cholesky failed");
  const Eigen::Index n = p.size();
  MatrixX<Scalar> inv = llt.solve(MatrixX<Scalar>::Identity(n, n));
  inv = Scalar(0.5) * (inv + inv.transpose());
  return BasicSpdMatrix<Scalar>(std::move(inv));
}

/// cᵀ P⁻¹ c without forming the inverse.
template <typename Scalar, typename Derived>
Scalar inverse_quad_form(const BasicSpdMatrix<Scalar>& p, const Eigen::MatrixBase<Derived>& c) {
  Eigen::LLT<MatrixX<Scalar>> llt(p.matrix());
  return c.dot(llt.solve(VectorX<Scalar>(c)));
}

}  // namespace laycon::numkit

#pragma once

// Extreme eigenvalues of symmetric operators, dense and matrix-free.
//
// Small operators are materialized and solved densely. Larger ones go through
// restarted Lanczos with full reorthogonalization; a result is converged when
// the witness residual ||A v - lambda v|| is at most tol * scale, where scale
// is the largest Ritz magnitude seen (|lambda| itself unless lambda ~ 0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "tsc/common.hpp"
#include "tsc/index_core.hpp"

namespace tsc {

/// A self-adjoint linear map on R^dim. `apply` must be safe to call
/// concurrently; it writes the image of `in` into `out` (already sized).
struct LinearOperator {
  Eigen::Index dim = 0;
  std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)> apply;
  bool symmetric = true;

  Eigen::VectorXd operator()(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(dim);
    apply(v, out);
    return out;
  }
};

/// Wraps a dense matrix. The matrix must outlive the operator.
inline LinearOperator as_operator(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd* ptr = &m;
  return LinearOperator{m.rows(), [ptr](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = *ptr * in; },
                        true};
}

inline LinearOperator negated(LinearOperator op) {
  auto inner = op.apply;
  op.apply = [inner](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    inner(in, out);
    out = -out;
  };
  return op;
}

struct SpectralOptions {
  double tol = 1e-8;
  long max_iter = 0;                   // 0 means 10 * dim
  std::uint64_t seed = 0x5eedULL;
  Eigen::Index dense_threshold = 512;  // materialize operators up to this dim
  Eigen::Index krylov_cap = 400;       // Lanczos vectors kept before a restart
};

struct EigenEstimate {
  double value = 0.0;
  Eigen::VectorXd witness;
  double residual = 0.0;
  long iterations = 0;
  bool converged = false;
  std::string method;
};

inline Eigen::MatrixXd materialize(const LinearOperator& op) {
  Eigen::MatrixXd m(op.dim, op.dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.dim);
  Eigen::VectorXd col(op.dim);
  for (Eigen::Index j = 0; j < op.dim; ++j) {
    e(j) = 1.0;
    op.apply(e, col);
    m.col(j) = col;
    e(j) = 0.0;
  }
  return m;
}

namespace detail {

inline EigenEstimate dense_top(const Eigen::MatrixXd& m) {
  EigenEstimate out;
  out.method = "dense";
  out.converged = true;
  if (m.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense symmetric eigensolve failed");
  const Eigen::Index last = m.rows() - 1;
  out.value = es.eigenvalues()(last);
  out.witness = es.eigenvectors().col(last);
  out.residual = (m * out.witness - out.value * out.witness).norm();
  return out;
}

inline Eigen::VectorXd random_start(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = static_cast<double>(engine() >> 11) * 0x1.0p-52 - 1.0;
  }
  return v;
}

inline EigenEstimate lanczos_top(const LinearOperator& op, const SpectralOptions& opt) {
  const Eigen::Index n = op.dim;
  const long max_iter = opt.max_iter > 0 ? opt.max_iter : 10 * static_cast<long>(n);
  const Eigen::Index cap = std::max<Eigen::Index>(2, std::min(n, opt.krylov_cap));

  EigenEstimate out;
  out.method = "lanczos";
  Eigen::VectorXd start = random_start(n, opt.seed);
  Eigen::MatrixXd basis(n, cap);
  Eigen::VectorXd w(n);
  Eigen::VectorXd image(n);
  double scale = 0.0;

  while (true) {
    std::vector<double> alpha;
    std::vector<double> beta;
    double norm0 = start.norm();
    if (norm0 == 0.0) {
      start = random_start(n, opt.seed + 1);
      norm0 = start.norm();
    }
    basis.col(0) = start / norm0;
    Eigen::Index m = 0;
    bool invariant = false;
    for (Eigen::Index j = 0; j < cap; ++j) {
      op.apply(basis.col(j), w);
      ++out.iterations;
      const double a = basis.col(j).dot(w);
      alpha.push_back(a);
      m = j + 1;
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd coeff = basis.leftCols(m).transpose() * w;
        w.noalias() -= basis.leftCols(m) * coeff;
      }
      const double b = w.norm();
      scale = std::max({scale, std::abs(a), b});
      if (b <= 1e-13 * std::max(scale, 1e-300) || b == 0.0) {
        invariant = true;
        break;
      }
      if (j + 1 == cap || out.iterations >= max_iter) break;
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) {
        tri(i, i + 1) = beta[static_cast<std::size_t>(i)];
        tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const double theta = es.eigenvalues()(m - 1);
    scale = std::max({scale, std::abs(es.eigenvalues()(0)), std::abs(theta)});
    Eigen::VectorXd u = basis.leftCols(m) * es.eigenvectors().col(m - 1);
    u.normalize();
    op.apply(u, image);
    ++out.iterations;
    const double rq = u.dot(image);
    out.value = rq;
    out.residual = (image - rq * u).norm();
    out.witness = u;
    if (out.residual <= opt.tol * std::max(std::abs(rq), scale) || invariant) {
      out.converged = true;
      return out;
    }
    if (out.iterations >= max_iter) return out;
    start = u;
  }
}

}  // namespace detail

/// Largest eigenvalue of a symmetric operator and a unit witness vector.
inline EigenEstimate lambda_max(const LinearOperator& op, const SpectralOptions& opt = {}) {
  if (!op.symmetric) throw InputError("lambda_max needs a symmetric operator");
  if (op.dim <= opt.dense_threshold) {
    Eigen::MatrixXd m = materialize(op);
    Eigen::MatrixXd sym = (m + m.transpose()) / 2.0;
    return detail::dense_top(sym);
  }
  return detail::lanczos_top(op, opt);
}

inline EigenEstimate lambda_min(const LinearOperator& op, const SpectralOptions& opt = {}) {
  EigenEstimate e = lambda_max(negated(op), opt);
  e.value = -e.value;
  return e;
}

/// max(|lambda_max|, |lambda_min|) of a symmetric operator.
inline double spectral_norm(const LinearOperator& op, const SpectralOptions& opt = {},
                            EigenEstimate* top = nullptr, EigenEstimate* bottom = nullptr) {
  EigenEstimate hi = lambda_max(op, opt);
  EigenEstimate lo = lambda_min(op, opt);
  const double out = std::max(std::abs(hi.value), std::abs(lo.value));
  if (top) *top = std::move(hi);
  if (bottom) *bottom = std::move(lo);
  return out;
}

inline EigenEstimate lambda_max_dense(const Eigen::MatrixXd& m,
                                      const Budget& budget = default_budget()) {
  if (static_cast<std::size_t>(m.rows()) > budget.max_dense_dim) {
    throw BudgetError("dense eigensolve of dimension " + std::to_string(m.rows()) + " exceeds budget");
  }
  return detail::dense_top(m);
}

inline double lambda_min_dense(const Eigen::MatrixXd& m, const Budget& budget = default_budget()) {
  if (static_cast<std::size_t>(m.rows()) > budget.max_dense_dim) {
    throw BudgetError("dense eigensolve of dimension " + std::to_string(m.rows()) + " exceeds budget");
  }
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense symmetric eigensolve failed");
  return es.eigenvalues()(0);
}

inline double lambda_min_dense(const SymMatrix& m, const Budget& budget = default_budget()) {
  return lambda_min_dense(m.entries, budget);
}

/// lambda_min >= -tol * (1 + ||M||_F).
struct PsdCheck {
  bool psd = false;
  double threshold = 0.0;
  double min_eig = std::numeric_limits<double>::quiet_NaN();  // NaN when not computed
  std::string method;
};

/// Tries a Cholesky factorization of M + threshold * I first; a failure there
/// falls back to a dense eigensolve, which decides.
inline PsdCheck is_psd(const Eigen::MatrixXd& m, double tol = 1e-8,
                       const Budget& budget = default_budget()) {
  PsdCheck out;
  out.threshold = tol * (1.0 + m.norm());
  Eigen::MatrixXd shifted = m;
  shifted.diagonal().array() += out.threshold;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() == Eigen::Success) {
    out.psd = true;
    out.method = "shifted-cholesky";
    return out;
  }
  out.min_eig = lambda_min_dense(m, budget);
  out.psd = out.min_eig >= -out.threshold;
  out.method = "dense-eigensolve";
  return out;
}

inline PsdCheck is_psd(const SymMatrix& m, double tol = 1e-8, const Budget& budget = default_budget()) {
  return is_psd(m.entries, tol, budget);
}

}  // namespace tsc

#pragma once

// Quotient matrices of SoS-symmetric matrices.
//
// For SoS-symmetric M over [n]^k, Q[beta, gamma] = M[I, J] sqrt(|O(beta)| |O(gamma)|)
// with alpha(I) = beta, alpha(J) = gamma. Every u^T M u equals a^T Q a with
// a_beta = <u|O(beta), 1> / sqrt(|O(beta)|) and ||a|| <= ||u||, so
// lambda_max(M) <= max(lambda_max(Q), 0) and ||M|| <= ||Q||. For any PSD,
// unit-trace, SoS-symmetric X the same compression gives <M, X> <= lambda_max(Q),
// which makes lambda_max(Q) of the representation of f an upper bound on the
// degree-d relaxation value at q = d.

#include <cmath>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "tsc/common.hpp"
#include "tsc/index_core.hpp"
#include "tsc/spectral.hpp"
#include "tsc/tensor_model.hpp"

namespace tsc {

struct QuotientMatrix {
  int n = 0;
  int k = 0;
  std::vector<MultiIndex> basis;
  Eigen::MatrixXd entries;
};

/// Throws InputError unless M is SoS-symmetric within tol. Each block is
/// averaged before scaling, which absorbs upstream rounding.
inline QuotientMatrix quotient_matrix(const SymMatrix& m, double tol = 1e-9) {
  require_tuple_indexed(m, "quotient_matrix");
  if (!is_sos_symmetric(m, tol)) throw InputError("quotient_matrix: matrix is not SoS-symmetric");
  const OrbitTable t = make_orbit_table(m.n, m.k);
  const auto c = static_cast<Eigen::Index>(t.class_count());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(c, c);
  const Eigen::Index d = m.dim();
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto cj = static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < d; ++i) {
      sum(static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(i)]), cj) += m.entries(i, j);
    }
  }
  QuotientMatrix q{m.n, m.k, t.classes, Eigen::MatrixXd(c, c)};
  for (Eigen::Index b = 0; b < c; ++b) {
    for (Eigen::Index g = 0; g < c; ++g) {
      const double ob = static_cast<double>(t.orbit_sizes[static_cast<std::size_t>(b)]);
      const double og = static_cast<double>(t.orbit_sizes[static_cast<std::size_t>(g)]);
      // block mean times sqrt(ob * og)
      q.entries(b, g) = sum(b, g) / std::sqrt(ob * og);
    }
  }
  q.entries = (q.entries + q.entries.transpose()) / 2.0;
  return q;
}

struct Domination {
  double lambda_max_m = 0.0;
  double lambda_max_q = 0.0;
  bool holds = false;
};

/// Checks lambda_max(M) <= max(lambda_max(Q), 0) + tol.
inline Domination norm_dominates(const SymMatrix& m, const QuotientMatrix& q, double tol = 1e-9) {
  Domination out;
  out.lambda_max_m = lambda_max_dense(m.entries).value;
  out.lambda_max_q = lambda_max_dense(q.entries).value;
  out.holds = out.lambda_max_m <= std::max(out.lambda_max_q, 0.0) + tol;
  return out;
}

struct QdUpperResult {
  double bound = 0.0;
  Eigen::Index quotient_dim = 0;
  double residual = 0.0;
};

/// lambda_max of the quotient of the SoS-symmetric representation of f, for q = d even.
inline QdUpperResult cert_upper_qd(const DenseTensor& t, const Budget& budget = default_budget()) {
  if (t.order % 2 != 0) throw InputError("cert_upper_qd needs an even-order tensor (q = d)");
  const std::size_t tuples = checked_pow(static_cast<std::size_t>(t.dim), t.order / 2);
  if (tuples * tuples > budget.max_entries) {
    throw BudgetError("flattening of " + std::to_string(tuples) + "^2 entries exceeds budget");
  }
  const SymMatrix rep = sos_symmetrize(flatten(t));
  const QuotientMatrix q = quotient_matrix(rep, 1e-9 * (1.0 + rep.entries.cwiseAbs().maxCoeff()));
  const EigenEstimate top = lambda_max_dense(q.entries, budget);
  return QdUpperResult{top.value, q.entries.rows(), top.residual};
}

}  // namespace tsc

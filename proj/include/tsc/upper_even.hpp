#pragma once

// Upper bounds for even-order tensors through the row-column independent
// symmetrization of A^{(x)r}, r = q/d:
//
//   M = P_sym A^{(x)r} P_sym,
//
// where A is the (symmetrized) flattening of the tensor and P_sym averages a
// vector over [n]^{q/2} across position permutations of each tuple. M is never
// materialized above the dense threshold; it is applied as an operator. Since
// (x^{(x)q/2})^T M x^{(x)q/2} = f(x)^r, lambda_max(M)^{1/r} bounds the degree-q
// relaxation value of f when r is a power of two.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsc/common.hpp"
#include "tsc/index_core.hpp"
#include "tsc/spectral.hpp"
#include "tsc/tensor_model.hpp"

namespace tsc {

/// Orbit-average of v over [n]^k: out[I] = mean of v over O(alpha(I)).
/// Equivalent to averaging over all k! position permutations of I.
inline Eigen::VectorXd sym_project(const Eigen::VectorXd& v, const OrbitTable& orbits) {
  require(static_cast<std::size_t>(v.size()) == orbits.tuple_count(), "sym_project: length is not n^k");
  std::vector<double> sums(orbits.class_count(), 0.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) sums[orbits.class_of_tuple[static_cast<std::size_t>(i)]] += v(i);
  for (std::size_t c = 0; c < sums.size(); ++c) sums[c] /= static_cast<double>(orbits.orbit_sizes[c]);
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = sums[orbits.class_of_tuple[static_cast<std::size_t>(i)]];
  return out;
}

/// (A^{(x)r}) v for A of size m x m and v of length m^r, one mode at a time.
inline Eigen::VectorXd kron_power_apply(const Eigen::MatrixXd& a, int r, const Eigen::VectorXd& v) {
  require(a.rows() == a.cols(), "kron_power_apply: A must be square");
  require(r >= 1, "kron_power_apply: r must be positive");
  const Eigen::Index m = a.rows();
  const auto total = static_cast<Eigen::Index>(checked_pow(static_cast<std::size_t>(m), r));
  require(v.size() == total, "kron_power_apply: vector length is not m^r");
  Eigen::VectorXd cur = v;
  Eigen::VectorXd next(total);
  Eigen::Index right = total / m;  // stride of the mode being contracted
  for (int mode = 0; mode < r; ++mode) {
    const Eigen::Index left = total / (right * m);
    for (Eigen::Index l = 0; l < left; ++l) {
      // Row-major block [j, t] = cur[l*m*right + j*right + t]; as a column-major
      // right x m matrix X(t, j). The mode product is X * A^T.
      Eigen::Map<const Eigen::MatrixXd> x(cur.data() + l * m * right, right, m);
      Eigen::Map<Eigen::MatrixXd> y(next.data() + l * m * right, right, m);
      y.noalias() = x * a.transpose();
    }
    std::swap(cur, next);
    right /= m;
  }
  return cur;
}

/// The operator v -> P_sym A^{(x)r} P_sym v on [n]^{r*k}, A indexed by [n]^k.
class SymmetrizedPowerOp {
 public:
  SymmetrizedPowerOp(Eigen::MatrixXd base, int n, int base_k, int power,
                     const Budget& budget = default_budget())
      : base_(std::make_shared<const Eigen::MatrixXd>(std::move(base))), power_(power) {
    require(base_->rows() == base_->cols(), "SymmetrizedPowerOp: base must be square");
    require(static_cast<std::size_t>(base_->rows()) == checked_pow(static_cast<std::size_t>(n), base_k),
            "SymmetrizedPowerOp: base is not n^k x n^k");
    const std::size_t dim = checked_pow(static_cast<std::size_t>(n), base_k * power);
    if (dim > budget.max_operator_dim) {
      throw BudgetError("symmetrized power operator of dimension " + std::to_string(dim) + " exceeds budget");
    }
    orbits_ = std::make_shared<const OrbitTable>(make_orbit_table(n, base_k * power, budget));
  }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(orbits_->tuple_count()); }
  int power() const { return power_; }
  const OrbitTable& orbits() const { return *orbits_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return sym_project(kron_power_apply(*base_, power_, sym_project(v, *orbits_)), *orbits_);
  }

  LinearOperator as_operator() const {
    auto base = base_;
    auto orbits = orbits_;
    const int power = power_;
    return LinearOperator{dim(),
                          [base, orbits, power](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
                            out = sym_project(kron_power_apply(*base, power, sym_project(in, *orbits)),
                                              *orbits);
                          },
                          true};
  }

 private:
  std::shared_ptr<const Eigen::MatrixXd> base_;
  std::shared_ptr<const OrbitTable> orbits_;
  int power_ = 1;
};

inline bool is_power_of_two(int r) { return r >= 1 && (r & (r - 1)) == 0; }

/// sign-preserving lambda^{1/r}; f^r is nonnegative for even r, so a negative
/// top eigenvalue there is rounding and clamps to 0.
inline double root_of_level(double lambda, int r) {
  if (r == 1) return lambda;
  return lambda <= 0.0 ? 0.0 : std::pow(lambda, 1.0 / static_cast<double>(r));
}

struct UpperEvenResult {
  double bound = 0.0;
  double lambda_max = 0.0;
  double residual = 0.0;
  long iterations = 0;
  int power = 1;
  Eigen::Index dim = 0;
  std::string method;
};

/// (lambda_max(P_sym A^{(x)q/d} P_sym))^{d/q} with A = (flat + flat^T) / 2.
inline UpperEvenResult cert_upper_even(const DenseTensor& t, int q, const SpectralOptions& spectral = {},
                                       const Budget& budget = default_budget()) {
  if (t.order % 2 != 0) throw InputError("cert_upper_even needs an even-order tensor");
  if (q <= 0 || q % t.order != 0) throw InputError("cert_upper_even needs q to be a positive multiple of d");
  const int r = q / t.order;
  if (!is_power_of_two(r)) {
    throw InputError("cert_upper_even needs q/d to be a power of two (got " + std::to_string(r) + ")");
  }
  const Eigen::MatrixXd flat = flatten(t).entries;
  SymmetrizedPowerOp op((flat + flat.transpose()) / 2.0, t.dim, t.order / 2, r, budget);
  const EigenEstimate top = lambda_max(op.as_operator(), spectral);
  if (!top.converged) {
    throw ConvergenceError("cert_upper_even: eigensolver did not converge (residual " +
                           std::to_string(top.residual) + ")");
  }
  UpperEvenResult out;
  out.lambda_max = top.value;
  out.bound = root_of_level(top.value, r);
  out.residual = top.residual;
  out.iterations = top.iterations;
  out.power = r;
  out.dim = op.dim();
  out.method = top.method;
  return out;
}

}  // namespace tsc

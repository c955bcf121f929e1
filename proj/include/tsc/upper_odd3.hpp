#pragma once

// Upper bounds for order-3 tensors.
//
// With T_l the symmetrized slices, f(x) = sum_l x_l (x^T T_l x) and
// g(x) = sum_l (x^T T_l x)^2 = (x^{(x)2})^T Tcal x^{(x)2}, Tcal = sum_l T_l (x) T_l.
// E keeps the ((i,i),(j,j)) entries of Tcal, E' is the diagonal matrix with the
// same quadratic form h, and T = Tcal - E. For B = P_sym T^{(x)q/4} P_sym:
//
//   E~[f] <= E~[g]^{1/2} <= (||B||^{4/q} + lambda_max(E'))^{1/2}.
//
// lambda_max(E') is computed from the instance, so the bound holds
// unconditionally (no high-probability step).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsc/common.hpp"
#include "tsc/spectral.hpp"
#include "tsc/tensor_model.hpp"
#include "tsc/upper_even.hpp"

namespace tsc {

struct OddPipelineState {
  int n = 0;
  int q = 0;
  std::vector<Eigen::MatrixXd> slices;  // T_l, symmetric
  Eigen::MatrixXd tcal;                 // sum_l T_l (x) T_l over [n]^2
  Eigen::MatrixXd e;                    // ((i,i),(j,j)) part of tcal
  Eigen::VectorXd e_prime;              // diagonal of E'
  Eigen::MatrixXd t;                    // tcal - e
};

inline void check_odd_level(int q) {
  if (q <= 0 || q % 4 != 0) throw InputError("order-3 certificates need q divisible by 4");
  if (!is_power_of_two(q / 4)) {
    throw InputError("order-3 certificates need q/4 to be a power of two (got q = " + std::to_string(q) + ")");
  }
}

inline OddPipelineState build_odd_state(const DenseTensor& a, int q, const Budget& budget = default_budget()) {
  if (a.order != 3) throw InputError("build_odd_state needs an order-3 tensor");
  check_odd_level(q);
  const std::size_t op_dim = checked_pow(static_cast<std::size_t>(a.dim), q / 2);
  if (op_dim > budget.max_operator_dim) {
    throw BudgetError("order-3 operator of dimension " + std::to_string(op_dim) + " exceeds budget");
  }
  const Eigen::Index n = a.dim;
  const Eigen::Index n2 = n * n;
  OddPipelineState s;
  s.n = a.dim;
  s.q = q;
  s.slices = symmetrized_slices(a);
  s.tcal = Eigen::MatrixXd::Zero(n2, n2);
  for (const auto& tl : s.slices) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
          for (Eigen::Index l = 0; l < n; ++l) s.tcal(i * n + j, k * n + l) += tl(i, k) * tl(j, l);
  }
  s.e = Eigen::MatrixXd::Zero(n2, n2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s.e(i * n + i, j * n + j) = s.tcal(i * n + i, j * n + j);
  s.e_prime = Eigen::VectorXd::Zero(n2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      s.e_prime(i * n + j) = s.e(i * n + i, j * n + j) + s.e(j * n + j, i * n + i);
  s.t = s.tcal - s.e;
  return s;
}

struct UpperOdd3Result {
  double bound = 0.0;
  double b_norm = 0.0;        // ||B||_2
  double e_prime_max = 0.0;   // lambda_max(E'), the largest diagonal entry
  double residual = 0.0;
  long iterations = 0;
  bool radicand_clamped = false;
  bool e_prime_exceeds_5n = false;
  Eigen::Index dim = 0;
  std::string method;
};

inline UpperOdd3Result cert_upper_odd3(const DenseTensor& a, int q, const SpectralOptions& spectral = {},
                                       const Budget& budget = default_budget()) {
  const OddPipelineState s = build_odd_state(a, q, budget);
  const int r = q / 4;
  SymmetrizedPowerOp op(s.t, s.n, 2, r, budget);
  EigenEstimate hi;
  EigenEstimate lo;
  const double norm = spectral_norm(op.as_operator(), spectral, &hi, &lo);
  if (!hi.converged || !lo.converged) {
    throw ConvergenceError("cert_upper_odd3: eigensolver did not converge");
  }
  UpperOdd3Result out;
  out.b_norm = norm;
  out.e_prime_max = s.e_prime.size() ? s.e_prime.maxCoeff() : 0.0;
  const double radicand = std::pow(norm, 1.0 / static_cast<double>(r)) + out.e_prime_max;
  out.radicand_clamped = radicand < 0.0;
  out.bound = std::sqrt(std::max(radicand, 0.0));
  out.e_prime_exceeds_5n = out.e_prime_max > 5.0 * s.n;
  out.residual = std::max(hi.residual, lo.residual);
  out.iterations = hi.iterations + lo.iterations;
  out.dim = op.dim();
  out.method = hi.method;
  return out;
}

}  // namespace tsc

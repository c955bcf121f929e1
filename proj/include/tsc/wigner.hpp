#pragma once

// Catalan numbers, the parenthesis matrix R, the Hankel matrix H = R^T R of
// semicircle moments, and the Wigner moment matrix What over N^{n,q/2}.
//
// What[alpha, beta] = prod_i Catalan((alpha_i + beta_i) / 2) when every
// alpha_i + beta_i is even and 0 otherwise. These are the moments
// E[x^(alpha+beta)] of independent semicircle variables of radius 2 with the
// normalizing constant already cancelled, so the matrix is integral and its
// smallest eigenvalue is at least 1/2.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsc/common.hpp"
#include "tsc/index_core.hpp"

namespace tsc {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using UIntMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// C_l = binom(2l, l) / (l + 1), exact.
inline std::uint64_t catalan(int l) {
  require(l >= 0, "catalan needs l >= 0");
  unsigned __int128 c = 1;
  for (int i = 0; i < l; ++i) {
    // C_{i+1} = C_i * 2(2i+1) / (i+2)
    c = c * static_cast<unsigned>(2 * (2 * i + 1)) / static_cast<unsigned>(i + 2);
    if (c > std::numeric_limits<std::uint64_t>::max()) {
      throw BudgetError("Catalan(" + std::to_string(l) + ") overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(c);
}

/// R = [e0, T e0, ..., T^k e0] with T the 0/1 matrix T[i,j] = 1 iff |i-j| = 1.
/// R[i, j] counts consistent parenthesis strings of length j with i more
/// '(' than ')'.
inline IntMatrix paren_matrix(int k) {
  require(k >= 0, "paren_matrix needs k >= 0");
  const Eigen::Index size = k + 1;
  IntMatrix r = IntMatrix::Zero(size, size);
  r(0, 0) = 1;
  for (Eigen::Index j = 1; j < size; ++j) {
    for (Eigen::Index i = 0; i < size; ++i) {
      std::int64_t v = 0;
      if (i > 0) v += r(i - 1, j - 1);
      if (i + 1 < size) v += r(i + 1, j - 1);
      r(i, j) = v;
    }
  }
  return r;
}

/// H = R^T R; H[i,j] = Catalan((i+j)/2) for even i+j and 0 otherwise.
inline IntMatrix hankel_matrix(int k) {
  const IntMatrix r = paren_matrix(k);
  return r.transpose() * r;
}

struct WignerMomentMatrix {
  int n = 0;
  int q = 0;
  std::vector<MultiIndex> basis;  // N^{n,q/2}, graded-lex
  UIntMatrix entries;

  Eigen::MatrixXd real() const { return entries.cast<double>(); }
};

inline WignerMomentMatrix wigner_hat(int n, int q, const Budget& budget = default_budget()) {
  require(n >= 1, "wigner_hat needs n >= 1");
  require(q >= 0 && q % 2 == 0, "wigner_hat needs an even q");
  const int k = q / 2;
  const std::uint64_t m = multiindex_count(n, k);
  if (m > budget.max_dense_dim) {
    throw BudgetError("Wigner moment matrix dimension " + std::to_string(m) + " exceeds budget");
  }
  WignerMomentMatrix w;
  w.n = n;
  w.q = q;
  w.basis = enumerate_multiindices(n, k, budget);
  std::vector<std::uint64_t> cat(static_cast<std::size_t>(k + 1));
  for (int l = 0; l <= k; ++l) cat[static_cast<std::size_t>(l)] = catalan(l);
  const auto size = static_cast<Eigen::Index>(m);
  w.entries = UIntMatrix::Zero(size, size);
  for (Eigen::Index a = 0; a < size; ++a) {
    for (Eigen::Index b = a; b < size; ++b) {
      const auto& alpha = w.basis[static_cast<std::size_t>(a)].counts;
      const auto& beta = w.basis[static_cast<std::size_t>(b)].counts;
      std::uint64_t v = 1;
      for (std::size_t i = 0; i < alpha.size() && v != 0; ++i) {
        const int s = alpha[i] + beta[i];
        v = (s % 2 != 0) ? 0 : v * cat[static_cast<std::size_t>(s / 2)];
      }
      w.entries(a, b) = v;
      w.entries(b, a) = v;
    }
  }
  return w;
}

/// W[I, J] = What[alpha(I), alpha(J)] over [n]^{q/2}.
inline SymMatrix wigner_extend(const WignerMomentMatrix& w, const OrbitTable& orbits) {
  require(orbits.n == w.n && 2 * orbits.k == w.q, "wigner_extend: orbit table does not match (n, q)");
  const auto d = static_cast<Eigen::Index>(orbits.tuple_count());
  SymMatrix out{IndexKind::tuple, w.n, w.q / 2, Eigen::MatrixXd(d, d), SymmetryTag::sos_symmetric};
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto cj = static_cast<Eigen::Index>(orbits.class_of_tuple[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ci = static_cast<Eigen::Index>(orbits.class_of_tuple[static_cast<std::size_t>(i)]);
      out.entries(i, j) = static_cast<double>(w.entries(ci, cj));
    }
  }
  return out;
}

inline SymMatrix wigner_extend(const WignerMomentMatrix& w) {
  return wigner_extend(w, make_orbit_table(w.n, w.q / 2));
}

/// trace(W) = sum_alpha |O(alpha)| What[alpha, alpha], without materializing W.
inline double wigner_extended_trace(const WignerMomentMatrix& w) {
  double tr = 0.0;
  for (std::size_t a = 0; a < w.basis.size(); ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    tr += static_cast<double>(orbit_size(w.basis[a])) * static_cast<double>(w.entries(ia, ia));
  }
  return tr;
}

}  // namespace tsc

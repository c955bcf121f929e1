#pragma once

// Tuples over [n]^k, multi-indices in N^{n,k}, orbits, and SoS-symmetry.
//
// Conventions used throughout the library:
//  * Tuple entries are 0-based, I = (i_1, ..., i_k) with 0 <= i_l < n.
//  * Tuples are enumerated row-major lexicographically; the linear index of I
//    is sum_l i_l * n^(k-l), so I (+) J has index lin(I) * n^|J| + lin(J).
//  * Multi-indices of a fixed degree are enumerated in graded-lex order, i.e.
//    lexicographically descending counts: (2,0), (1,1), (0,2).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsc/common.hpp"

namespace tsc {

struct MultiIndex {
  std::vector<int> counts;
  int degree = 0;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> c)
      : counts(std::move(c)), degree(std::accumulate(counts.begin(), counts.end(), 0)) {}

  int dim() const { return static_cast<int>(counts.size()); }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  MultiIndex operator+(const MultiIndex& other) const {
    std::vector<int> c(counts);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += other.counts[i];
    return MultiIndex(std::move(c));
  }
};

using IndexTuple = std::vector<int>;

/// alpha(I): counts[j] = #{l : I_l = j}.
inline MultiIndex tuple_to_multiindex(std::span<const int> tuple, int n) {
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int e : tuple) {
    if (e < 0 || e >= n) {
      throw InputError("tuple entry " + std::to_string(e) + " outside [0, " +
                       std::to_string(n) + ")");
    }
    ++counts[static_cast<std::size_t>(e)];
  }
  return MultiIndex(std::move(counts));
}

/// |O(alpha)| = k! / prod alpha_i!, exact, with overflow detection.
inline std::uint64_t orbit_size(const MultiIndex& alpha) {
  std::uint64_t out = 1;
  std::uint64_t placed = 0;
  for (int c : alpha.counts) {
    placed += static_cast<std::uint64_t>(c);
    const std::uint64_t b = binomial(placed, static_cast<std::uint64_t>(c));
    std::uint64_t next = 0;
    if (__builtin_mul_overflow(out, b, &next)) {
      throw BudgetError("orbit size overflows 64 bits");
    }
    out = next;
  }
  return out;
}

/// |N^{n,k}| = C(n+k-1, k).
inline std::uint64_t multiindex_count(int n, int k) {
  require(n >= 1 && k >= 0, "multiindex_count needs n >= 1, k >= 0");
  return binomial(static_cast<std::uint64_t>(n + k - 1), static_cast<std::uint64_t>(k));
}

namespace detail {
inline void enumerate_rec(int pos, int remaining, std::vector<int>& cur,
                          std::vector<MultiIndex>& out) {
  const int n = static_cast<int>(cur.size());
  if (pos == n - 1) {
    cur[static_cast<std::size_t>(pos)] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[static_cast<std::size_t>(pos)] = v;
    enumerate_rec(pos + 1, remaining - v, cur, out);
  }
}
}  // namespace detail

/// All alpha with |alpha| = k in graded-lex order.
inline std::vector<MultiIndex> enumerate_multiindices(int n, int k,
                                                      const Budget& budget = default_budget()) {
  const std::uint64_t count = multiindex_count(n, k);
  if (count > budget.max_entries) {
    throw BudgetError("N^{n,k} has " + std::to_string(count) + " elements, over budget");
  }
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  detail::enumerate_rec(0, k, cur, out);
  return out;
}

/// Position of alpha in enumerate_multiindices(alpha.dim(), alpha.degree).
inline std::size_t multiindex_rank(const MultiIndex& alpha) {
  const int n = alpha.dim();
  std::uint64_t rank = 0;
  int remaining = alpha.degree;
  for (int i = 0; i + 1 < n; ++i) {
    const int a = alpha.counts[static_cast<std::size_t>(i)];
    // Every multi-index with a larger value at position i comes first.
    for (int v = remaining; v > a; --v) rank += multiindex_count(n - i - 1, remaining - v);
    remaining -= a;
  }
  return static_cast<std::size_t>(rank);
}

inline std::size_t tuple_linear_index(std::span<const int> tuple, int n) {
  std::size_t lin = 0;
  for (int e : tuple) lin = lin * static_cast<std::size_t>(n) + static_cast<std::size_t>(e);
  return lin;
}

inline IndexTuple tuple_from_linear(std::size_t lin, int n, int k) {
  IndexTuple out(static_cast<std::size_t>(k));
  for (int l = k - 1; l >= 0; --l) {
    out[static_cast<std::size_t>(l)] = static_cast<int>(lin % static_cast<std::size_t>(n));
    lin /= static_cast<std::size_t>(n);
  }
  return out;
}

/// Orbit bookkeeping for [n]^k: the class of every tuple and the orbit sizes.
struct OrbitTable {
  int n = 0;
  int k = 0;
  std::vector<MultiIndex> classes;          // graded-lex order
  std::vector<std::uint64_t> orbit_sizes;   // |O(alpha)| per class
  std::vector<std::size_t> class_of_tuple;  // length n^k

  std::size_t tuple_count() const { return class_of_tuple.size(); }
  std::size_t class_count() const { return classes.size(); }
};

inline OrbitTable make_orbit_table(int n, int k, const Budget& budget = default_budget()) {
  require(n >= 1 && k >= 0, "orbit table needs n >= 1, k >= 0");
  OrbitTable t;
  t.n = n;
  t.k = k;
  const std::size_t tuples = checked_pow(static_cast<std::size_t>(n), k);
  if (tuples > budget.max_entries) {
    throw BudgetError("[n]^k has " + std::to_string(tuples) + " tuples, over budget");
  }
  t.classes = enumerate_multiindices(n, k, budget);
  t.orbit_sizes.reserve(t.classes.size());
  for (const auto& c : t.classes) t.orbit_sizes.push_back(orbit_size(c));
  t.class_of_tuple.resize(tuples);
  IndexTuple tuple(static_cast<std::size_t>(k), 0);
  for (std::size_t lin = 0; lin < tuples; ++lin) {
    t.class_of_tuple[lin] = multiindex_rank(tuple_to_multiindex(tuple, n));
    // advance row-major
    for (int l = k - 1; l >= 0; --l) {
      if (++tuple[static_cast<std::size_t>(l)] < n) break;
      tuple[static_cast<std::size_t>(l)] = 0;
    }
  }
  return t;
}

/// rank of alpha(I) + alpha(J) in N^{n,2k}, for every pair of classes of [n]^k.
inline Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> class_sum_ranks(
    const OrbitTable& t) {
  const auto m = static_cast<Eigen::Index>(t.class_count());
  Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> out(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a; b < m; ++b) {
      const std::size_t r = multiindex_rank(t.classes[static_cast<std::size_t>(a)] +
                                            t.classes[static_cast<std::size_t>(b)]);
      out(a, b) = r;
      out(b, a) = r;
    }
  }
  return out;
}

enum class IndexKind { tuple, multiindex };
enum class SymmetryTag { none = 0, symmetric = 1, sos_symmetric = 2 };

/// Square matrix indexed by [n]^k tuples or by N^{n,k} multi-indices.
struct SymMatrix {
  IndexKind kind = IndexKind::tuple;
  int n = 0;
  int k = 0;
  Eigen::MatrixXd entries;
  SymmetryTag tag = SymmetryTag::none;

  Eigen::Index dim() const { return entries.rows(); }
};

inline void require_tuple_indexed(const SymMatrix& m, const char* op) {
  if (m.kind != IndexKind::tuple) throw InputError(std::string(op) + " needs a tuple-indexed matrix");
  const std::size_t expect = checked_pow(static_cast<std::size_t>(m.n), m.k);
  if (static_cast<std::size_t>(m.entries.rows()) != expect || m.entries.cols() != m.entries.rows()) {
    throw InputError(std::string(op) + ": matrix is not n^k x n^k");
  }
}

/// True iff all entries sharing alpha(I) + alpha(J) agree within tol.
inline bool is_sos_symmetric(const SymMatrix& m, double tol) {
  require_tuple_indexed(m, "is_sos_symmetric");
  const OrbitTable t = make_orbit_table(m.n, m.k);
  const auto sums = class_sum_ranks(t);
  const std::size_t classes = multiindex_count(m.n, 2 * m.k);
  std::vector<double> lo(classes, std::numeric_limits<double>::infinity());
  std::vector<double> hi(classes, -std::numeric_limits<double>::infinity());
  const Eigen::Index d = m.dim();
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto cj = static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ci = static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(i)]);
      const std::size_t g = sums(ci, cj);
      const double v = m.entries(i, j);
      lo[g] = std::min(lo[g], v);
      hi[g] = std::max(hi[g], v);
    }
  }
  for (std::size_t g = 0; g < classes; ++g) {
    if (hi[g] >= lo[g] && hi[g] - lo[g] > tol) return false;
  }
  return true;
}

/// Averages M over each class {(I,J) : alpha(I) + alpha(J) = gamma}. The
/// result is the unique SoS-symmetric representation of the same polynomial.
/// Classes that are already constant are copied verbatim, so the map is
/// exactly idempotent.
inline SymMatrix sos_symmetrize(const SymMatrix& m) {
  require_tuple_indexed(m, "sos_symmetrize");
  const OrbitTable t = make_orbit_table(m.n, m.k);
  const auto sums = class_sum_ranks(t);
  const std::size_t classes = multiindex_count(m.n, 2 * m.k);
  std::vector<double> total(classes, 0.0);
  std::vector<double> first(classes, 0.0);
  std::vector<std::size_t> count(classes, 0);
  std::vector<char> constant(classes, 1);
  const Eigen::Index d = m.dim();
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto cj = static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ci = static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(i)]);
      const std::size_t g = sums(ci, cj);
      const double v = m.entries(i, j);
      if (count[g] == 0) first[g] = v;
      else if (v != first[g]) constant[g] = 0;
      total[g] += v;
      ++count[g];
    }
  }
  std::vector<double> value(classes, 0.0);
  for (std::size_t g = 0; g < classes; ++g) {
    if (count[g] == 0) continue;
    value[g] = constant[g] ? first[g] : total[g] / static_cast<double>(count[g]);
  }
  SymMatrix out{IndexKind::tuple, m.n, m.k, Eigen::MatrixXd(d, d), SymmetryTag::sos_symmetric};
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto cj = static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ci = static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(i)]);
      out.entries(i, j) = value[sums(ci, cj)];
    }
  }
  return out;
}

/// x^{(x)k} as a vector over [n]^k.
inline Eigen::VectorXd tensor_power(const Eigen::VectorXd& x, int k) {
  Eigen::VectorXd out = Eigen::VectorXd::Ones(1);
  for (int l = 0; l < k; ++l) {
    Eigen::VectorXd next(out.size() * x.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * x.size(), x.size()) = out(i) * x;
    out = std::move(next);
  }
  return out;
}

}  // namespace tsc

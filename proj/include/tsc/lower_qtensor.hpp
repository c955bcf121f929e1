#pragma once

// Certified lower bounds at q = d through an explicit feasible moment matrix
//
//   M = (1/c1) ( (1/c2) (q^{3q/4} / n^{3q/4}) Amult + W / n^{q/2} ),
//
// where Amult keeps the coefficient f_{alpha(I)+alpha(J)} / q! on all-distinct
// positions I (+) J and W is the tuple extension of the Wigner moment matrix.
// c1 fixes trace(M) = 1 (trace(Amult) = 0); c2 is the smallest power of two for
// which M passes the PSD test. Then <A, M> is a lower bound on the relaxation
// value for every representation A of f.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tsc/common.hpp"
#include "tsc/index_core.hpp"
#include "tsc/spectral.hpp"
#include "tsc/tensor_model.hpp"
#include "tsc/wigner.hpp"

namespace tsc {

namespace detail {
inline bool all_distinct(const IndexTuple& a, const IndexTuple& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (a[i] == a[j]) return false;
    for (int e : b)
      if (a[i] == e) return false;
  }
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j)
      if (b[i] == b[j]) return false;
  return true;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}
}  // namespace detail

/// Amult[I, J] = f_{alpha(I)+alpha(J)} / q! when the q entries of I (+) J are
/// pairwise distinct, else 0.
inline SymMatrix build_multilinear_A(const DenseTensor& t, const Budget& budget = default_budget()) {
  const int q = t.order;
  if (q % 2 != 0) throw InputError("build_multilinear_A needs q = d even");
  if (q > t.dim) throw InputError("build_multilinear_A needs q <= n (no multilinear monomials otherwise)");
  const int k = q / 2;
  const std::size_t tuples = checked_pow(static_cast<std::size_t>(t.dim), k);
  if (tuples > budget.max_dense_dim) {
    throw BudgetError("moment matrix dimension " + std::to_string(tuples) + " exceeds dense budget");
  }
  const CoefficientMap f = coefficients(t);
  const double qfact = detail::factorial(q);
  const auto d = static_cast<Eigen::Index>(tuples);
  std::vector<IndexTuple> tup(tuples);
  std::vector<MultiIndex> alpha(tuples);
  for (std::size_t i = 0; i < tuples; ++i) {
    tup[i] = tuple_from_linear(i, t.dim, k);
    alpha[i] = tuple_to_multiindex(tup[i], t.dim);
  }
  SymMatrix out{IndexKind::tuple, t.dim, k, Eigen::MatrixXd::Zero(d, d), SymmetryTag::sos_symmetric};
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (!detail::all_distinct(tup[ui], tup[uj])) continue;
      out.entries(i, j) = f.at(alpha[ui] + alpha[uj]) / qfact;
    }
  }
  return out;
}

struct MomentCertificate {
  int n = 0;
  int q = 0;
  SymMatrix m;
  double c1 = 0.0;
  double c2 = 0.0;
  double trace = 0.0;
  double min_eig = 0.0;
  double inner_value = 0.0;
  std::optional<std::uint64_t> seed;
};

/// FNV-1a over the little-endian bytes of the entries (column-major).
inline std::uint64_t matrix_hash(const Eigen::MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t bits = 0;
    const double v = m.data()[i];
    std::memcpy(&bits, &v, 8);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

struct LowerOptions {
  double psd_tol = 1e-8;
  int max_doublings = 64;
};

inline MomentCertificate calibrate_and_build(const DenseTensor& t, const LowerOptions& opt = {},
                                             const Budget& budget = default_budget()) {
  const int q = t.order;
  const int n = t.dim;
  const SymMatrix amult = build_multilinear_A(t, budget);
  const OrbitTable orbits = make_orbit_table(n, q / 2, budget);
  const WignerMomentMatrix what = wigner_hat(n, q, budget);
  const SymMatrix w = wigner_extend(what, orbits);

  const double nq2 = std::pow(static_cast<double>(n), q / 2.0);
  const double scale = std::pow(static_cast<double>(q) / n, 0.75 * q);
  const double c1 = w.entries.trace() / nq2;

  MomentCertificate cert;
  cert.n = n;
  cert.q = q;
  cert.seed = t.seed;
  cert.c1 = c1;
  Eigen::MatrixXd base_w = w.entries / nq2;
  bool found = false;
  double c2 = 1.0;
  for (int step = 0; step <= opt.max_doublings; ++step, c2 *= 2.0) {
    Eigen::MatrixXd m = (scale / c2 * amult.entries + base_w) / c1;
    if (is_psd(m, opt.psd_tol, budget).psd) {
      cert.m = SymMatrix{IndexKind::tuple, n, q / 2, std::move(m), SymmetryTag::sos_symmetric};
      found = true;
      break;
    }
  }
  if (!found) {
    throw InputError("calibrate_and_build: no c2 <= 2^" + std::to_string(opt.max_doublings) +
                     " makes the moment matrix PSD at tolerance");
  }
  cert.c2 = c2;
  cert.trace = cert.m.entries.trace();
  cert.min_eig = lambda_min_dense(cert.m.entries, budget);
  const SymMatrix rep = sos_symmetrize(flatten(t));
  cert.inner_value = rep.entries.cwiseProduct(cert.m.entries).sum();
  return cert;
}

struct CertificateCheck {
  bool ok = true;
  std::vector<std::string> reasons;
  double inner_sos = 0.0;   // against the SoS-symmetric representation
  double inner_flat = 0.0;  // against the raw flattening
};

/// Rechecks every property of the certificate from scratch.
inline CertificateCheck verify_certificate(const MomentCertificate& cert, const DenseTensor& t,
                                           double psd_tol = 1e-8) {
  CertificateCheck out;
  const auto fail = [&out](std::string why) {
    out.ok = false;
    out.reasons.push_back(std::move(why));
  };
  if (t.order != cert.q || t.dim != cert.n) {
    fail("tensor does not match certificate (n, q)");
    return out;
  }
  const Eigen::MatrixXd& m = cert.m.entries;
  const double tr = m.trace();
  if (std::abs(tr - 1.0) > 1e-9) fail("trace " + std::to_string(tr) + " differs from 1");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + m.cwiseAbs().maxCoeff())) {
    fail("matrix is not symmetric");
  }
  const double lmin = lambda_min_dense(m);
  if (lmin < -psd_tol * (1.0 + m.norm())) fail("minimum eigenvalue " + std::to_string(lmin) + " is below tolerance");
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if (!is_sos_symmetric(cert.m, 1e-12 * scale)) fail("matrix is not SoS-symmetric");
  const Eigen::MatrixXd flat = flatten(t).entries;
  out.inner_sos = sos_symmetrize(flatten(t)).entries.cwiseProduct(m).sum();
  out.inner_flat = flat.cwiseProduct(m).sum();
  if (std::abs(out.inner_sos - out.inner_flat) > 1e-8 * (1.0 + std::abs(out.inner_sos))) {
    fail("inner product depends on the representation of f");
  }
  if (std::abs(out.inner_sos - cert.inner_value) > 1e-8 * (1.0 + std::abs(out.inner_sos))) {
    fail("recorded inner value does not match recomputation");
  }
  return out;
}

inline nlohmann::json certificate_to_json(const MomentCertificate& cert, bool with_matrix = false) {
  nlohmann::json j;
  j["n"] = cert.n;
  j["q"] = cert.q;
  j["c1"] = cert.c1;
  j["c2"] = cert.c2;
  j["trace"] = cert.trace;
  j["min_eig"] = cert.min_eig;
  j["inner_value"] = cert.inner_value;
  j["seed"] = cert.seed ? nlohmann::json(*cert.seed) : nlohmann::json(nullptr);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(matrix_hash(cert.m.entries)));
  j["matrix_hash"] = hex;
  if (with_matrix) {
    std::vector<double> flat(cert.m.entries.data(), cert.m.entries.data() + cert.m.entries.size());
    j["matrix"] = flat;
  }
  return j;
}

}  // namespace tsc

#pragma once

// Release-gate invariant suite at pinned seeds. Each check reports pass/fail,
// a short detail string and its wall time. The scaling sweeps live in the
// acceptance binary; everything here runs in seconds.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tsc/fmax_estimate.hpp"
#include "tsc/index_core.hpp"
#include "tsc/lower_qtensor.hpp"
#include "tsc/quotient.hpp"
#include "tsc/report.hpp"
#include "tsc/spectral.hpp"
#include "tsc/tensor_model.hpp"
#include "tsc/upper_even.hpp"
#include "tsc/upper_odd3.hpp"
#include "tsc/wigner.hpp"

namespace tsc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double runtime_ms = 0.0;
};

using CatalanFn = std::function<std::uint64_t(int)>;

namespace detail {

inline Eigen::VectorXd unit_gaussian(std::mt19937_64& engine, int n) { return sphere_sample(engine, n); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace detail

/// Random SoS-symmetric matrix over [n]^k with one N(0,1) value per class of N^{n,2k}.
inline SymMatrix random_sos_symmetric(int n, int k, std::mt19937_64& engine) {
  const OrbitTable t = make_orbit_table(n, k);
  const auto sums = class_sum_ranks(t);
  std::normal_distribution<double> normal;
  std::vector<double> value(multiindex_count(n, 2 * k));
  for (double& v : value) v = normal(engine);
  const auto d = static_cast<Eigen::Index>(t.tuple_count());
  SymMatrix m{IndexKind::tuple, n, k, Eigen::MatrixXd(d, d), SymmetryTag::sos_symmetric};
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      m.entries(i, j) = value[sums(static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(i)]),
                                   static_cast<Eigen::Index>(t.class_of_tuple[static_cast<std::size_t>(j)]))];
  return m;
}

inline CheckResult check_orbit_sizes() {
  CheckResult r{"index_core.orbit_sizes_sum", true, "", 0.0};
  for (int n = 1; n <= 4; ++n) {
    for (int k = 0; k <= 3; ++k) {
      std::uint64_t total = 0;
      for (const auto& a : enumerate_multiindices(n, k)) total += orbit_size(a);
      if (total != checked_pow(static_cast<std::size_t>(n), k)) {
        r.passed = false;
        r.detail = "n=" + std::to_string(n) + " k=" + std::to_string(k);
      }
    }
  }
  return r;
}

inline CheckResult check_sos_symmetrize() {
  CheckResult r{"index_core.sos_symmetrize", true, "", 0.0};
  std::mt19937_64 engine(11);
  std::normal_distribution<double> normal;
  for (auto [n, k] : {std::pair{2, 1}, std::pair{3, 2}, std::pair{2, 3}}) {
    const auto d = static_cast<Eigen::Index>(checked_pow(static_cast<std::size_t>(n), k));
    SymMatrix m{IndexKind::tuple, n, k, Eigen::MatrixXd(d, d), SymmetryTag::none};
    for (Eigen::Index i = 0; i < m.entries.size(); ++i) m.entries.data()[i] = normal(engine);
    const SymMatrix once = sos_symmetrize(m);
    const SymMatrix twice = sos_symmetrize(once);
    if (once.entries != twice.entries) {
      r.passed = false;
      r.detail = "not idempotent";
    }
    for (int s = 0; s < 100; ++s) {
      const Eigen::VectorXd y = tensor_power(detail::unit_gaussian(engine, n), k);
      const double a = y.dot(m.entries * y);
      const double b = y.dot(once.entries * y);
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
        r.passed = false;
        r.detail = "polynomial changed";
      }
    }
  }
  return r;
}

inline CheckResult check_flatten_roundtrip() {
  CheckResult r{"tensor_model.flatten_roundtrip", true, "", 0.0};
  for (int d : {2, 4, 6}) {
    const DenseTensor t = sample_tensor(3, d, TensorModel::gaussian, 5);
    if (unflatten(flatten(t)).entries != t.entries) {
      r.passed = false;
      r.detail = "d=" + std::to_string(d);
    }
  }
  return r;
}

inline CheckResult check_rademacher_variance() {
  CheckResult r{"tensor_model.rademacher_variance", true, "", 0.0};
  const DenseTensor t = sample_tensor(10, 4, TensorModel::rademacher, 2024);
  double mean = 0.0;
  for (double v : t.entries) mean += v;
  mean /= static_cast<double>(t.entries.size());
  double var = 0.0;
  for (double v : t.entries) var += (v - mean) * (v - mean);
  var /= static_cast<double>(t.entries.size());
  r.passed = var >= 0.9 && var <= 1.1;
  r.detail = "variance " + format_double(var);
  return r;
}

inline CheckResult check_wigner() {
  CheckResult r{"wigner.min_eig_and_entries", true, "", 0.0};
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 5; ++n) {
    for (int q : {2, 4, 6, 8}) {
      const WignerMomentMatrix w = wigner_hat(n, q);
      const double bound = std::ldexp(1.0, q);
      for (Eigen::Index i = 0; i < w.entries.rows(); ++i) {
        if (w.entries(i, i) < 1) r.passed = false;
        for (Eigen::Index j = 0; j < w.entries.cols(); ++j)
          if (static_cast<double>(w.entries(i, j)) > bound) r.passed = false;
      }
      const double lmin = lambda_min_dense(w.real());
      worst = std::min(worst, lmin);
      if (lmin < 0.5 - 1e-9) r.passed = false;
    }
  }
  r.detail = "smallest eigenvalue " + format_double(worst);
  return r;
}

/// H(k) against the Catalan closed form given by `cat`, plus positive definiteness.
inline CheckResult check_hankel(const CatalanFn& cat) {
  CheckResult r{"wigner.hankel", true, "", 0.0};
  for (int k = 0; k <= 10; ++k) {
    const IntMatrix h = hankel_matrix(k);
    for (int i = 0; i <= k; ++i) {
      for (int j = 0; j <= k; ++j) {
        const std::int64_t expect = (i + j) % 2 ? 0 : static_cast<std::int64_t>(cat((i + j) / 2));
        if (h(i, j) != expect) {
          r.passed = false;
          r.detail = "H(" + std::to_string(k) + ")[" + std::to_string(i) + "," + std::to_string(j) + "]";
        }
      }
    }
    if (lambda_min_dense(Eigen::MatrixXd(h.cast<double>())) <= 0.0) {
      r.passed = false;
      r.detail = "H(" + std::to_string(k) + ") not positive definite";
    }
  }
  return r;
}

inline CheckResult check_paren_triangular() {
  CheckResult r{"wigner.paren_unit_upper_triangular", true, "", 0.0};
  for (int k = 0; k <= 10; ++k) {
    const IntMatrix p = paren_matrix(k);
    for (int i = 0; i <= k; ++i) {
      if (p(i, i) != 1) r.passed = false;
      for (int j = 0; j < i; ++j)
        if (p(i, j) != 0) r.passed = false;
    }
  }
  return r;
}

inline CheckResult check_quotient_domination(int samples = 60) {
  CheckResult r{"quotient.domination", true, "", 0.0};
  std::mt19937_64 engine(31);
  int violations = 0;
  for (int s = 0; s < samples; ++s) {
    const int n = 1 + static_cast<int>(engine() % 4);
    const int k = 1 + static_cast<int>(engine() % 3);
    const SymMatrix m = random_sos_symmetric(n, k, engine);
    if (!norm_dominates(m, quotient_matrix(m)).holds) ++violations;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations in " + std::to_string(samples);
  return r;
}

inline CheckResult check_spectral_operator() {
  CheckResult r{"spectral.matrix_vs_operator", true, "", 0.0};
  std::mt19937_64 engine(41);
  std::normal_distribution<double> normal;
  for (int dim : {5, 40, 600}) {
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(engine);
    const Eigen::MatrixXd m = (g + g.transpose()) / 2.0;
    const EigenEstimate dense = lambda_max_dense(m);
    SpectralOptions opt;
    opt.dense_threshold = 0;
    const EigenEstimate iter = lambda_max(as_operator(m), opt);
    if (detail::rel_err(dense.value, iter.value) > 1e-8) {
      r.passed = false;
      r.detail = "dim " + std::to_string(dim) + ": " + format_double(dense.value) + " vs " + format_double(iter.value);
    }
    const double rq = iter.witness.dot(m * iter.witness) / iter.witness.squaredNorm();
    if (std::abs(rq - iter.value) > opt.tol * std::max(1.0, std::abs(iter.value))) {
      r.passed = false;
      r.detail = "witness Rayleigh quotient off at dim " + std::to_string(dim);
    }
  }
  return r;
}

inline CheckResult check_representation_identity() {
  CheckResult r{"upper_even.representation_identity", true, "", 0.0};
  std::mt19937_64 engine(51);
  const DenseTensor t = sample_tensor(4, 4, TensorModel::rademacher, 3);
  const Eigen::MatrixXd flat = flatten(t).entries;
  const SymmetrizedPowerOp op((flat + flat.transpose()) / 2.0, 4, 2, 2);
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const Eigen::VectorXd x = detail::unit_gaussian(engine, 4);
    const Eigen::VectorXd y = tensor_power(x, 4);
    const double lhs = y.dot(op.apply(y));
    const double f = evaluate(t, x);
    worst = std::max(worst, std::abs(lhs - f * f) / std::max(1e-300, std::abs(f * f)));
  }
  r.passed = worst <= 1e-8;
  r.detail = "max relative error " + format_double(worst);
  return r;
}

inline CheckResult check_sandwich() {
  CheckResult r{"sandwich.fmax_lower_upper", true, "", 0.0};
  int checked = 0;
  FmaxOptions fo;
  fo.restarts = 10;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const DenseTensor t4 = sample_tensor(5, 4, TensorModel::rademacher, seed);
    fo.seed = seed;
    const double fmax = heuristic_fmax(t4, fo).value;
    const double up_even = cert_upper_even(t4, 4).bound;
    const double up_even8 = cert_upper_even(t4, 8).bound;
    const double up_qd = cert_upper_qd(t4).bound;
    const MomentCertificate cert = calibrate_and_build(t4);
    const double lower = cert.inner_value;
    const double slack = 1e-9 * (1.0 + std::abs(fmax));
    if (fmax > up_even + slack || fmax > up_even8 + slack || fmax > up_qd + slack) r.passed = false;
    if (lower > up_qd + 1e-6 || lower > up_even + 1e-6) r.passed = false;
    if (!verify_certificate(cert, t4).ok) r.passed = false;

    const DenseTensor t3 = sample_tensor(5, 3, TensorModel::gaussian, seed);
    const double f3 = heuristic_fmax(t3, fo).value;
    if (f3 > cert_upper_odd3(t3, 4).bound + 1e-9 * (1.0 + std::abs(f3))) r.passed = false;
    checked += 2;
  }
  r.detail = std::to_string(checked) + " instances";
  return r;
}

inline CheckResult check_e_prime() {
  CheckResult r{"upper_odd3.e_prime_diagonal", true, "", 0.0};
  int flagged = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const OddPipelineState s = build_odd_state(sample_tensor(6, 3, TensorModel::rademacher, seed), 4);
    const Eigen::Index n = s.n;
    // E' = E restricted and folded onto ((i,j),(i,j)); it must be diagonal.
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (s.e_prime(i * n + j) != s.e(i * n + i, j * n + j) + s.e(j * n + j, i * n + i)) r.passed = false;
    if (s.e_prime.maxCoeff() > 5.0 * n) ++flagged;
  }
  r.detail = std::to_string(flagged) + " of 5 instances flagged lambda_max(E') > 5n";
  return r;
}

inline CheckResult check_c2_band() {
  CheckResult r{"lower_qtensor.c2_band", true, "", 0.0};
  double worst = 0.0;
  for (int n : {4, 6, 8}) {
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      const MomentCertificate c = calibrate_and_build(sample_tensor(n, 4, TensorModel::rademacher, seed));
      worst = std::max(worst, c.c2);
    }
  }
  r.passed = worst <= 65536.0;
  r.detail = "largest c2 " + format_double(worst);
  return r;
}

inline CheckResult check_fmax_monotone() {
  CheckResult r{"fmax_estimate.monotone_in_restarts", true, "", 0.0};
  const DenseTensor t = sample_tensor(6, 4, TensorModel::gaussian, 9);
  for (int restarts : {1, 3, 8}) {
    FmaxOptions a;
    a.restarts = restarts;
    FmaxOptions b = a;
    b.restarts = 2 * restarts;
    if (heuristic_fmax(t, b).value < heuristic_fmax(t, a).value) r.passed = false;
  }
  return r;
}

inline CheckResult check_report_stable() {
  CheckResult r{"cli_report.byte_stable", true, "", 0.0};
  const DenseTensor t = sample_tensor(4, 4, TensorModel::rademacher, 77);
  CertifyConfig cfg;
  cfg.q = 4;
  cfg.fmax.restarts = 5;
  const std::string a = certify(t, cfg).dump(2);
  const std::string b = certify(sample_tensor(4, 4, TensorModel::rademacher, 77), cfg).dump(2);
  r.passed = a == b;
  return r;
}

/// All checks, in order. `cat` is the Catalan function the Hankel check compares against.
inline std::vector<CheckResult> run_verify_suite(const CatalanFn& cat = catalan) {
  using Check = std::function<CheckResult()>;
  const std::vector<std::pair<std::string, Check>> checks = {
      {"index_core.orbit_sizes_sum", check_orbit_sizes},
      {"index_core.sos_symmetrize", check_sos_symmetrize},
      {"tensor_model.flatten_roundtrip", check_flatten_roundtrip},
      {"tensor_model.rademacher_variance", check_rademacher_variance},
      {"wigner.min_eig_and_entries", check_wigner},
      {"wigner.hankel", [&cat] { return check_hankel(cat); }},
      {"wigner.paren_unit_upper_triangular", check_paren_triangular},
      {"quotient.domination", [] { return check_quotient_domination(); }},
      {"spectral.matrix_vs_operator", check_spectral_operator},
      {"upper_even.representation_identity", check_representation_identity},
      {"sandwich.fmax_lower_upper", check_sandwich},
      {"upper_odd3.e_prime_diagonal", check_e_prime},
      {"lower_qtensor.c2_band", check_c2_band},
      {"fmax_estimate.monotone_in_restarts", check_fmax_monotone},
      {"cli_report.byte_stable", check_report_stable},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, check] : checks) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult res;
    try {
      res = check();
    } catch (const std::exception& e) {
      res.passed = false;
      res.detail = std::string("threw: ") + e.what();
    }
    res.name = name;
    res.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace tsc

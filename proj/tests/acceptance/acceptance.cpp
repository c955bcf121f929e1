// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Tolerances, instance grids and runtime limits are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "tsc/fmax_estimate.hpp"
#include "tsc/lower_qtensor.hpp"
#include "tsc/parallel.hpp"
#include "tsc/quotient.hpp"
#include "tsc/report.hpp"
#include "tsc/upper_even.hpp"
#include "tsc/upper_odd3.hpp"
#include "tsc/verify.hpp"
#include "tsc/wigner.hpp"

using namespace tsc;

namespace {

constexpr int kSeeds = 20;
constexpr int kFmaxRestarts = 8;

struct Outcome {
  bool passed = false;
  std::string detail;
};

// Sandwich ledger shared by every instance the scaling criteria touch.
struct SandwichLog {
  std::mutex mu;
  long instances = 0;
  long violations = 0;
  std::string first;

  void record(const std::string& what, double fmax, double lower, double upper) {
    std::lock_guard lock(mu);
    ++instances;
    const bool bad_fmax = fmax > upper + 1e-9 * (1.0 + std::abs(upper));
    const bool bad_lower = !std::isnan(lower) && lower > upper + 1e-6;
    if (bad_fmax || bad_lower) {
      ++violations;
      if (first.empty()) first = what;
    }
  }
};

SandwichLog sandwich;
unsigned threads = 1;

double heuristic(const DenseTensor& t, std::uint64_t seed) {
  FmaxOptions opt;
  opt.restarts = kFmaxRestarts;
  opt.seed = seed;
  return heuristic_fmax(t, opt).value;
}

std::string label(const char* what, int n, std::uint64_t seed) {
  return std::string(what) + " n=" + std::to_string(n) + " seed=" + std::to_string(seed);
}

std::string slope_text(const LinearFit& fit) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "slope %.3f +- %.3f", fit.slope, fit.stderr_slope);
  return buf;
}

Outcome wigner_guarantee() {
  double worst = 1e300;
  bool entries_ok = true;
  for (int n = 1; n <= 5; ++n) {
    for (int q : {2, 4, 6, 8}) {
      const WignerMomentMatrix w = wigner_hat(n, q);
      worst = std::min(worst, lambda_min_dense(w.real()));
      const std::uint64_t cap = std::uint64_t{1} << q;
      for (Eigen::Index i = 0; i < w.entries.size(); ++i) entries_ok = entries_ok && w.entries.data()[i] <= cap;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "min lambda_min %.6f, entries in range: %s", worst, entries_ok ? "yes" : "no");
  return {worst >= 0.5 - 1e-9 && entries_ok, buf};
}

std::int64_t count_strings(int len, int excess) {
  std::int64_t count = 0;
  for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
    int depth = 0;
    bool ok = true;
    for (int b = 0; b < len && ok; ++b) {
      depth += (mask >> b) & 1u ? 1 : -1;
      ok = depth >= 0;
    }
    if (ok && depth == excess) ++count;
  }
  return count;
}

Outcome paren_hankel() {
  int mismatches = 0;
  std::vector<std::int64_t> cat{1};
  for (int m = 1; m <= 8; ++m) {
    std::int64_t c = 0;
    for (int i = 0; i < m; ++i) c += cat[static_cast<std::size_t>(i)] * cat[static_cast<std::size_t>(m - 1 - i)];
    cat.push_back(c);
  }
  for (int k = 0; k <= 8; ++k) {
    const IntMatrix r = paren_matrix(k);
    const IntMatrix h = hankel_matrix(k);
    for (int i = 0; i <= k; ++i) {
      for (int j = 0; j <= k; ++j) {
        if (r(i, j) != count_strings(j, i)) ++mismatches;
        const std::int64_t expect = (i + j) % 2 ? 0 : cat[static_cast<std::size_t>((i + j) / 2)];
        if (h(i, j) != expect) ++mismatches;
      }
    }
    if (h != IntMatrix(r.transpose() * r)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches for k <= 8"};
}

Outcome quotient_domination() {
  std::mt19937_64 engine(20240601);
  int violations = 0;
  double worst_gap = -1e300;
  for (int s = 0; s < 200; ++s) {
    const int n = 1 + static_cast<int>(engine() % 4);
    const int k = 1 + static_cast<int>(engine() % 3);
    const SymMatrix m = random_sos_symmetric(n, k, engine);
    const double lm = lambda_max_dense(m.entries).value;
    const double lq = lambda_max_dense(quotient_matrix(m).entries).value;
    worst_gap = std::max(worst_gap, lm - lq);
    if (lm > lq + 1e-9) ++violations;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d violations in 200, max lambda_max(M) - lambda_max(Q) = %.3g", violations, worst_gap);
  return {violations == 0, buf};
}

Outcome representation_identity() {
  double worst = 0.0;
  std::vector<double> per_seed(10, 0.0);
  parallel_for(10, threads, [&](std::size_t s) {
    const DenseTensor t = sample_tensor(6, 4, TensorModel::rademacher, 1000 + s);
    const Eigen::MatrixXd flat = flatten(t).entries;
    const SymmetrizedPowerOp op((flat + flat.transpose()) / 2.0, 6, 2, 2);
    const LinearOperator m = op.as_operator();
    std::mt19937_64 engine(77 + s);
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd x = detail::sphere_sample(engine, 6);
      const Eigen::VectorXd y = tensor_power(x, 4);
      const double lhs = y.dot(m(y));
      const double f = evaluate(t, x);
      const double rel = std::abs(lhs - f * f) / std::max(f * f, 1e-300);
      per_seed[s] = std::max(per_seed[s], rel);
    }
  });
  for (double v : per_seed) worst = std::max(worst, v);
  char buf[96];
  std::snprintf(buf, sizeof buf, "max relative error %.3g over 500 points", worst);
  return {worst <= 1e-8, buf};
}

Outcome upper_scaling() {
  const std::vector<int> ns{10, 14, 20, 28, 40};
  std::vector<double> medians;
  for (int n : ns) {
    std::vector<double> bounds(kSeeds);
    parallel_for(kSeeds, threads, [&](std::size_t s) {
      const std::uint64_t seed = 6000 + static_cast<std::uint64_t>(n) * 100 + s;
      const DenseTensor t = sample_tensor(n, 4, TensorModel::rademacher, seed);
      bounds[s] = cert_upper_qd(t).bound;
      sandwich.record(label("upper_qd", n, seed), heuristic(t, seed), std::nan(""), bounds[s]);
    });
    medians.push_back(median(bounds));
  }
  const LinearFit fit = fit_loglog(std::vector<double>(ns.begin(), ns.end()), medians);
  return {fit.slope >= 0.85 && fit.slope <= 1.15, slope_text(fit)};
}

Outcome lower_scaling() {
  const std::vector<int> ns{6, 8, 11, 16};
  std::vector<double> medians;
  int unverified = 0;
  std::mutex mu;
  for (int n : ns) {
    std::vector<double> values(kSeeds);
    parallel_for(kSeeds, threads, [&](std::size_t s) {
      const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(n) * 100 + s;
      const DenseTensor t = sample_tensor(n, 4, TensorModel::rademacher, seed);
      const MomentCertificate c = calibrate_and_build(t);
      values[s] = c.inner_value;
      if (!verify_certificate(c, t).ok) {
        std::lock_guard lock(mu);
        ++unverified;
      }
      sandwich.record(label("lower_qd", n, seed), heuristic(t, seed), c.inner_value, cert_upper_qd(t).bound);
    });
    medians.push_back(median(values));
  }
  const LinearFit fit = fit_loglog(std::vector<double>(ns.begin(), ns.end()), medians);
  return {fit.slope >= 0.85 && fit.slope <= 1.15 && unverified == 0,
          slope_text(fit) + ", " + std::to_string(unverified) + " certificates failed verification"};
}

Outcome odd_scaling() {
  const std::vector<int> ns{6, 8, 11, 16};
  std::vector<double> medians;
  for (int n : ns) {
    std::vector<double> bounds(kSeeds);
    parallel_for(kSeeds, threads, [&](std::size_t s) {
      const std::uint64_t seed = 8000 + static_cast<std::uint64_t>(n) * 100 + s;
      const DenseTensor t = sample_tensor(n, 3, TensorModel::rademacher, seed);
      bounds[s] = cert_upper_odd3(t, 4).bound;
      sandwich.record(label("upper_odd3", n, seed), heuristic(t, seed), std::nan(""), bounds[s]);
    });
    medians.push_back(median(bounds));
  }
  const LinearFit fit = fit_loglog(std::vector<double>(ns.begin(), ns.end()), medians);
  return {fit.slope >= 0.60 && fit.slope <= 0.90, slope_text(fit)};
}

Outcome level_monotonicity() {
  std::vector<double> b4(kSeeds);
  std::vector<double> b8(kSeeds);
  parallel_for(kSeeds, threads, [&](std::size_t s) {
    const std::uint64_t seed = 9000 + s;
    const DenseTensor t = sample_tensor(8, 4, TensorModel::rademacher, seed);
    b4[s] = cert_upper_even(t, 4).bound;
    b8[s] = cert_upper_even(t, 8).bound;
    const double f = heuristic(t, seed);
    sandwich.record(label("upper_even q=4", 8, seed), f, std::nan(""), b4[s]);
    sandwich.record(label("upper_even q=8", 8, seed), f, std::nan(""), b8[s]);
  });
  const double m4 = median(b4);
  const double m8 = median(b8);
  char buf[96];
  std::snprintf(buf, sizeof buf, "median B(q=8) %.4f vs B(q=4) %.4f", m8, m4);
  return {m8 <= m4, buf};
}

Outcome sandwich_check() {
  return {sandwich.instances > 0 && sandwich.violations == 0,
          std::to_string(sandwich.violations) + " violations over " + std::to_string(sandwich.instances) +
              " instances" + (sandwich.first.empty() ? "" : ", first: " + sandwich.first)};
}

Outcome determinism() {
  int differing = 0;
  const std::vector<std::pair<DenseTensor, int>> cases = {
      {sample_tensor(6, 4, TensorModel::rademacher, 42), 4},
      {sample_tensor(5, 4, TensorModel::gaussian, 43), 8},
      {sample_tensor(6, 3, TensorModel::rademacher, 44), 4},
  };
  for (const auto& [t, q] : cases) {
    CertifyConfig cfg;
    cfg.q = q;
    cfg.fmax.restarts = 10;
    const std::string a = certify(t, cfg).dump(2);
    const DenseTensor again = sample_tensor(t.dim, t.order, t.model, *t.seed);
    const std::string b = certify(again, cfg).dump(2);
    if (a != b) ++differing;
  }
  return {differing == 0, std::to_string(differing) + " of 3 reports differ"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  threads = resolve_threads(std::nullopt);
  // The sandwich criterion aggregates instances from 6-9, so it runs after them.
  const std::vector<Criterion> criteria = {
      {1, "wigner moment matrix guarantee", 30, wigner_guarantee},
      {2, "parenthesis and hankel exactness", 5, paren_hankel},
      {3, "quotient domination", 60, quotient_domination},
      {4, "representation identity", 120, representation_identity},
      {6, "q=d=4 upper-bound scaling", 600, upper_scaling},
      {7, "q=d=4 lower-bound scaling", 600, lower_scaling},
      {8, "d=3 bound scaling", 600, odd_scaling},
      {9, "level monotonicity", 600, level_monotonicity},
      {5, "sandwich", 1e9, sandwich_check},
      {10, "determinism", 60, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool ok = out.passed && in_time;
    failures += ok ? 0 : 1;
    std::printf("%s  [%2d] %-34s %s (%.1fs%s)\n", ok ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

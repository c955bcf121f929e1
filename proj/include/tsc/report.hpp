#pragma once

// Certification reports and experiment sweeps.
//
// A CertReport is a single JSON object (schema "tsc.cert_report", version 1).
// Every certified bound carries the producing operation and its tolerance.
// Reports contain no wall-clock data unless timings are requested, so equal
// (instance, config, version) produce byte-identical output.
//
// Sweeps emit one record per (n, q, trial) as CSV with the fixed columns
//   n,d,q,seed,upper,lower,fmax_est,ratio_upper,c2,runtime_ms
// and as JSON lines, followed by a summary of medians and log-log slopes.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsc/common.hpp"
#include "tsc/fmax_estimate.hpp"
#include "tsc/lower_qtensor.hpp"
#include "tsc/parallel.hpp"
#include "tsc/quotient.hpp"
#include "tsc/tensor_model.hpp"
#include "tsc/upper_even.hpp"
#include "tsc/upper_odd3.hpp"

namespace tsc {

using ojson = nlohmann::ordered_json;

enum class Which { upper, lower, both };

inline Which parse_which(const std::string& s) {
  if (s == "upper") return Which::upper;
  if (s == "lower") return Which::lower;
  if (s == "both") return Which::both;
  throw InputError("--which must be upper, lower or both (got '" + s + "')");
}

inline std::string to_string(Which w) {
  switch (w) {
    case Which::upper: return "upper";
    case Which::lower: return "lower";
    case Which::both: return "both";
  }
  return "both";
}

struct CertifyConfig {
  int q = 0;
  Which which = Which::both;
  SpectralOptions spectral;
  FmaxOptions fmax;
  bool include_fmax = true;
  LowerOptions lower;
  bool timings = false;
};

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Checks the (d, q, which) combination before any work is done.
inline void check_dispatch(int n, int d, const CertifyConfig& cfg) {
  const int q = cfg.q;
  if (d % 2 != 0 && d != 3) throw InputError("odd order d = " + std::to_string(d) + " is unsupported (only d = 3)");
  if (q <= 0 || q % 2 != 0) throw InputError("q must be a positive even integer");
  if (cfg.which == Which::lower && (d % 2 != 0 || q != d)) {
    throw InputError("lower bounds are only available for even d with q = d");
  }
  if (cfg.which == Which::lower && n < q) throw InputError("lower bounds need n >= q");
  if (d == 3) {
    check_odd_level(q);
  } else {
    if (q % d != 0) throw InputError("q must be a multiple of d");
    if (!is_power_of_two(q / d)) throw InputError("q/d must be a power of two");
  }
}

namespace detail {
template <class F>
auto timed(bool enabled, ojson& entry, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  auto out = f();
  if (enabled) {
    entry["runtime_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}
}  // namespace detail

/// Runs every certificate the (d, q, which) combination supports.
inline ojson certify(const DenseTensor& t, const CertifyConfig& cfg) {
  check_dispatch(t.dim, t.order, cfg);
  const int d = t.order;
  const int q = cfg.q;
  const bool want_upper = cfg.which != Which::lower;
  const bool want_lower = cfg.which != Which::upper;

  ojson report;
  report["schema"] = "tsc.cert_report";
  report["schema_version"] = 1;
  report["tool_version"] = kVersion;

  ojson instance;
  instance["n"] = t.dim;
  instance["d"] = d;
  instance["q"] = q;
  instance["model"] = to_string(t.model);
  instance["seed"] = t.seed ? ojson(*t.seed) : ojson(nullptr);
  if (!t.seed) instance["tensor_hash"] = hex64(fnv1a(base64::encode(detail::to_f64le(t.entries))));

  ojson config;
  config["which"] = to_string(cfg.which);
  config["tol"] = cfg.spectral.tol;
  config["max_iter"] = cfg.spectral.max_iter;
  config["spectral_seed"] = cfg.spectral.seed;
  config["fmax_restarts"] = cfg.include_fmax ? cfg.fmax.restarts : 0;
  config["fmax_seed"] = cfg.fmax.seed;
  config["psd_tol"] = cfg.lower.psd_tol;

  report["run_id"] = hex64(fnv1a(instance.dump() + config.dump() + kVersion));
  if (cfg.timings) {
    report["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
  }
  report["instance"] = instance;

  ojson results = ojson::object();
  ojson notes = ojson::array();
  std::optional<double> best_upper;
  std::optional<double> lower;
  const auto keep_upper = [&best_upper](double b) { best_upper = best_upper ? std::min(*best_upper, b) : b; };

  if (want_upper && d % 2 == 0) {
    ojson e;
    e["operation"] = "cert_upper_even";
    const UpperEvenResult r = detail::timed(cfg.timings, e, [&] { return cert_upper_even(t, q, cfg.spectral); });
    e["bound"] = r.bound;
    e["tol"] = cfg.spectral.tol;
    e["lambda_max"] = r.lambda_max;
    e["power"] = r.power;
    e["dim"] = r.dim;
    e["method"] = r.method;
    e["residual"] = r.residual;
    e["iterations"] = r.iterations;
    e["normalization"] = "row-column position-permutation average, 1/((q/2)!)^2";
    keep_upper(r.bound);
    results["upper_even"] = e;
  }
  if (want_upper && d == 3) {
    ojson e;
    e["operation"] = "cert_upper_odd3";
    const UpperOdd3Result r = detail::timed(cfg.timings, e, [&] { return cert_upper_odd3(t, q, cfg.spectral); });
    e["bound"] = r.bound;
    e["tol"] = cfg.spectral.tol;
    e["b_norm"] = r.b_norm;
    e["e_prime_max"] = r.e_prime_max;
    e["e_prime_exceeds_5n"] = r.e_prime_exceeds_5n;
    e["radicand_clamped"] = r.radicand_clamped;
    e["dim"] = r.dim;
    e["method"] = r.method;
    e["residual"] = r.residual;
    e["iterations"] = r.iterations;
    if (r.e_prime_exceeds_5n) notes.push_back("lambda_max(E') exceeds 5n on this instance");
    keep_upper(r.bound);
    results["upper_odd3"] = e;
  }
  if (want_upper && d % 2 == 0 && q == d) {
    ojson e;
    e["operation"] = "cert_upper_qd";
    const QdUpperResult r = detail::timed(cfg.timings, e, [&] { return cert_upper_qd(t); });
    e["bound"] = r.bound;
    e["tol"] = 1e-9;
    e["quotient_dim"] = r.quotient_dim;
    e["residual"] = r.residual;
    keep_upper(r.bound);
    results["upper_qd"] = e;
  }
  if (want_lower) {
    if (d % 2 == 0 && q == d && t.dim < q) {
      notes.push_back("lower bound skipped: needs n >= q");
    } else if (d % 2 == 0 && q == d) {
      ojson e;
      e["operation"] = "calibrate_and_build";
      const MomentCertificate c = detail::timed(cfg.timings, e, [&] { return calibrate_and_build(t, cfg.lower); });
      const CertificateCheck check = verify_certificate(c, t, cfg.lower.psd_tol);
      e["bound"] = c.inner_value;
      e["tol"] = cfg.lower.psd_tol;
      e["certificate"] = certificate_to_json(c);
      e["verified"] = check.ok;
      if (!check.ok) e["verify_reasons"] = check.reasons;
      lower = c.inner_value;
      results["lower_qd"] = e;
    } else {
      notes.push_back("lower bound skipped: only available for even d with q = d");
    }
  }
  std::optional<double> fmax;
  if (cfg.include_fmax) {
    ojson e;
    e["operation"] = "heuristic_fmax";
    const MaxEstimate m = detail::timed(cfg.timings, e, [&] { return heuristic_fmax(t, cfg.fmax); });
    e["value"] = m.value;
    e["certified"] = false;
    e["restarts"] = m.restarts;
    e["iterations"] = m.iterations;
    e["converged"] = m.converged;
    fmax = m.value;
    results["fmax_est"] = e;
  }
  report["results"] = results;

  ojson ratios = ojson::object();
  if (best_upper && fmax) ratios["upper_over_fmax"] = *best_upper / *fmax;
  if (lower && fmax) ratios["lower_over_fmax"] = *lower / *fmax;
  if (best_upper && lower) ratios["upper_over_lower"] = *best_upper / *lower;
  report["ratios"] = ratios;
  if (best_upper && fmax && *fmax > *best_upper + 1e-9 * (1.0 + std::abs(*best_upper))) {
    notes.push_back("INVARIANT VIOLATION: heuristic fmax exceeds a certified upper bound");
  }
  if (best_upper && lower && *lower > *best_upper + 1e-6) {
    notes.push_back("INVARIANT VIOLATION: certified lower bound exceeds certified upper bound");
  }
  report["notes"] = notes;
  report["config"] = config;
  return report;
}

/// True when a report records an invariant violation.
inline bool report_has_violation(const ojson& report) {
  for (const auto& note : report.at("notes")) {
    if (note.get<std::string>().rfind("INVARIANT VIOLATION", 0) == 0) return true;
  }
  if (report.at("results").contains("lower_qd") && !report["results"]["lower_qd"]["verified"].get<bool>()) {
    return true;
  }
  return false;
}

// ---- sweeps ---------------------------------------------------------------

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log(y) against log(x); nonpositive y are skipped.
inline LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  LinearFit fit;
  fit.points = lx.size();
  if (lx.size() < 2) return fit;
  const double k = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (lx.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double res = ly[i] - (fit.intercept + fit.slope * lx[i]);
      ssr += res * res;
    }
    fit.stderr_slope = std::sqrt(ssr / (k - 2.0) / sxx);
  }
  return fit;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct SweepConfig {
  std::vector<int> n_values;
  int d = 4;
  std::vector<int> q_values;
  int trials = 1;
  std::uint64_t seed_base = 0;
  TensorModel model = TensorModel::rademacher;
  Which which = Which::both;
  int fmax_restarts = 10;
  SpectralOptions spectral;
};

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  try {
    SweepConfig c;
    c.n_values = j.at("n").get<std::vector<int>>();
    c.d = j.at("d").get<int>();
    c.q_values = j.at("q").get<std::vector<int>>();
    c.trials = j.value("trials", 1);
    c.seed_base = j.value("seed_base", std::uint64_t{0});
    c.model = parse_model(j.value("model", std::string("rademacher")));
    c.which = parse_which(j.value("which", std::string("both")));
    c.fmax_restarts = j.value("fmax_restarts", 10);
    c.spectral.tol = j.value("tol", c.spectral.tol);
    c.spectral.max_iter = j.value("max_iter", c.spectral.max_iter);
    require(!c.n_values.empty() && !c.q_values.empty(), "sweep config needs non-empty n and q lists");
    require(c.trials >= 1, "sweep config needs trials >= 1");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed sweep config: ") + e.what());
  }
}

struct SweepRow {
  int n = 0;
  int d = 0;
  int q = 0;
  std::uint64_t seed = 0;
  std::optional<double> upper;
  std::optional<double> lower;
  std::optional<double> fmax_est;
  std::optional<double> c2;
  double runtime_ms = 0.0;
  std::string error;
  bool violation = false;
};

inline const char* kSweepCsvHeader = "n,d,q,seed,upper,lower,fmax_est,ratio_upper,c2,runtime_ms";

inline std::string sweep_row_csv(const SweepRow& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::optional<double> ratio;
  if (r.upper && r.fmax_est && *r.fmax_est != 0.0) ratio = *r.upper / *r.fmax_est;
  return std::to_string(r.n) + "," + std::to_string(r.d) + "," + std::to_string(r.q) + "," +
         std::to_string(r.seed) + "," + opt(r.upper) + "," + opt(r.lower) + "," + opt(r.fmax_est) + "," +
         opt(ratio) + "," + opt(r.c2) + "," + format_double(r.runtime_ms);
}

inline ojson sweep_row_json(const SweepRow& r) {
  ojson j;
  const auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  j["n"] = r.n;
  j["d"] = r.d;
  j["q"] = r.q;
  j["seed"] = r.seed;
  j["upper"] = opt(r.upper);
  j["lower"] = opt(r.lower);
  j["fmax_est"] = opt(r.fmax_est);
  j["ratio_upper"] = (r.upper && r.fmax_est && *r.fmax_est != 0.0) ? ojson(*r.upper / *r.fmax_est) : ojson(nullptr);
  j["c2"] = opt(r.c2);
  j["runtime_ms"] = r.runtime_ms;
  if (!r.error.empty()) j["error"] = r.error;
  if (r.violation) j["violation"] = true;
  return j;
}

/// Certifies one sweep instance; failures are recorded in the row.
inline SweepRow run_sweep_row(const SweepConfig& c, int n, int q, int trial) {
  SweepRow row;
  row.n = n;
  row.d = c.d;
  row.q = q;
  row.seed = c.seed_base + static_cast<std::uint64_t>(trial);
  const auto start = std::chrono::steady_clock::now();
  try {
    const DenseTensor t = sample_tensor(n, c.d, c.model, row.seed);
    CertifyConfig cfg;
    cfg.q = q;
    cfg.which = c.which;
    if (cfg.which == Which::both && !(c.d % 2 == 0 && q == c.d)) cfg.which = Which::upper;
    cfg.spectral = c.spectral;
    cfg.include_fmax = c.fmax_restarts > 0;
    cfg.fmax.restarts = std::max(1, c.fmax_restarts);
    cfg.fmax.seed = row.seed;
    const ojson rep = certify(t, cfg);
    const ojson& res = rep.at("results");
    for (const char* key : {"upper_even", "upper_odd3", "upper_qd"}) {
      if (res.contains(key)) {
        const double b = res[key]["bound"].get<double>();
        row.upper = row.upper ? std::min(*row.upper, b) : b;
      }
    }
    if (res.contains("lower_qd")) {
      row.lower = res["lower_qd"]["bound"].get<double>();
      row.c2 = res["lower_qd"]["certificate"]["c2"].get<double>();
    }
    if (res.contains("fmax_est")) row.fmax_est = res["fmax_est"]["value"].get<double>();
    row.violation = report_has_violation(rep);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

inline std::vector<SweepRow> run_sweep(const SweepConfig& c, unsigned threads) {
  struct Job {
    int n, q, trial;
  };
  std::vector<Job> jobs;
  for (int n : c.n_values)
    for (int q : c.q_values)
      for (int t = 0; t < c.trials; ++t) jobs.push_back({n, q, t});
  std::vector<SweepRow> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) { rows[i] = run_sweep_row(c, jobs[i].n, jobs[i].q, jobs[i].trial); });
  return rows;
}

/// Medians per (q, n) and log-log slopes of the medians against n, per q.
inline ojson sweep_summary(const SweepConfig& c, const std::vector<SweepRow>& rows) {
  ojson summary;
  summary["schema"] = "tsc.sweep_summary";
  summary["rows"] = rows.size();
  std::size_t failures = 0;
  std::size_t violations = 0;
  for (const auto& r : rows) {
    failures += r.error.empty() ? 0 : 1;
    violations += r.violation ? 1 : 0;
  }
  summary["failures"] = failures;
  summary["violations"] = violations;
  ojson per_q = ojson::array();
  for (int q : c.q_values) {
    ojson entry;
    entry["q"] = q;
    std::vector<double> ns;
    std::vector<double> mu;
    std::vector<double> ml;
    std::vector<double> mf;
    ojson medians = ojson::array();
    for (int n : c.n_values) {
      std::vector<double> u;
      std::vector<double> l;
      std::vector<double> f;
      for (const auto& r : rows) {
        if (r.n != n || r.q != q) continue;
        if (r.upper) u.push_back(*r.upper);
        if (r.lower) l.push_back(*r.lower);
        if (r.fmax_est) f.push_back(*r.fmax_est);
      }
      ns.push_back(n);
      mu.push_back(median(u));
      ml.push_back(median(l));
      mf.push_back(median(f));
      const auto num = [](double v) { return std::isnan(v) ? ojson(nullptr) : ojson(v); };
      medians.push_back({{"n", n}, {"upper", num(mu.back())}, {"lower", num(ml.back())}, {"fmax_est", num(mf.back())}});
    }
    entry["medians"] = medians;
    const auto slope = [&ns](const std::vector<double>& ys) {
      const LinearFit fit = fit_loglog(ns, ys);
      if (fit.points < 2) return ojson(nullptr);
      return ojson{{"slope", fit.slope}, {"stderr", fit.stderr_slope}, {"points", fit.points}};
    };
    entry["slope_upper"] = slope(mu);
    entry["slope_lower"] = slope(ml);
    entry["slope_fmax"] = slope(mf);
    per_q.push_back(entry);
  }
  summary["by_q"] = per_q;
  return summary;
}

}  // namespace tsc

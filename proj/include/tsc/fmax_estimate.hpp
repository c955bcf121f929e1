#pragma once

// Heuristic (uncertified) maximization of <T, x^{(x)d}> over the unit sphere
// by symmetric tensor power iteration with a step-halving safeguard. Only a
// reporting baseline; never part of a certificate.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "tsc/common.hpp"
#include "tsc/tensor_model.hpp"

namespace tsc {

struct FmaxOptions {
  int restarts = 50;
  int max_iter = 500;
  double tol = 1e-10;  // stop when the accepted step moves x by less than this
  std::uint64_t seed = 1;
};

struct MaxEstimate {
  double value = 0.0;
  Eigen::VectorXd argmax;
  int restarts = 0;
  long iterations = 0;
  bool converged = false;
};

namespace detail {

/// gradient of x -> <S, x^{(x)d}> for symmetric S: d * S x^{d-1}.
inline Eigen::VectorXd sym_gradient(const DenseTensor& sym, const Eigen::VectorXd& x) {
  const std::vector<double> g = contract_trailing(sym.entries, sym.dim, x, sym.order - 1);
  return static_cast<double>(sym.order) * Eigen::Map<const Eigen::VectorXd>(g.data(), sym.dim);
}

inline Eigen::VectorXd sphere_sample(std::mt19937_64& engine, int n) {
  const auto uniform = [&engine] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    x(i) = r * std::cos(theta);
    if (i + 1 < n) x(i + 1) = r * std::sin(theta);
  }
  return x.normalized();
}

struct AscentRun {
  Eigen::VectorXd x;
  double value = 0.0;
  long iterations = 0;
  bool converged = false;
};

inline AscentRun ascend(const DenseTensor& sym, Eigen::VectorXd x, const FmaxOptions& opt) {
  AscentRun run;
  const double d = sym.order;
  Eigen::VectorXd g = sym_gradient(sym, x);
  double fx = x.dot(g) / d;
  for (int it = 0; it < opt.max_iter; ++it) {
    ++run.iterations;
    const double gnorm = g.norm();
    if (gnorm == 0.0) {
      run.converged = true;
      break;
    }
    Eigen::VectorXd y = g / gnorm;
    Eigen::VectorXd gy = sym_gradient(sym, y);
    double fy = y.dot(gy) / d;
    if (!(fy >= fx)) {
      // Fall back to shrinking steps along the tangent ascent direction.
      const Eigen::VectorXd tangent = (g - g.dot(x) * x) / gnorm;
      bool improved = false;
      for (double step = 1.0; step > 1e-12; step *= 0.5) {
        y = (x + step * tangent).normalized();
        gy = sym_gradient(sym, y);
        fy = y.dot(gy) / d;
        if (fy >= fx) {
          improved = true;
          break;
        }
      }
      if (!improved) {
        run.converged = true;
        break;
      }
    }
    const double moved = (y - x).norm();
    x = std::move(y);
    g = std::move(gy);
    fx = fy;
    if (moved < opt.tol) {
      run.converged = true;
      break;
    }
  }
  run.x = std::move(x);
  run.value = fx;
  return run;
}

}  // namespace detail

/// Best value over `restarts` seeded sphere starts. Starts are drawn in order
/// from one stream, so the first r restarts do not depend on the total count.
inline MaxEstimate heuristic_fmax(const DenseTensor& t, const FmaxOptions& opt = {}) {
  require(opt.restarts >= 1, "heuristic_fmax needs at least one restart");
  const DenseTensor sym = symmetrize_tensor(t);
  std::mt19937_64 engine(opt.seed);
  MaxEstimate best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    detail::AscentRun run = detail::ascend(sym, detail::sphere_sample(engine, t.dim), opt);
    best.iterations += run.iterations;
    if (run.value > best.value) {
      best.value = run.value;
      best.argmax = std::move(run.x);
      best.converged = run.converged;
    }
  }
  best.restarts = opt.restarts;
  return best;
}

}  // namespace tsc

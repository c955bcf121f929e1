#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tsc {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed or unsupported input (CLI exit code 2).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A construction would exceed the configured size budget (CLI exit code 3).
class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// An iterative eigensolver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Size limits shared by every construction in the library.
struct Budget {
  // Dense real entries allowed in a single tensor or materialized vector.
  std::size_t max_entries = std::size_t{1} << 27;
  // Largest dimension for which a dense matrix is built and eigensolved.
  std::size_t max_dense_dim = 4096;
  // Largest dimension of a matrix-free operator.
  std::size_t max_operator_dim = std::size_t{1} << 22;
};

inline const Budget& default_budget() {
  static const Budget budget{};
  return budget;
}

/// n^k with overflow detection.
inline std::size_t checked_pow(std::size_t n, int k) {
  std::size_t out = 1;
  for (int i = 0; i < k; ++i) {
    if (n != 0 && out > std::numeric_limits<std::size_t>::max() / n) {
      throw BudgetError("integer power " + std::to_string(n) + "^" + std::to_string(k) +
                        " overflows");
    }
    out *= n;
  }
  return out;
}

/// Exact binomial coefficient; throws BudgetError on 64-bit overflow.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // out * (n - k + i) / i stays integral at every step.
    out = out * (n - k + i) / i;
    if (out > std::numeric_limits<std::uint64_t>::max()) {
      throw BudgetError("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                        ") overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(out);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}

}  // namespace tsc

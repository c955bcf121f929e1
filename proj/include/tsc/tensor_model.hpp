#pragma once

// Seeded random tensors, flattening, coefficient extraction, and evaluation.
//
// Random stream: std::mt19937_64 seeded with the 64-bit seed (its output
// sequence is fixed by the C++ standard). Rademacher entries consume one
// engine output each and use its most significant bit (1 -> +1, 0 -> -1).
// Gaussian entries use Box-Muller on pairs of 53-bit uniforms taken from the
// top bits of consecutive engine outputs.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <algorithm>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tsc/common.hpp"
#include "tsc/index_core.hpp"

namespace tsc {

enum class TensorModel { rademacher, gaussian, explicit_entries };

inline std::string to_string(TensorModel m) {
  switch (m) {
    case TensorModel::rademacher: return "rademacher";
    case TensorModel::gaussian: return "gaussian";
    case TensorModel::explicit_entries: return "explicit";
  }
  return "explicit";
}

inline TensorModel parse_model(const std::string& s) {
  if (s == "rademacher") return TensorModel::rademacher;
  if (s == "gaussian") return TensorModel::gaussian;
  if (s == "explicit") return TensorModel::explicit_entries;
  throw InputError("unknown tensor model '" + s + "'");
}

/// Order-d, dimension-n real tensor, entries in row-major order.
struct DenseTensor {
  int order = 0;
  int dim = 0;
  std::vector<double> entries;
  TensorModel model = TensorModel::explicit_entries;
  std::optional<std::uint64_t> seed;

  double& operator[](std::span<const int> tuple) { return entries[tuple_linear_index(tuple, dim)]; }
  double operator[](std::span<const int> tuple) const {
    return entries[tuple_linear_index(tuple, dim)];
  }
};

inline DenseTensor zero_tensor(int n, int d, const Budget& budget = default_budget()) {
  require(n >= 1 && d >= 1, "tensor needs n >= 1 and d >= 1");
  const std::size_t size = checked_pow(static_cast<std::size_t>(n), d);
  if (size > budget.max_entries) {
    throw BudgetError("tensor with " + std::to_string(size) + " entries exceeds budget");
  }
  DenseTensor t;
  t.order = d;
  t.dim = n;
  t.entries.assign(size, 0.0);
  return t;
}

inline DenseTensor sample_tensor(int n, int d, TensorModel model, std::uint64_t seed,
                                 const Budget& budget = default_budget()) {
  require(model != TensorModel::explicit_entries, "cannot sample an explicit tensor");
  DenseTensor t = zero_tensor(n, d, budget);
  t.model = model;
  t.seed = seed;
  std::mt19937_64 engine(seed);
  if (model == TensorModel::rademacher) {
    for (double& e : t.entries) e = (engine() >> 63) ? 1.0 : -1.0;
  } else {
    const auto uniform = [&engine] {
      // (0, 1): never exactly 0, so the log below is finite.
      return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
    };
    for (std::size_t i = 0; i < t.entries.size(); i += 2) {
      const double r = std::sqrt(-2.0 * std::log(uniform()));
      const double theta = 2.0 * std::numbers::pi * uniform();
      t.entries[i] = r * std::cos(theta);
      if (i + 1 < t.entries.size()) t.entries[i + 1] = r * std::sin(theta);
    }
  }
  return t;
}

/// A[I, J] = T[I (+) J], an n^{d/2} x n^{d/2} tuple-indexed matrix.
inline SymMatrix flatten(const DenseTensor& t) {
  if (t.order % 2 != 0) throw InputError("flatten needs an even-order tensor");
  const int k = t.order / 2;
  const auto m = static_cast<Eigen::Index>(checked_pow(static_cast<std::size_t>(t.dim), k));
  SymMatrix out{IndexKind::tuple, t.dim, k, Eigen::MatrixXd(m, m), SymmetryTag::none};
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out.entries(i, j) = t.entries[static_cast<std::size_t>(i * m + j)];
  return out;
}

inline DenseTensor unflatten(const SymMatrix& a) {
  require_tuple_indexed(a, "unflatten");
  DenseTensor t = zero_tensor(a.n, 2 * a.k);
  const Eigen::Index m = a.dim();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) t.entries[static_cast<std::size_t>(i * m + j)] = a.entries(i, j);
  return t;
}

/// Contracts the trailing `modes` modes of a row-major tensor with x.
inline std::vector<double> contract_trailing(std::span<const double> entries, int n,
                                             const Eigen::VectorXd& x, int modes) {
  std::vector<double> cur(entries.begin(), entries.end());
  const auto un = static_cast<std::size_t>(n);
  for (int s = 0; s < modes; ++s) {
    std::vector<double> next(cur.size() / un, 0.0);
    for (std::size_t i = 0; i < next.size(); ++i) {
      double acc = 0.0;
      const double* row = cur.data() + i * un;
      for (std::size_t j = 0; j < un; ++j) acc += row[j] * x(static_cast<Eigen::Index>(j));
      next[i] = acc;
    }
    cur = std::move(next);
  }
  return cur;
}

/// <T, x^{(x)d}>.
inline double evaluate(const DenseTensor& t, const Eigen::VectorXd& x) {
  if (x.size() != t.dim) {
    throw InputError("evaluate: vector has length " + std::to_string(x.size()) + ", tensor dim " +
                     std::to_string(t.dim));
  }
  return contract_trailing(t.entries, t.dim, x, t.order).front();
}

/// f_alpha for every alpha in N^{n,d}, graded-lex order.
struct CoefficientMap {
  int n = 0;
  int degree = 0;
  std::vector<MultiIndex> basis;
  std::vector<double> values;

  double at(const MultiIndex& alpha) const { return values[multiindex_rank(alpha)]; }
};

/// f_alpha = sum over K in O(alpha) of T[K]; the tensor need not be symmetric.
inline CoefficientMap coefficients(const DenseTensor& t) {
  const OrbitTable orbits = make_orbit_table(t.dim, t.order);
  CoefficientMap out;
  out.n = t.dim;
  out.degree = t.order;
  out.basis = orbits.classes;
  out.values.assign(orbits.class_count(), 0.0);
  for (std::size_t lin = 0; lin < t.entries.size(); ++lin) {
    out.values[orbits.class_of_tuple[lin]] += t.entries[lin];
  }
  return out;
}

/// Fully symmetric tensor with the same polynomial: the average of T over all
/// d! permutations of its modes.
inline DenseTensor symmetrize_tensor(const DenseTensor& t) {
  const int d = t.order;
  const auto n = static_cast<std::size_t>(t.dim);
  std::vector<std::size_t> stride(static_cast<std::size_t>(d));
  for (int p = d - 1; p >= 0; --p) {
    stride[static_cast<std::size_t>(p)] = (p == d - 1) ? 1 : stride[static_cast<std::size_t>(p + 1)] * n;
  }
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  DenseTensor out = t;
  std::fill(out.entries.begin(), out.entries.end(), 0.0);
  double count = 0.0;
  std::vector<std::size_t> tuple(static_cast<std::size_t>(d));
  do {
    std::fill(tuple.begin(), tuple.end(), 0);
    std::size_t src = 0;  // linear index of the permuted tuple
    for (std::size_t lin = 0; lin < t.entries.size(); ++lin) {
      out.entries[lin] += t.entries[src];
      for (int p = d - 1; p >= 0; --p) {
        const auto up = static_cast<std::size_t>(p);
        const std::size_t s = stride[static_cast<std::size_t>(perm[up])];
        if (++tuple[up] < n) {
          src += s;
          break;
        }
        src -= (n - 1) * s;
        tuple[up] = 0;
      }
    }
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double& e : out.entries) e /= count;
  return out;
}

/// T_l = (Tbar_l + Tbar_l^T) / 2 with Tbar_l[i, j] = T[(l, i, j)], so that
/// <T, x^{(x)3}> = sum_l x_l (x^T T_l x).
inline std::vector<Eigen::MatrixXd> symmetrized_slices(const DenseTensor& t) {
  if (t.order != 3) throw InputError("symmetrized_slices needs an order-3 tensor");
  const Eigen::Index n = t.dim;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < n; ++l) {
    Eigen::MatrixXd bar(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        bar(i, j) = t.entries[static_cast<std::size_t>((l * n + i) * n + j)];
    out.emplace_back((bar + bar.transpose()) / 2.0);
  }
  return out;
}

// ---- tensor file format -------------------------------------------------
//
// One JSON object:
//   {"format": "tsc-tensor", "version": 1, "order": d, "dim": n,
//    "model": "rademacher" | "gaussian" | "explicit", "seed": <u64 or null>,
//    "encoding": "base64-f64le", "payload": "<base64>"}
// "encoding"/"payload" are omitted for seed-only files, which are regenerated
// with sample_tensor on load.

namespace base64 {

inline constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    if (rest == 2) v |= std::uint32_t{bytes[i + 1]} << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::vector<unsigned char> decode(const std::string& text) {
  std::array<int, 256> lut{};
  lut.fill(-1);
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kAlphabet[i])] = i;
  if (text.size() % 4 != 0) throw InputError("base64 payload length is not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + static_cast<std::size_t>(j)];
      if (c == '=') {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = lut[static_cast<unsigned char>(c)];
      if (d < 0 || pad > 0) throw InputError("invalid base64 payload");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<unsigned char>(v >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return out;
}

}  // namespace base64

namespace detail {
inline std::vector<unsigned char> to_f64le(const std::vector<double>& values) {
  std::vector<unsigned char> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &values[i], 8);
    for (int b = 0; b < 8; ++b) out[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return out;
}

inline std::vector<double> from_f64le(const std::vector<unsigned char>& bytes) {
  if (bytes.size() % 8 != 0) throw InputError("payload is not a whole number of float64 values");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[i * 8 + static_cast<std::size_t>(b)]} << (8 * b);
    std::memcpy(&out[i], &bits, 8);
  }
  return out;
}
}  // namespace detail

inline nlohmann::json tensor_to_json(const DenseTensor& t, bool with_payload) {
  nlohmann::json j;
  j["format"] = "tsc-tensor";
  j["version"] = 1;
  j["order"] = t.order;
  j["dim"] = t.dim;
  j["model"] = to_string(t.model);
  j["seed"] = t.seed ? nlohmann::json(*t.seed) : nlohmann::json(nullptr);
  if (with_payload || !t.seed || t.model == TensorModel::explicit_entries) {
    j["encoding"] = "base64-f64le";
    j["payload"] = base64::encode(detail::to_f64le(t.entries));
  }
  return j;
}

inline DenseTensor tensor_from_json(const nlohmann::json& j, const Budget& budget = default_budget()) {
  try {
    if (j.value("format", std::string{}) != "tsc-tensor") throw InputError("not a tsc-tensor file");
    const int d = j.at("order").get<int>();
    const int n = j.at("dim").get<int>();
    const TensorModel model = parse_model(j.at("model").get<std::string>());
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("payload")) {
      if (j.value("encoding", std::string{}) != "base64-f64le") throw InputError("unsupported payload encoding");
      DenseTensor t = zero_tensor(n, d, budget);
      auto values = detail::from_f64le(base64::decode(j.at("payload").get<std::string>()));
      if (values.size() != t.entries.size()) throw InputError("payload length does not match n^d");
      t.entries = std::move(values);
      t.model = model;
      t.seed = seed;
      return t;
    }
    if (!seed || model == TensorModel::explicit_entries) {
      throw InputError("tensor file has neither a payload nor a regenerable seed");
    }
    return sample_tensor(n, d, model, *seed, budget);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed tensor file: ") + e.what());
  }
}

inline void save_tensor(const std::string& path, const DenseTensor& t, bool with_payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << tensor_to_json(t, with_payload).dump() << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline DenseTensor load_tensor(const std::string& path, const Budget& budget = default_budget()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open tensor file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("tensor file '" + path + "' is not valid JSON: " + e.what());
  }
  return tensor_from_json(j, budget);
}

}  // namespace tsc

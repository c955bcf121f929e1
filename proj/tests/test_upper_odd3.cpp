#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tsc/fmax_estimate.hpp"
#include "tsc/upper_odd3.hpp"

using namespace tsc;

TEST(UpperOdd3, SingleVariable) {
  for (double a : {1.0, -2.5, 0.75}) {
    DenseTensor t = zero_tensor(1, 3);
    t.entries[0] = a;
    EXPECT_NEAR(cert_upper_odd3(t, 4).bound, std::abs(a) * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(cert_upper_odd3(t, 8).bound, std::abs(a) * std::sqrt(2.0), 1e-12);
  }
}

TEST(UpperOdd3, LevelRestrictions) {
  EXPECT_NO_THROW(check_odd_level(4));
  EXPECT_NO_THROW(check_odd_level(8));
  EXPECT_NO_THROW(check_odd_level(16));
  for (int q : {0, 2, 3, 6, 12, 20}) EXPECT_THROW(check_odd_level(q), InputError) << q;
  EXPECT_THROW(cert_upper_odd3(sample_tensor(3, 4, TensorModel::gaussian, 1), 4), InputError);
}

TEST(UpperOdd3, PipelineMatricesAgainstOracle) {
  const DenseTensor t = sample_tensor(3, 3, TensorModel::gaussian, 2);
  const OddPipelineState s = build_odd_state(t, 4);
  Eigen::MatrixXd tcal = Eigen::MatrixXd::Zero(9, 9);
  for (const auto& tl : s.slices) tcal += oracle::kron(tl, tl);
  EXPECT_LT((s.tcal - tcal).cwiseAbs().maxCoeff(), 1e-12);
  // E keeps exactly the ((i,i),(j,j)) entries
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double expect = (i == j && k == l) ? tcal(i * 3 + j, k * 3 + l) : 0.0;
          EXPECT_EQ(s.e(i * 3 + j, k * 3 + l), expect);
        }
  EXPECT_LT((s.t + s.e - s.tcal).cwiseAbs().maxCoeff(), 1e-15);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(s.e_prime(i * 3 + j), s.e(i * 4, j * 4) + s.e(j * 4, i * 4));
}

TEST(UpperOdd3, TcalReproducesSquaredCubic) {
  // (x (x) x)^T Tcal (x (x) x) = sum_l (x^T T_l x)^2 >= f(x)^2 on the unit sphere
  std::mt19937_64 engine(3);
  const DenseTensor t = sample_tensor(4, 3, TensorModel::gaussian, 3);
  const OddPipelineState s = build_odd_state(t, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = oracle::random_unit(engine, 4);
    const Eigen::VectorXd y = oracle::kron(x, x).col(0);
    double expect = 0.0;
    for (const auto& tl : s.slices) expect += std::pow(x.dot(tl * x), 2);
    EXPECT_NEAR(y.dot(s.tcal * y), expect, 1e-10);
    const double f = oracle::evaluate(t.entries, 4, 3, x);
    EXPECT_GE(expect + 1e-12, f * f);
  }
}

TEST(UpperOdd3, SandwichOnRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    for (auto model : {TensorModel::rademacher, TensorModel::gaussian}) {
      const DenseTensor t = sample_tensor(6, 3, model, seed);
      FmaxOptions opt;
      opt.restarts = 20;
      opt.seed = seed;
      const double fmax = heuristic_fmax(t, opt).value;
      const UpperOdd3Result r4 = cert_upper_odd3(t, 4);
      EXPECT_LE(fmax, r4.bound + 1e-9);
      EXPECT_LE(oracle::sampled_max(t.entries, 6, 3, 1000, seed), r4.bound);
      EXPECT_FALSE(r4.radicand_clamped);
      EXPECT_LE(r4.e_prime_max, 5.0 * 6.0);
      EXPECT_FALSE(r4.e_prime_exceeds_5n);
      const UpperOdd3Result r8 = cert_upper_odd3(t, 8);
      EXPECT_LE(fmax, r8.bound + 1e-9);
    }
  }
}

TEST(UpperOdd3, CoordinateCube) {
  DenseTensor t = zero_tensor(3, 3);
  t.entries[0] = 1.0;  // f = x_0^3, maximum 1
  const UpperOdd3Result r = cert_upper_odd3(t, 4);
  EXPECT_GE(r.bound, 1.0 - 1e-12);
}

TEST(UpperOdd3, IterativePathAgreesWithDense) {
  const DenseTensor t = sample_tensor(5, 3, TensorModel::gaussian, 4);
  SpectralOptions iter;
  iter.dense_threshold = 0;
  const UpperOdd3Result a = cert_upper_odd3(t, 4);
  const UpperOdd3Result b = cert_upper_odd3(t, 4, iter);
  EXPECT_NEAR(a.bound, b.bound, 1e-7 * a.bound);
  EXPECT_NEAR(a.b_norm, b.b_norm, 1e-7 * a.b_norm);
}

TEST(UpperOdd3, Budget) {
  Budget tiny;
  tiny.max_operator_dim = 100;
  EXPECT_THROW(cert_upper_odd3(sample_tensor(5, 3, TensorModel::gaussian, 1), 8, {}, tiny), BudgetError);
}

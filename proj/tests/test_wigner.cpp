#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tsc/spectral.hpp"
#include "tsc/wigner.hpp"

using namespace tsc;

TEST(Catalan, SmallValues) {
  EXPECT_EQ(catalan(0), 1u);
  EXPECT_EQ(catalan(3), 5u);
  EXPECT_EQ(catalan(5), 42u);
  const auto table = oracle::catalan_table(30);
  for (int l = 0; l <= 30; ++l) EXPECT_EQ(catalan(l), table[static_cast<std::size_t>(l)]) << l;
}

TEST(Catalan, OverflowAndDomain) {
  EXPECT_NO_THROW(catalan(35));
  EXPECT_THROW(catalan(40), BudgetError);
  EXPECT_THROW(catalan(-1), InputError);
}

TEST(Catalan, AreSemicircleMoments) {
  for (int m = 0; m <= 6; ++m) {
    EXPECT_NEAR(oracle::semicircle_moment(2 * m), static_cast<double>(catalan(m)), 1e-5 * catalan(m));
    EXPECT_NEAR(oracle::semicircle_moment(2 * m + 1), 0.0, 1e-9);
  }
}

TEST(Paren, MatchesExhaustiveStringCounts) {
  for (int k = 0; k <= 8; ++k) {
    const IntMatrix r = paren_matrix(k);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) EXPECT_EQ(r(i, j), oracle::consistent_strings(j, i)) << k << ":" << i << "," << j;
  }
  EXPECT_EQ(paren_matrix(3)(1, 3), 2);
}

TEST(Paren, UnitUpperTriangular) {
  for (int k = 0; k <= 10; ++k) {
    const IntMatrix r = paren_matrix(k);
    for (int i = 0; i <= k; ++i) {
      EXPECT_EQ(r(i, i), 1);
      for (int j = 0; j < i; ++j) EXPECT_EQ(r(i, j), 0);
    }
  }
}

TEST(Hankel, ExampleAndCatalanEntries) {
  IntMatrix h2(3, 3);
  h2 << 1, 0, 1, 0, 1, 0, 1, 0, 2;
  EXPECT_EQ(hankel_matrix(2), h2);
  const auto cat = oracle::catalan_table(20);
  for (int k = 0; k <= 8; ++k) {
    const IntMatrix r = paren_matrix(k);
    const IntMatrix h = hankel_matrix(k);
    EXPECT_EQ(h, IntMatrix(r.transpose() * r));
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j)
        EXPECT_EQ(h(i, j), (i + j) % 2 ? 0 : static_cast<std::int64_t>(cat[static_cast<std::size_t>((i + j) / 2)]));
  }
}

TEST(Hankel, PositiveDefinite) {
  for (int k = 0; k <= 10; ++k) {
    const Eigen::MatrixXd h = hankel_matrix(k).cast<double>();
    EXPECT_GT(lambda_min_dense(h), 0.0) << k;
  }
}

TEST(WignerHat, TwoVariableDegreeFourExample) {
  const WignerMomentMatrix w = wigner_hat(2, 4);
  UIntMatrix expect(3, 3);
  expect << 2, 0, 1, 0, 1, 0, 1, 0, 2;
  EXPECT_EQ(w.entries, expect);
  EXPECT_NEAR(lambda_min_dense(w.real()), 1.0, 1e-12);
}

TEST(WignerHat, EntriesAreProductsOfSemicircleMoments) {
  const WignerMomentMatrix w = wigner_hat(3, 4);
  for (std::size_t a = 0; a < w.basis.size(); ++a) {
    for (std::size_t b = 0; b < w.basis.size(); ++b) {
      double moment = 1.0;
      for (int i = 0; i < 3; ++i) {
        moment *= oracle::semicircle_moment(w.basis[a].counts[static_cast<std::size_t>(i)] +
                                            w.basis[b].counts[static_cast<std::size_t>(i)]);
      }
      EXPECT_NEAR(static_cast<double>(w.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))), moment,
                  1e-4);
    }
  }
}

TEST(WignerHat, MinimumEigenvalueAndEntryRange) {
  for (int n = 1; n <= 5; ++n) {
    for (int q : {2, 4, 6, 8}) {
      const WignerMomentMatrix w = wigner_hat(n, q);
      EXPECT_GE(lambda_min_dense(w.real()), 0.5 - 1e-9) << n << "," << q;
      for (Eigen::Index i = 0; i < w.entries.rows(); ++i) {
        EXPECT_GE(w.entries(i, i), 1u);
        for (Eigen::Index j = 0; j < w.entries.cols(); ++j) EXPECT_LE(w.entries(i, j), std::uint64_t{1} << q);
      }
    }
  }
}

TEST(WignerHat, Errors) {
  EXPECT_THROW(wigner_hat(0, 4), InputError);
  EXPECT_THROW(wigner_hat(3, 3), InputError);
  Budget tiny;
  tiny.max_dense_dim = 5;
  EXPECT_THROW(wigner_hat(3, 4, tiny), BudgetError);
}

TEST(WignerExtend, TraceAndSymmetry) {
  const WignerMomentMatrix w = wigner_hat(2, 4);
  const SymMatrix ext = wigner_extend(w);
  EXPECT_DOUBLE_EQ(ext.entries.trace(), 6.0);
  EXPECT_DOUBLE_EQ(wigner_extended_trace(w), 6.0);
  EXPECT_TRUE(is_sos_symmetric(ext, 0.0));
  for (int n = 1; n <= 4; ++n) {
    const WignerMomentMatrix wn = wigner_hat(n, 4);
    const SymMatrix e = wigner_extend(wn);
    EXPECT_NEAR(e.entries.trace(), wigner_extended_trace(wn), 1e-9);
    // each entry W[I, J] is the joint semicircle moment of x^(alpha(I) + alpha(J))
    const auto tuples = oracle::all_tuples(n, 2);
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      for (std::size_t j = 0; j < tuples.size(); ++j) {
        const auto ci = oracle::counts_of(tuples[i], n);
        const auto cj = oracle::counts_of(tuples[j], n);
        double expect = 1.0;
        for (int l = 0; l < n; ++l) {
          const int s = ci[static_cast<std::size_t>(l)] + cj[static_cast<std::size_t>(l)];
          expect *= s % 2 ? 0.0 : static_cast<double>(oracle::catalan_table(4)[static_cast<std::size_t>(s / 2)]);
        }
        EXPECT_EQ(e.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), expect);
      }
    }
  }
}

TEST(WignerExtend, ExtendedMatrixIsPsd) {
  for (int n = 1; n <= 4; ++n) {
    const SymMatrix e = wigner_extend(wigner_hat(n, 4));
    EXPECT_TRUE(is_psd(e.entries).psd);
  }
}

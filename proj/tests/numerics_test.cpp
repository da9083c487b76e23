#include "mvgad/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "mvgad/error.hpp"
#include "test_support.hpp"

using namespace mvgad;
using namespace mvgad::numerics;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an mvgad::Error";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Standardize, TwoPointColumn) {
  auto s = standardize(DenseMatrix{{1.0}, {3.0}});
  EXPECT_NEAR(s.values(0, 0), -1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.values(1, 0), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Standardize, ConstantColumnMapsToZero) {
  auto s = standardize(DenseMatrix{{5.0}, {5.0}, {5.0}});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.values(i, 0), 0.0);
  EXPECT_EQ(s.scales[0], 1.0);
  EXPECT_EQ(s.means[0], 5.0);
}

TEST(Standardize, ZeroOneTwo) {
  auto s = standardize(DenseMatrix{{0.0}, {1.0}, {2.0}});
  EXPECT_NEAR(s.values(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(s.values(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(s.values(2, 0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.scales[0], 1.0);
}

TEST(Standardize, MeanZeroStdOne) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(4.0, 3.0);
  DenseMatrix x(50, 4);
  for (auto& v : x.data()) v = nd(gen);
  auto s = standardize(x);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0, ss = 0;
    for (std::size_t i = 0; i < 50; ++i) mean += s.values(i, j);
    mean /= 50;
    for (std::size_t i = 0; i < 50; ++i) ss += std::pow(s.values(i, j) - mean, 2);
    EXPECT_LE(std::abs(mean), 1e-10);
    EXPECT_NEAR(std::sqrt(ss / 49), 1.0, 1e-12);
  }
}

TEST(Standardize, RejectsSingleRow) {
  EXPECT_EQ(code_of([] { standardize(DenseMatrix{{1.0, 2.0}}); }),
            ErrorCode::EmptyInput);
}

TEST(SymEig, TwoNodeLaplacian) {
  auto e = sym_eig(DenseMatrix{{1, -1}, {-1, 1}});
  EXPECT_NEAR(e.eigenvalues[0], 0.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1], 2.0, 1e-14);
}

TEST(SymEig, Identity) {
  auto e = sym_eig(DenseMatrix::identity(3));
  for (double v : e.eigenvalues) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(SymEig, PathGraphLaplacian) {
  auto e = sym_eig(DenseMatrix{{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}});
  EXPECT_NEAR(e.eigenvalues[0], 0.0, 1e-10);
  EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-10);
  EXPECT_NEAR(e.eigenvalues[2], 3.0, 1e-10);
  // Fiedler vector (1, 0, -1)/sqrt(2) with the positive-first sign rule.
  EXPECT_NEAR(e.eigenvectors(0, 1), 1.0 / std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(e.eigenvectors(1, 1), 0.0, 1e-10);
  EXPECT_NEAR(e.eigenvectors(2, 1), -1.0 / std::sqrt(2.0), 1e-10);
}

TEST(SymEig, RejectsAsymmetric) {
  EXPECT_EQ(code_of([] { sym_eig(DenseMatrix{{1, 2}, {0, 1}}); }),
            ErrorCode::NotSymmetric);
}

TEST(SymEig, RejectsNonSquare) {
  EXPECT_EQ(code_of([] { sym_eig(DenseMatrix(2, 3)); }),
            ErrorCode::DimensionMismatch);
}

TEST(SymEig, RandomMatricesResidualTraceOrthonormality) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + gen() % 64;
    DenseMatrix a = oracle::random_symmetric(n, gen, 5.0);
    auto e = sym_eig(a);
    const double amax = a.max_abs();
    double trace = 0, sum = 0;
    for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
    for (std::size_t j = 0; j < n; ++j) {
      sum += e.eigenvalues[j];
      if (j > 0) EXPECT_LE(e.eigenvalues[j - 1], e.eigenvalues[j]);
      auto v = e.eigenvectors.column(j);
      auto av = a * v;
      double res = 0;
      for (std::size_t i = 0; i < n; ++i)
        res = std::max(res, std::abs(av[i] - e.eigenvalues[j] * v[i]));
      EXPECT_LE(res, 1e-8 * (1 + amax));
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(v[i]) > 1e-12) {
          EXPECT_GT(v[i], 0.0);
          break;
        }
      }
    }
    EXPECT_NEAR(sum, trace, 1e-8 * n * amax);
    auto vtv = e.eigenvectors.transpose() * e.eigenvectors;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-8);
  }
}

TEST(SymEig, AgreesWithJacobiOracle) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + gen() % 12;
    DenseMatrix a = oracle::random_symmetric(n, gen);
    auto ours = sym_eig(a).eigenvalues;
    auto ref = oracle::jacobi_eigenvalues(a);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ours[i], ref[i], 1e-10);
  }
}

TEST(SymEig, RepeatedEigenvaluesStayOrthonormal) {
  // Laplacian of three disconnected pairs: eigenvalue 0 and 2 each x3.
  DenseMatrix l(6, 6);
  for (std::size_t c = 0; c < 3; ++c) {
    l(2 * c, 2 * c) = 1;
    l(2 * c + 1, 2 * c + 1) = 1;
    l(2 * c, 2 * c + 1) = -1;
    l(2 * c + 1, 2 * c) = -1;
  }
  auto e = sym_eig(l);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(e.eigenvalues[j], 0.0, 1e-12);
  for (std::size_t j = 3; j < 6; ++j) EXPECT_NEAR(e.eigenvalues[j], 2.0, 1e-12);
  auto vtv = e.eigenvectors.transpose() * e.eigenvectors;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(SymEig, Deterministic) {
  std::mt19937_64 gen(99);
  DenseMatrix a = oracle::random_symmetric(30, gen);
  auto e1 = sym_eig(a);
  auto e2 = sym_eig(a);
  EXPECT_EQ(0, std::memcmp(e1.eigenvalues.data(), e2.eigenvalues.data(),
                           sizeof(double) * 30));
  EXPECT_TRUE(e1.eigenvectors == e2.eigenvectors);
}

TEST(Pca, CollinearPoints) {
  DenseMatrix x{{1, 1}, {2, 2}, {3, 3}};
  auto model = pca_fit(x, 0.95);
  EXPECT_EQ(model.m, 1u);
  EXPECT_NEAR(model.explained_variance_ratio[0], 1.0, 1e-12);
  EXPECT_NEAR(model.components(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(model.components(1, 0), 1.0 / std::sqrt(2.0), 1e-12);

  auto scores = pca_transform(model, x);
  ASSERT_EQ(scores.cols(), 1u);
  // Standardized coordinates are (-1,-1), (0,0), (1,1).
  EXPECT_NEAR(scores(0, 0), -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(scores(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(scores(2, 0), std::sqrt(2.0), 1e-12);
}

TEST(Pca, IsotropicKeepsAllAtFullThreshold) {
  DenseMatrix x{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  auto full = pca_fit(x, 1.0);
  EXPECT_EQ(full.m, 2u);
  auto partial = pca_fit(x, 0.6);
  EXPECT_NEAR(partial.explained_variance_ratio[0], 0.5, 1e-12);
  EXPECT_NEAR(partial.explained_variance_ratio[1], 0.5, 1e-12);
  EXPECT_EQ(partial.m, 2u);
}

TEST(Pca, MeanRowMapsToZero) {
  DenseMatrix x{{1, 5, 2}, {2, 3, 9}, {4, 4, 4}, {0, 1, 3}};
  auto model = pca_fit(x, 0.99);
  DenseMatrix mean_row(1, 3);
  for (std::size_t j = 0; j < 3; ++j) mean_row(0, j) = model.means[j];
  auto out = pca_transform(model, mean_row);
  for (std::size_t c = 0; c < model.m; ++c) EXPECT_NEAR(out(0, c), 0.0, 1e-12);
}

TEST(Pca, IdentityComponentsGiveStandardizedColumns) {
  DenseMatrix x{{1, 5, 2}, {2, 3, 9}, {4, 4, 4}, {0, 1, 3}};
  auto model = pca_fit(x, 1.0);
  model.components = DenseMatrix::identity(3);
  model.m = 2;
  auto out = pca_transform(model, x);
  auto z = standardize(x).values;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(out(i, c), z(i, c), 1e-14);
}

TEST(Pca, ComponentsOrthonormalAndRatiosBounded) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  DenseMatrix x(40, 6);
  for (std::size_t i = 0; i < 40; ++i) {
    const double t = nd(gen);
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = t * (j + 1) + 0.3 * nd(gen);
  }
  auto model = pca_fit(x, 0.9);
  EXPECT_GE(model.m, 1u);
  double acc = 0;
  for (double r : model.explained_variance_ratio) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    acc += r;
  }
  EXPECT_LE(acc, 1.0 + 1e-8);
  auto ctc = model.components.transpose() * model.components;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (i != j) EXPECT_LE(std::abs(ctc(i, j)), 1e-8);
}

TEST(Pca, FullRankReconstruction) {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> nd;
  DenseMatrix x(25, 5);
  for (auto& v : x.data()) v = nd(gen);
  auto model = pca_fit(x, 1.0);
  model.m = 5;
  auto scores = pca_transform(model, x);
  auto recon = scores * model.components.transpose();
  auto z = standardize(x).values;
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(recon(i, j), z(i, j), 1e-8);
}

TEST(Pca, TransformDimensionMismatch) {
  auto model = pca_fit(DenseMatrix{{1, 2}, {3, 5}, {0, 1}}, 0.9);
  EXPECT_EQ(code_of([&] { pca_transform(model, DenseMatrix(2, 3)); }),
            ErrorCode::DimensionMismatch);
}

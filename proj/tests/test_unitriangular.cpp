#include <bogomolov/unitriangular.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace bogomolov;

namespace {

// Dense reference multiplication on full n x n matrices, independent of the
// packed kernel.
std::vector<std::vector<std::int64_t>> dense(const UtMatrix& a) {
  std::vector<std::vector<std::int64_t>> m(a.n(), std::vector<std::int64_t>(a.n()));
  for (int i = 0; i < a.n(); ++i) m[i][i] = 1;
  for (auto& e : a.entries()) m[e.i - 1][e.j - 1] = e.value;
  return m;
}

UtMatrix from_dense(const std::vector<std::vector<std::int64_t>>& m, std::uint32_t p) {
  int n = int(m.size());
  UtMatrix r(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) r.set(i + 1, j + 1, m[i][j]);
  return r;
}

UtMatrix dense_mul(const UtMatrix& a, const UtMatrix& b) {
  auto x = dense(a), y = dense(b);
  int n = a.n();
  std::vector<std::vector<std::int64_t>> z(n, std::vector<std::int64_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) z[i][j] = (z[i][j] + x[i][k] * y[k][j]) % a.p();
  return from_dense(z, a.p());
}

}  // namespace

TEST(UtMatrix, Transvections) {
  EXPECT_TRUE(transvection_matrix({1, 2, 0}, 4, 3).is_identity());
  auto t = transvection_matrix({1, 3, 2}, 3, 5);
  EXPECT_EQ(t.entries(), (std::vector<MatrixEntry>{{1, 3, 2}}));
  EXPECT_EQ(transvection_matrix({2, 3, 4}, 3, 3).get(2, 3), 1u);
  EXPECT_THROW(transvection_matrix({3, 2, 1}, 3, 3), Error);
  EXPECT_THROW(transvection_matrix({1, 4, 1}, 3, 3), Error);
  EXPECT_THROW(UtMatrix(3, 4), Error);
}

TEST(UtMatrix, MultiplicationAndInverse) {
  auto a = tv(3, 2, 1, 2, 1), b = tv(3, 2, 2, 3, 1);
  EXPECT_EQ(ut_mul(a, b).entries(),
            (std::vector<MatrixEntry>{{1, 2, 1}, {1, 3, 1}, {2, 3, 1}}));
  for (std::uint32_t x = 0; x < 5; ++x)
    for (std::uint32_t y = 0; y < 5; ++y)
      EXPECT_EQ(ut_mul(tv(4, 5, 1, 2, x), tv(4, 5, 1, 2, y)), tv(4, 5, 1, 2, x + y));
  EXPECT_TRUE(ut_inv(UtMatrix(5, 3)).is_identity());
  EXPECT_THROW(ut_mul(UtMatrix(3, 2), UtMatrix(4, 2)), Error);

  std::mt19937_64 rng(1);
  for (auto [n, p] : {std::pair{4, 2u}, {5, 3u}, {6, 5u}, {8, 7u}}) {
    UtGroup g({Family::UT, n, p, 1});
    for (int trial = 0; trial < 200; ++trial) {
      auto x = g.random_element(rng), y = g.random_element(rng);
      EXPECT_EQ(ut_mul(x, y), dense_mul(x, y));
      EXPECT_TRUE(ut_mul(x, ut_inv(x)).is_identity());
      EXPECT_TRUE(ut_mul(ut_inv(x), x).is_identity());
    }
  }
}

TEST(UtMatrix, CommutatorClosedForm) {
  EXPECT_EQ(transvection_commutator(1, 3, 2, 3, 4, 2, 4, 5), tv(4, 5, 1, 4, 4));
  EXPECT_EQ(transvection_commutator(2, 3, 1, 1, 2, 1, 3, 3), tv(3, 3, 1, 3, 2));
  EXPECT_TRUE(transvection_commutator(1, 2, 1, 3, 4, 1, 4, 2).is_identity());
}

TEST(UtMatrix, CommutatorMatchesMatrices) {
  for (int n = 2; n <= 6; ++n)
    for (std::uint32_t p : {2u, 3u, 5u})
      for (int i = 1; i <= n; ++i)
        for (int k = i + 1; k <= n; ++k)
          for (int m = 1; m <= n; ++m)
            for (int j = m + 1; j <= n; ++j)
              for (std::uint32_t a = 1; a < p; ++a)
                for (std::uint32_t b = 1; b < p; ++b)
                  ASSERT_EQ(transvection_commutator(i, k, a, m, j, b, n, p),
                            ut_comm(tv(n, p, i, k, a), tv(n, p, m, j, b)))
                      << n << " " << p << " " << i << k << m << j;
}

TEST(UtMatrix, FactorizationRoundTrip) {
  EXPECT_TRUE(factor_transvections(UtMatrix(4, 2)).empty());
  EXPECT_EQ(factor_transvections(tv(3, 5, 1, 3, 2)),
            (std::vector<Transvection>{{1, 3, 2}}));
  auto m = ut_mul(tv(3, 2, 1, 2, 1), tv(3, 2, 2, 3, 1));
  EXPECT_EQ(recompose(factor_transvections(m), 3, 2), m);

  std::mt19937_64 rng(99);
  for (int n = 2; n <= 6; ++n)
    for (std::uint32_t p : {2u, 3u, 5u}) {
      UtGroup g({Family::UT, n, p, 1});
      for (int trial = 0; trial < 10000; ++trial) {
        auto x = g.random_element(rng);
        auto f = factor_transvections(x);
        ASSERT_LE(f.size(), std::size_t(n * (n - 1) / 2));
        for (std::size_t k = 1; k < f.size(); ++k) {
          int d0 = f[k - 1].j - f[k - 1].i, d1 = f[k].j - f[k].i;
          ASSERT_TRUE(d0 < d1 || (d0 == d1 && f[k - 1].i < f[k].i));
        }
        ASSERT_EQ(recompose(f, n, p), x);
      }
    }
}

TEST(Family, Validation) {
  EXPECT_THROW((UtFamilySpec{Family::UT, 3, 4, 1}).validate(), Error);
  EXPECT_THROW((UtFamilySpec{Family::UT, 1, 2, 1}).validate(), Error);
  EXPECT_THROW((UtFamilySpec{Family::UTsub, 4, 2, 0}).validate(), Error);
  EXPECT_THROW((UtFamilySpec{Family::Gamma, 4, 2, 4}).validate(), Error);
  EXPECT_NO_THROW((UtFamilySpec{Family::Gamma, 4, 2, 3}).validate());
  EXPECT_EQ((UtFamilySpec{Family::Gamma, 6, 3, 4}).render(), "Gamma(6,3,4)");
}

TEST(Family, BuildOrders) {
  EXPECT_EQ(build_family({Family::UT, 3, 3, 1}, true).table->order(), 27u);
  auto sub = build_family({Family::UTsub, 4, 2, 2}, true);
  EXPECT_EQ(sub.table->order(), 8u);
  EXPECT_TRUE(sub.table->is_abelian());
  EXPECT_EQ(sub.generators.size(), 3u);
  auto gamma = build_family({Family::Gamma, 4, 2, 3}, true);
  EXPECT_EQ(gamma.table->order(), 32u);
  auto gamma2 = build_family({Family::Gamma, 4, 3, 2}, true);
  EXPECT_EQ(gamma2.table->order(), 27u);
  EXPECT_TRUE(gamma2.table->is_abelian());
  for (int n = 2; n <= 4; ++n)
    for (std::uint32_t p : {2u, 3u}) {
      std::size_t expected = 1;
      for (int k = 0; k < n * (n - 1) / 2; ++k) expected *= p;
      EXPECT_EQ(build_family({Family::UT, n, p, 1}, true).table->order(), expected);
    }
  try {
    build_family({Family::UT, 6, 5, 1}, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
  }
}

TEST(Family, GammaRoutesAgree) {
  // quotient route (UT_n fits) vs truncated-matrix closure (forced by a small cap)
  UtFamilySpec spec{Family::Gamma, 4, 2, 3};
  auto via_quotient = build_family(spec, true);
  auto via_truncation = build_family(spec, true, kDefaultClosureCap, 63);
  ASSERT_EQ(via_quotient.table->order(), via_truncation.table->order());
  std::unordered_map<UtMatrix, Elem, UtMatrixHash> index;
  for (Elem k = 0; k < via_truncation.elements.size(); ++k)
    index.emplace(via_truncation.elements[k], k);
  std::vector<Elem> map;
  for (auto& m : via_quotient.elements) map.push_back(index.at(m));
  verify_homomorphism(map, std::make_shared<const GroupTable>(*via_quotient.table),
                      std::make_shared<const GroupTable>(*via_truncation.table));
}

TEST(LowerCentralSeries, SmallCases) {
  auto s3 = lower_central_series(3, 2);
  ASSERT_EQ(s3.size(), 3u);
  EXPECT_EQ(s3[1].size(), 2u);
  EXPECT_EQ(s3[1][1], tv(3, 2, 1, 3, 1));
  auto s4 = lower_central_series(4, 2);
  ASSERT_EQ(s4.size(), 4u);
  EXPECT_EQ(s4[1].size(), 8u);
  EXPECT_EQ(s4[2].size(), 2u);
  auto s2 = lower_central_series(2, 5);
  ASSERT_EQ(s2.size(), 2u);
  EXPECT_EQ(s2[1].size(), 1u);
}

TEST(LowerCentralSeries, EqualsLevelSubgroups) {
  for (int n = 2; n <= 5; ++n)
    for (std::uint32_t p : {2u, 3u}) {
      auto series = lower_central_series(n, p);
      ASSERT_EQ(series.size(), std::size_t(n));
      for (int ell = 1; ell <= n; ++ell)
        EXPECT_EQ(series[ell - 1], enumerate_ut_level(n, p, ell)) << n << " " << p << " " << ell;
    }
}

TEST(LowerCentralSeries, CommutatorsOfLevels) {
  for (int n = 2; n <= 5; ++n)
    for (std::uint32_t p : {2u, 3u})
      for (int r = 1; r < n; ++r)
        for (int s = 1; s < n; ++s)
          EXPECT_EQ(commutator_level_subgroup(n, p, r, s), enumerate_ut_level(n, p, r + s));
}

TEST(Theta, Generators) {
  EXPECT_EQ(theta_apply(tv(3, 2, 1, 2, 1)), tv(4, 2, 1, 3, 1));
  EXPECT_EQ(theta_apply(tv(3, 2, 2, 3, 1)), tv(4, 2, 3, 4, 1));
  EXPECT_EQ(theta_apply(tv(3, 2, 1, 3, 1)), tv(4, 2, 1, 4, 1));
  EXPECT_EQ(theta_chain(tv(3, 3, 1, 3, 2), 6), tv(6, 3, 1, 6, 2));
}

TEST(Theta, IsEntryEmbedding) {
  // θ moves entry (i,j) to (σi, σj) with σ(1)=1, σ(k)=k+1
  std::mt19937_64 rng(5);
  for (auto [n, p] : {std::pair{4, 2u}, {6, 3u}, {7, 5u}}) {
    UtGroup g({Family::UT, n - 1, p, 1});
    for (int trial = 0; trial < 500; ++trial) {
      auto x = g.random_element(rng);
      UtMatrix y(n, p);
      for (auto& e : x.entries()) y.set(e.i == 1 ? 1 : e.i + 1, e.j + 1, e.value);
      ASSERT_EQ(theta_apply(x), y);
    }
  }
}

TEST(Theta, EmbeddingVerified) {
  for (int n : {3, 4, 5})
    for (std::uint32_t p : {2u, 3u}) {
      auto th = theta_embedding(n, p);
      EXPECT_EQ(th.image_of_corner, tv(n, p, 1, n, 1));
      if (n == 4) {
        EXPECT_TRUE(th.table_map.has_value());
      }
    }
}

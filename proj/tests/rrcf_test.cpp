#include "mvgad/rrcf.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mvgad/error.hpp"

using namespace mvgad;
using namespace mvgad::rrcf;

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

std::vector<gnn::SnapshotEmbedding> series(std::initializer_list<DenseVector> zs) {
  std::vector<gnn::SnapshotEmbedding> out;
  std::int64_t t = 0;
  for (const auto& z : zs) out.push_back({t++, z});
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST(Shingle, Examples) {
  auto s = series({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
  auto one = shingle(s, 1);
  ASSERT_EQ(one.size(), 3u);
  EXPECT_EQ(one[1], (DenseVector{3.0, 4.0}));
  auto two = shingle(s, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], (DenseVector{1.0, 2.0, 3.0, 4.0}));
  EXPECT_EQ(two[1], (DenseVector{3.0, 4.0, 5.0, 6.0}));
  EXPECT_EQ(code_of([&] { shingle(s, 4); }), ErrorCode::SeriesTooShort);
}

TEST(RCTree, InsertIntoEmptyAndDuplicate) {
  RCTree t(1);
  t.insert_point(DenseVector{1.0, 2.0}, 0);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.node_count(), 1u);
  EXPECT_EQ(t.codisp(0), 0.0);
  RCTree before = t;
  t.insert_point(DenseVector{1.0, 2.0}, 1);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.leaf_multiplicity(1), 2u);
  EXPECT_EQ(t.node_count(), 1u);
  t.forget_point(1);
  EXPECT_EQ(t.leaf_multiplicity(0), 1u);
  EXPECT_TRUE(t.structurally_equal(before));
  t.forget_point(0);
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(t.node_count(), 0u);
}

TEST(RCTree, Errors) {
  RCTree t(1);
  EXPECT_EQ(code_of([&] { t.forget_point(3); }), ErrorCode::UnknownPoint);
  EXPECT_EQ(code_of([&] { t.codisp(3); }), ErrorCode::UnknownPoint);
  t.insert_point(DenseVector{1.0, 2.0}, 0);
  EXPECT_EQ(code_of([&] { t.insert_point(DenseVector{1.0}, 1); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { t.insert_point(DenseVector{3.0, 2.0}, 0); }), ErrorCode::DuplicatePoint);
}

TEST(RCTree, TwoLeavesHaveUnitCodisp) {
  RCTree t(4);
  t.insert_point(DenseVector{0.0, 0.0}, 0);
  t.insert_point(DenseVector{1.0, 5.0}, 1);
  EXPECT_EQ(t.codisp(0), 1.0);
  EXPECT_EQ(t.codisp(1), 1.0);
  EXPECT_TRUE(t.check_invariants());
}

TEST(RCTree, DuplicatesNeverOutscoreOutlier) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RCTree t(seed);
    for (PointId i = 0; i < 10; ++i) t.insert_point(DenseVector{0.5, -0.25, 1.0}, i);
    t.insert_point(DenseVector{4.0, 3.0, -2.0}, 10);
    EXPECT_EQ(t.codisp(10), 10.0);
    for (PointId i = 0; i < 10; ++i) EXPECT_LT(t.codisp(i), t.codisp(10));
    EXPECT_DOUBLE_EQ(t.codisp(0), 0.1);
  }
}

TEST(RCTree, CutDimensionFollowsSideLengths) {
  // Box after adding the third point has sides (3, 1).
  std::size_t dim0 = 0;
  const std::size_t trials = 2000;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    RCTree t(seed);
    t.insert_point(DenseVector{0.0, 0.0}, 0);
    t.insert_point(DenseVector{0.0, 1.0}, 1);
    t.insert_point(DenseVector{3.0, 0.5}, 2);
    dim0 += t.root_cut()->dim == 0;
    ASSERT_TRUE(t.check_invariants());
  }
  EXPECT_NEAR(static_cast<double>(dim0) / trials, 0.75, 0.03);
}

TEST(DrawCut, UniformWithinTheChosenSide) {
  Rng rng(3);
  const DenseVector lo{0.0, 10.0, 5.0}, hi{2.0, 10.0, 6.0};
  std::size_t counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) {
    auto c = draw_cut(lo, hi, rng);
    ++counts[c.dim];
    EXPECT_GE(c.value, lo[c.dim]);
    EXPECT_LE(c.value, hi[c.dim]);
  }
  EXPECT_EQ(counts[1], 0u);
  EXPECT_NEAR(counts[0] / 30000.0, 2.0 / 3.0, 0.015);
}

TEST(RCTree, InsertForgetIsInverse) {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 3);
  for (int seq = 0; seq < 1000; ++seq) {
    RCTree t(seq, 64);
    const int len = 1 + seq % 40;
    std::vector<DenseVector> pts;
    for (int i = 0; i < len; ++i) {
      // some repeated points so duplicate leaves get exercised
      DenseVector p = (i > 0 && small(gen) == 0) ? pts[gen() % pts.size()]
                                                 : DenseVector{nd(gen), nd(gen), nd(gen)};
      pts.push_back(p);
      RCTree before = t;
      t.insert_point(p, i);
      ASSERT_TRUE(t.check_invariants());
      RCTree after = t;
      t.forget_point(i);
      ASSERT_TRUE(t.structurally_equal(before)) << "sequence " << seq << " step " << i;
      ASSERT_TRUE(t.check_invariants());
      t = after;
    }
    for (int i = len - 1; i >= 0; --i) t.forget_point(i);
    EXPECT_TRUE(t.empty());
    EXPECT_EQ(t.node_count(), 0u);
  }
}

TEST(RCTree, SlidingWindowEvictsOldest) {
  RCTree t(5, 4);
  for (PointId i = 0; i < 10; ++i) {
    t.insert_point(DenseVector{static_cast<double>(i * i), 1.0}, i);
    EXPECT_LE(t.size(), 4u);
    EXPECT_TRUE(t.check_invariants());
  }
  for (PointId i = 0; i < 6; ++i) EXPECT_FALSE(t.contains(i));
  for (PointId i = 6; i < 10; ++i) EXPECT_TRUE(t.contains(i));
  EXPECT_EQ(t.node_count(), 7u);
}

TEST(Forest, SeedsDistinctAndDeterministic) {
  ForestSettings s;
  s.trees = 40;
  s.seed = 12;
  RCForest f(s), g(s);
  EXPECT_EQ(f.tree_seeds(), g.tree_seeds());
  std::set<std::uint64_t> uniq(f.tree_seeds().begin(), f.tree_seeds().end());
  EXPECT_EQ(uniq.size(), 40u);

  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<DenseVector> pts(60);
  for (auto& p : pts) p = {nd(gen), nd(gen)};
  auto a = score_series(f, pts);
  auto b = score_series(g, pts);
  EXPECT_EQ(a.scores, b.scores);
  for (double v : a.scores) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
  }
}

TEST(Forest, ConstantSeriesScoresEqual) {
  ForestSettings s;
  s.trees = 10;
  RCForest f(s);
  std::vector<DenseVector> pts(30, DenseVector{1.0, 2.0});
  auto r = score_series(f, pts);
  for (std::size_t i = 1; i < r.scores.size(); ++i) EXPECT_EQ(r.scores[i], r.scores[0]);
  EXPECT_LE(r.scores[0], 1.0);
}

TEST(Forest, SingleTreeMatchesTree) {
  ForestSettings s;
  s.trees = 1;
  s.seed = 9;
  RCForest f(s);
  RCTree t(f.tree_seeds()[0], s.capacity);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<DenseVector> pts(25);
  for (auto& p : pts) p = {nd(gen), nd(gen)};
  auto r = score_series(f, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.insert_point(pts[i], i);
    EXPECT_EQ(r.scores[i], t.codisp(i));
  }
}

TEST(Forest, SpikeIsTheArgmax) {
  // one spike in a constant series, shingle size 1
  std::size_t hits = 0;
  for (std::uint64_t set = 0; set < 100; ++set) {
    std::vector<gnn::SnapshotEmbedding> s;
    const std::size_t spike = 20 + set % 50;
    for (std::int64_t t = 0; t < 100; ++t)
      s.push_back({t, static_cast<std::size_t>(t) == spike ? DenseVector{5.0, -3.0} : DenseVector{0.2, 0.1}});
    ForestSettings fs;
    fs.trees = 20;
    fs.shingle = 1;
    fs.seed = set;
    auto r = score_embeddings(s, fs);
    hits += argmax(r.scores) == spike;
  }
  EXPECT_GE(hits, 95u);
}

TEST(Forest, WarmupIsZeroAndAligned) {
  std::vector<gnn::SnapshotEmbedding> s;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::int64_t t = 10; t < 30; ++t) s.push_back({t, DenseVector{nd(gen), nd(gen)}});
  ForestSettings fs;
  fs.trees = 5;
  fs.shingle = 4;
  auto r = score_embeddings(s, fs);
  ASSERT_EQ(r.scores.size(), 20u);
  EXPECT_EQ(r.timestamps.front(), 10);
  EXPECT_EQ(r.timestamps.back(), 29);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(r.scores[i], 0.0);
  EXPECT_EQ(r.scores[3], 0.0);  // first shingle lands in empty trees
  for (int i = 4; i < 20; ++i) EXPECT_GT(r.scores[i], 0.0);
}

TEST(Forest, MedianAggregation) {
  ForestSettings s;
  s.trees = 3;
  s.aggregation = Aggregation::median;
  RCForest f(s);
  std::vector<DenseVector> pts{{0.0}, {1.0}, {5.0}, {0.5}};
  auto r = score_series(f, pts);
  EXPECT_EQ(r.scores[1], 1.0);
  EXPECT_EQ(parse_aggregation("median"), Aggregation::median);
  EXPECT_FALSE(parse_aggregation("max"));
}

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mvgad/gnn.hpp"
#include "mvgad/matrix.hpp"
#include "mvgad/rng.hpp"

namespace mvgad::rrcf {

using PointId = std::uint64_t;

struct Cut {
  std::size_t dim = 0;
  double value = 0.0;
};

// Dimension drawn with probability proportional to hi - lo, value uniform on
// that side. The box must have positive extent in some dimension.
Cut draw_cut(std::span<const double> lo, std::span<const double> hi, Rng& rng);

// One random cut tree over a sliding window of at most `capacity` points.
// A point goes left when p[dim] <= cut.
class RCTree {
 public:
  explicit RCTree(std::uint64_t seed, std::size_t capacity = 256);

  // At capacity the oldest stored point is forgotten first.
  void insert_point(std::span<const double> p, PointId id);
  void forget_point(PointId id);
  double codisp(PointId id) const;

  bool contains(PointId id) const { return leaf_of_.count(id) != 0; }
  bool empty() const { return root_ < 0; }
  // Stored points, duplicates counted.
  std::size_t size() const { return order_.size(); }
  std::size_t leaf_count() const;
  // Live pool nodes (internal + leaves).
  std::size_t node_count() const { return nodes_.size() - free_.size(); }
  std::size_t dimension() const { return dim_; }
  std::size_t capacity() const { return capacity_; }
  std::optional<Cut> root_cut() const;
  // Duplicate count of the leaf holding `id`.
  std::size_t leaf_multiplicity(PointId id) const;

  // Same shape, cuts, boxes, counts and leaf contents. Pool layout and RNG
  // state are ignored.
  bool structurally_equal(const RCTree& other) const;

  // Checks every internal invariant; false on the first violation.
  bool check_invariants() const;

 private:
  struct Node {
    bool leaf = false;
    int parent = -1;
    int left = -1;
    int right = -1;
    Cut cut;
    std::vector<double> lo, hi;
    std::size_t count = 0;
    std::vector<PointId> ids;  // leaves only, insertion order
  };

  int allocate();
  void release(int k);
  int make_leaf(std::span<const double> p, PointId id);
  void refresh_upward(int k);
  void bump_counts(int k, long delta);
  bool equal_subtree(int a, const RCTree& other, int b) const;
  bool check_subtree(int k, std::size_t& leaves) const;

  std::vector<Node> nodes_;
  std::vector<int> free_;
  int root_ = -1;
  std::size_t dim_ = 0;
  std::size_t capacity_;
  Rng rng_;
  std::unordered_map<PointId, int> leaf_of_;
  std::deque<PointId> order_;
};

enum class Aggregation { mean, median };

struct ForestSettings {
  std::size_t trees = 40;
  std::size_t capacity = 256;
  std::size_t shingle = 4;
  Aggregation aggregation = Aggregation::mean;
  std::uint64_t seed = 0;
};

class RCForest {
 public:
  explicit RCForest(const ForestSettings& settings);

  const ForestSettings& settings() const { return settings_; }
  const std::vector<std::uint64_t>& tree_seeds() const { return seeds_; }
  std::vector<RCTree>& trees() { return trees_; }
  const std::vector<RCTree>& trees() const { return trees_; }

 private:
  ForestSettings settings_;
  std::vector<std::uint64_t> seeds_;
  std::vector<RCTree> trees_;
};

struct ScoreSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> scores;
};

// output[i] = z_i || z_{i+1} || ... || z_{i+w-1}.
std::vector<DenseVector> shingle(const std::vector<gnn::SnapshotEmbedding>& series,
                                 std::size_t w);

// Streams the points through every tree; each score is the aggregated CoDisp
// right after insertion. Timestamps are 0, 1, ...
ScoreSeries score_series(RCForest& forest, const std::vector<DenseVector>& points);

// shingle + fresh forest + score_series, aligned to the embedding timestamps
// with zeros for the first w - 1 steps.
ScoreSeries score_embeddings(const std::vector<gnn::SnapshotEmbedding>& series,
                             const ForestSettings& settings);

std::string_view to_string(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view name);

}  // namespace mvgad::rrcf

#include "mvgad/rrcf.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "mvgad/error.hpp"

namespace mvgad::rrcf {

Cut draw_cut(std::span<const double> lo, std::span<const double> hi, Rng& rng) {
  std::vector<double> sides(lo.size());
  double total = 0.0;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    sides[j] = hi[j] - lo[j];
    total += sides[j];
  }
  if (!(total > 0.0)) fail(ErrorCode::DegeneratePartition, "cannot cut a zero-volume box");
  double r = rng.uniform() * total;
  std::size_t dim = 0;
  for (std::size_t j = 0; j < sides.size(); ++j) {
    if (sides[j] <= 0.0) continue;
    dim = j;
    if (r < sides[j]) break;
    r -= sides[j];
  }
  return {dim, lo[dim] + std::min(r, sides[dim])};
}

RCTree::RCTree(std::uint64_t seed, std::size_t capacity) : capacity_(capacity), rng_(seed) {
  if (capacity == 0) fail(ErrorCode::InvalidConfig, "tree capacity must be >= 1");
}

int RCTree::allocate() {
  if (!free_.empty()) {
    const int k = free_.back();
    free_.pop_back();
    nodes_[k] = Node{};
    return k;
  }
  nodes_.emplace_back();
  return static_cast<int>(nodes_.size() - 1);
}

void RCTree::release(int k) {
  nodes_[k] = Node{};
  free_.push_back(k);
}

int RCTree::make_leaf(std::span<const double> p, PointId id) {
  const int k = allocate();
  Node& n = nodes_[k];
  n.leaf = true;
  n.lo.assign(p.begin(), p.end());
  n.hi = n.lo;
  n.count = 1;
  n.ids.push_back(id);
  leaf_of_[id] = k;
  return k;
}

void RCTree::refresh_upward(int k) {
  for (; k >= 0; k = nodes_[k].parent) {
    Node& n = nodes_[k];
    if (n.leaf) continue;
    const Node& l = nodes_[n.left];
    const Node& r = nodes_[n.right];
    n.count = l.count + r.count;
    for (std::size_t j = 0; j < dim_; ++j) {
      n.lo[j] = std::min(l.lo[j], r.lo[j]);
      n.hi[j] = std::max(l.hi[j], r.hi[j]);
    }
  }
}

void RCTree::bump_counts(int k, long delta) {
  for (; k >= 0; k = nodes_[k].parent) {
    nodes_[k].count = static_cast<std::size_t>(static_cast<long>(nodes_[k].count) + delta);
  }
}

void RCTree::insert_point(std::span<const double> p, PointId id) {
  if (contains(id)) fail(ErrorCode::DuplicatePoint, "point id " + std::to_string(id) + " already stored");
  for (double v : p) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "non-finite coordinate");
  }
  if (empty() && order_.empty()) {
    if (p.empty()) fail(ErrorCode::DimensionMismatch, "points need at least one dimension");
    dim_ = p.size();
  }
  if (p.size() != dim_) {
    fail(ErrorCode::DimensionMismatch, "point has " + std::to_string(p.size()) +
                                           " dimensions, tree holds " + std::to_string(dim_));
  }
  if (order_.size() >= capacity_) forget_point(order_.front());
  order_.push_back(id);

  if (empty()) {
    root_ = make_leaf(p, id);
    return;
  }

  // exact duplicate: follow the cuts to the only leaf it could equal
  {
    int k = root_;
    while (!nodes_[k].leaf) {
      const Node& n = nodes_[k];
      k = p[n.cut.dim] <= n.cut.value ? n.left : n.right;
    }
    if (std::equal(p.begin(), p.end(), nodes_[k].lo.begin())) {
      nodes_[k].ids.push_back(id);
      leaf_of_[id] = k;
      bump_counts(k, +1);
      return;
    }
  }

  std::vector<double> lo(dim_), hi(dim_);
  int k = root_;
  for (;;) {
    const Node& n = nodes_[k];
    for (std::size_t j = 0; j < dim_; ++j) {
      lo[j] = std::min(n.lo[j], p[j]);
      hi[j] = std::max(n.hi[j], p[j]);
    }
    const Cut c = draw_cut(lo, hi, rng_);
    const bool left_of = p[c.dim] <= c.value && c.value < n.lo[c.dim];
    const bool right_of = n.hi[c.dim] <= c.value && c.value < p[c.dim];
    if (left_of || right_of) {
      const int parent = nodes_[k].parent;
      const int leaf = make_leaf(p, id);
      const int branch = allocate();
      Node& b = nodes_[branch];
      b.cut = c;
      b.left = left_of ? leaf : k;
      b.right = left_of ? k : leaf;
      b.parent = parent;
      b.lo = lo;
      b.hi = hi;
      nodes_[leaf].parent = branch;
      nodes_[k].parent = branch;
      if (parent < 0) {
        root_ = branch;
      } else if (nodes_[parent].left == k) {
        nodes_[parent].left = branch;
      } else {
        nodes_[parent].right = branch;
      }
      refresh_upward(branch);
      return;
    }
    if (!nodes_[k].leaf) {
      const Node& m = nodes_[k];
      k = p[m.cut.dim] <= m.cut.value ? m.left : m.right;
    }
    // at a leaf the failed draw landed on its coordinate exactly; draw again
  }
}

void RCTree::forget_point(PointId id) {
  auto it = leaf_of_.find(id);
  if (it == leaf_of_.end()) fail(ErrorCode::UnknownPoint, "point id " + std::to_string(id) + " not stored");
  const int k = it->second;
  leaf_of_.erase(it);
  order_.erase(std::find(order_.begin(), order_.end(), id));
  Node& leaf = nodes_[k];
  if (leaf.ids.size() > 1) {
    leaf.ids.erase(std::find(leaf.ids.begin(), leaf.ids.end(), id));
    bump_counts(k, -1);
    return;
  }
  const int parent = leaf.parent;
  release(k);
  if (parent < 0) {
    root_ = -1;
    return;
  }
  const int sibling = nodes_[parent].left == k ? nodes_[parent].right : nodes_[parent].left;
  const int grand = nodes_[parent].parent;
  nodes_[sibling].parent = grand;
  release(parent);
  if (grand < 0) {
    root_ = sibling;
    return;
  }
  if (nodes_[grand].left == parent) {
    nodes_[grand].left = sibling;
  } else {
    nodes_[grand].right = sibling;
  }
  refresh_upward(grand);
}

double RCTree::codisp(PointId id) const {
  auto it = leaf_of_.find(id);
  if (it == leaf_of_.end()) fail(ErrorCode::UnknownPoint, "point id " + std::to_string(id) + " not stored");
  double best = 0.0;
  for (int k = it->second; nodes_[k].parent >= 0; k = nodes_[k].parent) {
    const Node& par = nodes_[nodes_[k].parent];
    const int sibling = par.left == k ? par.right : par.left;
    best = std::max(best, static_cast<double>(nodes_[sibling].count) /
                              static_cast<double>(nodes_[k].count));
  }
  return best;
}

std::size_t RCTree::leaf_count() const {
  std::set<int> leaves;
  for (const auto& [id, k] : leaf_of_) leaves.insert(k);
  return leaves.size();
}

std::optional<Cut> RCTree::root_cut() const {
  if (empty() || nodes_[root_].leaf) return std::nullopt;
  return nodes_[root_].cut;
}

std::size_t RCTree::leaf_multiplicity(PointId id) const {
  auto it = leaf_of_.find(id);
  if (it == leaf_of_.end()) fail(ErrorCode::UnknownPoint, "point id " + std::to_string(id) + " not stored");
  return nodes_[it->second].count;
}

bool RCTree::equal_subtree(int a, const RCTree& other, int b) const {
  const Node& x = nodes_[a];
  const Node& y = other.nodes_[b];
  if (x.leaf != y.leaf || x.count != y.count || x.lo != y.lo || x.hi != y.hi) return false;
  if (x.leaf) return x.ids == y.ids;
  if (x.cut.dim != y.cut.dim || x.cut.value != y.cut.value) return false;
  return equal_subtree(x.left, other, y.left) && equal_subtree(x.right, other, y.right);
}

bool RCTree::structurally_equal(const RCTree& other) const {
  if (empty() || other.empty()) return empty() == other.empty();
  return equal_subtree(root_, other, other.root_);
}

bool RCTree::check_subtree(int k, std::size_t& leaves) const {
  const Node& n = nodes_[k];
  if (n.leaf) {
    ++leaves;
    if (n.count != n.ids.size() || n.lo != n.hi) return false;
    for (PointId id : n.ids) {
      auto it = leaf_of_.find(id);
      if (it == leaf_of_.end() || it->second != k) return false;
    }
    // reachable by following the cuts from the root
    int r = root_;
    while (!nodes_[r].leaf) r = n.lo[nodes_[r].cut.dim] <= nodes_[r].cut.value ? nodes_[r].left : nodes_[r].right;
    return r == k;
  }
  const Node& l = nodes_[n.left];
  const Node& r = nodes_[n.right];
  if (l.parent != k || r.parent != k) return false;
  if (n.count != l.count + r.count) return false;
  for (std::size_t j = 0; j < dim_; ++j) {
    if (n.lo[j] != std::min(l.lo[j], r.lo[j]) || n.hi[j] != std::max(l.hi[j], r.hi[j])) return false;
  }
  // the cut splits the box: left side <= cut < right side
  if (!(l.hi[n.cut.dim] <= n.cut.value && n.cut.value < r.lo[n.cut.dim])) return false;
  return check_subtree(n.left, leaves) && check_subtree(n.right, leaves);
}

bool RCTree::check_invariants() const {
  if (empty()) return leaf_of_.empty() && order_.empty() && node_count() == 0;
  std::size_t leaves = 0;
  if (nodes_[root_].parent != -1 || !check_subtree(root_, leaves)) return false;
  return node_count() == 2 * leaves - 1 && nodes_[root_].count == order_.size() &&
         order_.size() <= capacity_ && leaves == leaf_count();
}

RCForest::RCForest(const ForestSettings& settings) : settings_(settings) {
  if (settings.trees == 0) fail(ErrorCode::InvalidConfig, "forest needs at least one tree");
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < settings.trees; ++i) {
    std::uint64_t s = derive_seed(settings.seed, "rrcf", i);
    while (!seen.insert(s).second) s = splitmix64(s);
    seeds_.push_back(s);
    trees_.emplace_back(s, settings.capacity);
  }
}

std::vector<DenseVector> shingle(const std::vector<gnn::SnapshotEmbedding>& series,
                                 std::size_t w) {
  if (w == 0) fail(ErrorCode::InvalidConfig, "shingle size must be >= 1");
  if (series.size() < w) {
    fail(ErrorCode::SeriesTooShort, "series of length " + std::to_string(series.size()) +
                                        " is shorter than shingle size " + std::to_string(w));
  }
  std::vector<DenseVector> out;
  for (std::size_t i = 0; i + w <= series.size(); ++i) {
    DenseVector v;
    for (std::size_t k = i; k < i + w; ++k) {
      if (series[k].z.size() != series[i].z.size()) {
        fail(ErrorCode::DimensionMismatch, "embeddings in the series differ in length");
      }
      v.insert(v.end(), series[k].z.begin(), series[k].z.end());
    }
    out.push_back(std::move(v));
  }
  return out;
}

ScoreSeries score_series(RCForest& forest, const std::vector<DenseVector>& points) {
  ScoreSeries out;
  std::vector<double> per_tree(forest.trees().size());
  for (std::size_t t = 0; t < points.size(); ++t) {
    for (std::size_t i = 0; i < forest.trees().size(); ++i) {
      auto& tree = forest.trees()[i];
      tree.insert_point(points[t], t);
      per_tree[i] = tree.codisp(t);
    }
    double score = 0.0;
    if (forest.settings().aggregation == Aggregation::mean) {
      for (double v : per_tree) score += v;
      score /= static_cast<double>(per_tree.size());
    } else {
      std::vector<double> sorted = per_tree;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t m = sorted.size();
      score = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    }
    out.timestamps.push_back(static_cast<std::int64_t>(t));
    out.scores.push_back(score);
  }
  return out;
}

ScoreSeries score_embeddings(const std::vector<gnn::SnapshotEmbedding>& series,
                             const ForestSettings& settings) {
  const auto points = shingle(series, settings.shingle);
  RCForest forest(settings);
  const ScoreSeries raw = score_series(forest, points);
  ScoreSeries out;
  for (const auto& e : series) out.timestamps.push_back(e.t);
  out.scores.assign(settings.shingle - 1, 0.0);
  out.scores.insert(out.scores.end(), raw.scores.begin(), raw.scores.end());
  return out;
}

std::string_view to_string(Aggregation a) { return a == Aggregation::mean ? "mean" : "median"; }

std::optional<Aggregation> parse_aggregation(std::string_view name) {
  if (name == "mean") return Aggregation::mean;
  if (name == "median") return Aggregation::median;
  return std::nullopt;
}

}  // namespace mvgad::rrcf

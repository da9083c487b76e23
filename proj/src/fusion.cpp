#include "mvgad/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvgad/error.hpp"
#include "mvgad/rng.hpp"

namespace mvgad::fusion {

DenseMatrix FullFeatureSpace::slice(std::size_t view) const {
  if (view + 1 >= view_boundaries.size()) {
    fail(ErrorCode::DimensionMismatch, "view index out of range");
  }
  return x.columns(view_boundaries[view],
                   view_boundaries[view + 1] - view_boundaries[view]);
}

FullFeatureSpace build_full_space(const std::vector<ViewFeatureSpace>& views) {
  if (views.size() < 2) {
    fail(ErrorCode::FewerThanTwoViews,
         "a full feature space needs at least 2 views, got " +
             std::to_string(views.size()));
  }
  const std::size_t m = views.front().x.rows();
  std::size_t total = 0;
  FullFeatureSpace full;
  full.view_boundaries.push_back(0);
  for (const auto& v : views) {
    if (v.x.rows() != m) {
      fail(ErrorCode::SampleCountMismatch,
           "view '" + v.view_id + "' has " + std::to_string(v.x.rows()) +
               " samples, expected " + std::to_string(m));
    }
    total += v.x.cols();
    full.view_boundaries.push_back(total);
  }
  full.x = DenseMatrix(m, total);
  for (std::size_t k = 0; k < views.size(); ++k) {
    const std::size_t off = full.view_boundaries[k];
    for (std::size_t i = 0; i < m; ++i) {
      auto src = views[k].x.row(i);
      std::copy(src.begin(), src.end(), full.x.row(i).begin() + off);
    }
  }
  return full;
}

MembershipMatrix membership(const spectral::ClusterAssignment& assignment,
                            const DenseMatrix& y, std::string source) {
  if (y.rows() != assignment.labels.size()) {
    fail(ErrorCode::DimensionMismatch,
         "embedding has " + std::to_string(y.rows()) + " rows but the assignment " +
             std::to_string(assignment.labels.size()));
  }
  if (y.cols() != assignment.centroids.cols()) {
    fail(ErrorCode::DimensionMismatch, "embedding and centroid dimensions differ");
  }
  const std::size_t k = assignment.centroids.rows();
  MembershipMatrix out{DenseMatrix(y.rows(), k), std::move(source)};
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto row = out.mu.row(i);
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      row[c] = 1.0 / (squared_distance(y.row(i), assignment.centroids.row(c)) +
                      kMembershipEpsilon);
      total += row[c];
    }
    for (double& v : row) v /= total;
  }
  return out;
}

DenseMatrix co_membership(const MembershipMatrix& mu) {
  const std::size_t m = mu.mu.rows();
  const std::size_t k = mu.mu.cols();
  DenseMatrix out(m, m);
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      for (std::size_t c = 0; c < k; ++c) terms[c] = mu.mu(i, c) * mu.mu(j, c);
      const double v = std::clamp(order_invariant_sum(terms), 0.0, 1.0);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

namespace {

// Average |a[i][j] - b[i][j]| over j != i.
std::vector<double> row_disagreement(const DenseMatrix& a, const DenseMatrix& b) {
  const std::size_t m = a.rows();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) s += std::abs(a(i, j) - b(i, j));
    }
    out[i] = s / static_cast<double>(m - 1);
  }
  return out;
}

}  // namespace

ConsistencyScore consistency_score(const std::vector<MembershipMatrix>& views,
                                   const MembershipMatrix& full, ScoreMode mode) {
  if (views.size() < 2) {
    fail(ErrorCode::FewerThanTwoViews, "consistency scoring needs at least 2 views");
  }
  const std::size_t m = full.mu.rows();
  for (const auto& v : views) {
    if (v.mu.rows() != m) {
      fail(ErrorCode::SampleCountMismatch,
           "membership '" + v.source + "' has " + std::to_string(v.mu.rows()) +
               " samples, expected " + std::to_string(m));
    }
  }
  if (m < 2) fail(ErrorCode::EmptyInput, "consistency scoring needs at least 2 samples");

  std::vector<DenseMatrix> co;
  co.reserve(views.size());
  for (const auto& v : views) co.push_back(co_membership(v));

  ConsistencyScore out;
  out.mode = mode;
  out.scores.assign(m, 0.0);
  std::size_t terms = 0;
  auto accumulate = [&](const DenseMatrix& a, const DenseMatrix& b) {
    auto d = row_disagreement(a, b);
    for (std::size_t i = 0; i < m; ++i) out.scores[i] += d[i];
    ++terms;
  };
  if (mode == ScoreMode::vs_full) {
    const DenseMatrix co_full = co_membership(full);
    for (const auto& c : co) accumulate(co_full, c);
  } else {
    for (std::size_t v = 0; v < co.size(); ++v)
      for (std::size_t w = v + 1; w < co.size(); ++w) accumulate(co[v], co[w]);
  }
  for (double& s : out.scores) s /= static_cast<double>(terms);
  return out;
}

FusionResult score_views(const std::vector<ViewFeatureSpace>& views,
                         const FusionSettings& settings) {
  FusionResult out;
  out.full = build_full_space(views);
  std::vector<MembershipMatrix> view_mu;
  view_mu.reserve(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    auto sc = spectral::spectral_cluster_detailed(views[v].x, settings.k,
                                                  settings.algorithm, settings.sigma,
                                                  derive_seed(settings.seed, "fusion", v));
    view_mu.push_back(membership(sc.assignment, sc.embedding.u, views[v].view_id));
    out.view_assignments.push_back(std::move(sc.assignment));
  }
  auto full_sc = spectral::spectral_cluster_detailed(
      out.full.x, settings.k, settings.algorithm, settings.sigma,
      derive_seed(settings.seed, "fusion", views.size()));
  const MembershipMatrix full_mu = membership(full_sc.assignment, full_sc.embedding.u, "full");
  out.full_assignment = std::move(full_sc.assignment);
  out.score = consistency_score(view_mu, full_mu, settings.mode);
  return out;
}

std::string_view to_string(ScoreMode mode) {
  return mode == ScoreMode::vs_full ? "vs_full" : "pairwise";
}

std::optional<ScoreMode> parse_score_mode(std::string_view name) {
  if (name == "vs_full") return ScoreMode::vs_full;
  if (name == "pairwise") return ScoreMode::pairwise;
  return std::nullopt;
}

}  // namespace mvgad::fusion

#include "mvgad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mvgad/error.hpp"
#include "mvgad/numerics.hpp"
#include "mvgad/rng.hpp"

namespace mvgad::spectral {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_positive_degrees(const DenseVector& deg) {
  for (std::size_t i = 0; i < deg.size(); ++i) {
    if (!(deg[i] > 0.0)) {
      fail(ErrorCode::IsolatedNode,
           "node " + std::to_string(i) + " has zero degree");
    }
  }
}

// D^-1/2 W D^-1/2
DenseMatrix normalized_affinity(const SimilarityGraph& g, const DenseVector& deg) {
  const std::size_t n = g.size();
  DenseVector inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
  DenseMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = inv_sqrt[i] * g.w(i, j) * inv_sqrt[j];
  return s;
}

// Turns an eigenvector u of D^-1/2 W D^-1/2 into the matching eigenvector of
// P = D^-1 W, normalized and sign-fixed like sym_eig output.
DenseVector to_random_walk_vector(std::span<const double> u, const DenseVector& deg) {
  DenseVector v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] / std::sqrt(deg[i]);
  const double nrm = norm2(v);
  double sign = 1.0;
  for (double x : v) {
    if (std::abs(x) / nrm > 1e-12) {
      sign = x < 0 ? -1.0 : 1.0;
      break;
    }
  }
  for (double& x : v) x = sign * x / nrm;
  return v;
}

std::vector<int> assign_nearest(const DenseMatrix& y, const DenseMatrix& centroids,
                                std::vector<double>* dist2 = nullptr) {
  std::vector<int> labels(y.rows());
  if (dist2) dist2->assign(y.rows(), 0.0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = squared_distance(y.row(i), centroids.row(c));
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    labels[i] = best_c;
    if (dist2) (*dist2)[i] = best;
  }
  return labels;
}

double inertia_of(const DenseMatrix& y, const DenseMatrix& centroids,
                  const std::vector<int>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    s += squared_distance(y.row(i), centroids.row(labels[i]));
  }
  return s;
}

// Gives every empty cluster the point farthest from its own centroid, taken
// from clusters that can spare one.
void repair_empty_clusters(const DenseMatrix& y, DenseMatrix& centroids,
                           std::vector<int>& labels) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) ++counts[l];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    double far = -1.0;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < y.rows(); ++i) {
      if (counts[labels[i]] <= 1) continue;
      const double d = squared_distance(y.row(i), centroids.row(labels[i]));
      if (d > far) {
        far = d;
        pick = i;
      }
    }
    --counts[labels[pick]];
    labels[pick] = static_cast<int>(c);
    ++counts[c];
    std::copy(y.row(pick).begin(), y.row(pick).end(), centroids.row(c).begin());
  }
}

DenseMatrix centroid_means(const DenseMatrix& y, const std::vector<int>& labels,
                           std::size_t k) {
  DenseMatrix c(k, y.cols());
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    auto row = c.row(labels[i]);
    auto src = y.row(i);
    for (std::size_t j = 0; j < y.cols(); ++j) row[j] += src[j];
    counts[labels[i]] += 1.0;
  }
  for (std::size_t r = 0; r < k; ++r)
    for (double& v : c.row(r)) v /= counts[r];
  return c;
}

}  // namespace

SimilarityGraph similarity_matrix(const DenseMatrix& x, std::optional<double> sigma) {
  const std::size_t n = x.rows();
  if (n < 2) fail(ErrorCode::EmptyInput, "similarity_matrix needs at least 2 samples");
  require_finite(x, "similarity_matrix input");
  if (sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) {
    fail(ErrorCode::InvalidConfig, "sigma must be positive and finite");
  }
  DenseMatrix d2(n, n);
  std::vector<double> positive;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = squared_distance(x.row(i), x.row(j));
      d2(i, j) = v;
      d2(j, i) = v;
      if (v > 0.0) positive.push_back(std::sqrt(v));
    }
  }
  double s = 1.0;
  if (sigma) s = *sigma;
  else if (!positive.empty()) s = median(std::move(positive));

  SimilarityGraph g{DenseMatrix(n, n), s};
  const double denom = 2.0 * s * s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) g.w(i, j) = std::exp(-d2(i, j) / denom);
  return g;
}

SimilarityGraph graph_from_weights(DenseMatrix w) {
  if (w.rows() != w.cols()) fail(ErrorCode::DimensionMismatch, "weights not square");
  if (w.rows() < 2) fail(ErrorCode::EmptyInput, "graph needs at least 2 nodes");
  for (std::size_t i = 0; i < w.rows(); ++i) {
    if (w(i, i) != 0.0) fail(ErrorCode::InvalidGraph, "nonzero self-similarity");
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double v = w(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorCode::InvalidGraph, "similarity outside [0, 1]");
      }
      if (v != w(j, i)) fail(ErrorCode::NotSymmetric, "similarity not symmetric");
    }
  }
  return SimilarityGraph{std::move(w), 1.0};
}

DenseVector degrees(const SimilarityGraph& g) {
  DenseVector d(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (double v : g.w.row(i)) d[i] += v;
  return d;
}

DenseMatrix degree_matrix(const SimilarityGraph& g) {
  return DenseMatrix::diagonal(degrees(g));
}

DenseMatrix laplacian(const SimilarityGraph& g, LaplacianKind kind) {
  const std::size_t n = g.size();
  const DenseVector deg = degrees(g);
  DenseMatrix l(n, n);
  switch (kind) {
    case LaplacianKind::unnormalized:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) l(i, j) = -g.w(i, j);
        l(i, i) = deg[i] - g.w(i, i);
      }
      break;
    case LaplacianKind::symmetric: {
      require_positive_degrees(deg);
      DenseMatrix s = normalized_affinity(g, deg);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) l(i, j) = (i == j ? 1.0 : 0.0) - s(i, j);
      break;
    }
    case LaplacianKind::random_walk:
      require_positive_degrees(deg);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) l(i, j) = g.w(i, j) / deg[i];
      break;
  }
  return l;
}

SpectralEmbedding spectral_embed(const SimilarityGraph& g, std::size_t k,
                                 Algorithm algorithm) {
  const std::size_t n = g.size();
  if (k < 2) fail(ErrorCode::InvalidConfig, "spectral embedding needs k >= 2");
  if (k > n) {
    fail(ErrorCode::KTooLarge,
         "k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  }
  SpectralEmbedding emb;
  emb.k = k;
  emb.u = DenseMatrix(n, k);
  emb.eigenvalues.resize(k);

  switch (algorithm) {
    case Algorithm::basic: {
      auto eig = numerics::sym_eig(laplacian(g, LaplacianKind::unnormalized));
      emb.basis = EmbeddingBasis::unnormalized;
      for (std::size_t c = 0; c < k; ++c) {
        emb.eigenvalues[c] = eig.eigenvalues[c];
        for (std::size_t i = 0; i < n; ++i) emb.u(i, c) = eig.eigenvectors(i, c);
      }
      break;
    }
    case Algorithm::njw: {
      auto eig = numerics::sym_eig(laplacian(g, LaplacianKind::symmetric));
      emb.basis = EmbeddingBasis::symmetric;
      for (std::size_t c = 0; c < k; ++c) {
        emb.eigenvalues[c] = eig.eigenvalues[c];
        for (std::size_t i = 0; i < n; ++i) emb.u(i, c) = eig.eigenvectors(i, c);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double nrm = norm2(emb.u.row(i));
        if (nrm > 0.0)
          for (double& v : emb.u.row(i)) v /= nrm;
      }
      break;
    }
    case Algorithm::ms: {
      const DenseVector deg = degrees(g);
      require_positive_degrees(deg);
      auto eig = numerics::sym_eig(normalized_affinity(g, deg));
      emb.basis = EmbeddingBasis::rw_top;
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t src = n - 1 - c;
        emb.eigenvalues[c] = eig.eigenvalues[src];
        auto v = to_random_walk_vector(eig.eigenvectors.column(src), deg);
        for (std::size_t i = 0; i < n; ++i) emb.u(i, c) = v[i];
      }
      break;
    }
    case Algorithm::slh: {
      auto eig = numerics::sym_eig(g.w);
      emb.basis = EmbeddingBasis::affinity_top;
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t src = n - 1 - c;
        emb.eigenvalues[c] = eig.eigenvalues[src];
        for (std::size_t i = 0; i < n; ++i) emb.u(i, c) = eig.eigenvectors(i, src);
      }
      break;
    }
  }
  return emb;
}

ClusterAssignment kmeans(const DenseMatrix& y, std::size_t k, std::uint64_t seed) {
  const std::size_t n = y.rows();
  if (k < 1) fail(ErrorCode::InvalidConfig, "kmeans needs k >= 1");
  if (k > n) {
    fail(ErrorCode::KTooLarge,
         "k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  }
  require_finite(y, "kmeans input");
  Rng rng(seed);

  // k-means++ seeding.
  DenseMatrix centroids(k, y.cols());
  std::size_t first = rng.uniform_index(n);
  std::copy(y.row(first).begin(), y.row(first).end(), centroids.row(0).begin());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(y.row(i), centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    const std::size_t pick = rng.weighted_index(d2);
    std::copy(y.row(pick).begin(), y.row(pick).end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(y.row(i), centroids.row(c)));
  }

  ClusterAssignment out;
  std::vector<int> labels = assign_nearest(y, centroids);
  for (int iter = 0; iter < kMaxKmeansIterations; ++iter) {
    repair_empty_clusters(y, centroids, labels);
    centroids = centroid_means(y, labels, k);
    std::vector<int> next = assign_nearest(y, centroids);
    const bool changed = next != labels;
    labels = std::move(next);
    out.iterations = static_cast<std::size_t>(iter) + 1;
    out.inertia_trace.push_back(inertia_of(y, centroids, labels));
    // Stable labels make the next centroid shift exactly 0.
    if (!changed) break;
  }
  // A final repair keeps every cluster id in use even if the cap was hit.
  repair_empty_clusters(y, centroids, labels);

  // Canonical ids by first occurrence.
  std::vector<int> remap(k, -1);
  int next_id = 0;
  for (int& l : labels) {
    if (remap[l] < 0) remap[l] = next_id++;
    l = remap[l];
  }
  DenseMatrix ordered(k, y.cols());
  for (std::size_t c = 0; c < k; ++c) {
    if (remap[c] < 0) continue;
    std::copy(centroids.row(c).begin(), centroids.row(c).end(),
              ordered.row(remap[c]).begin());
  }
  out.labels = std::move(labels);
  out.centroids = std::move(ordered);
  out.inertia = inertia_of(y, out.centroids, out.labels);
  return out;
}

double cut_objective(const SimilarityGraph& g, const std::vector<bool>& partition,
                     CutObjective objective) {
  const std::size_t n = g.size();
  if (partition.size() != n) {
    fail(ErrorCode::DimensionMismatch, "partition length differs from node count");
  }
  double cut = 0.0, vol_a = 0.0, vol_b = 0.0;
  std::size_t size_a = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (partition[i]) ++size_a;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = g.w(i, j);
      (partition[i] ? vol_a : vol_b) += w;
      if (partition[i] && !partition[j]) cut += w;
    }
  }
  if (size_a == 0 || size_a == n) {
    fail(ErrorCode::DegeneratePartition, "a side of the partition is empty");
  }
  const double size_b = static_cast<double>(n - size_a);
  switch (objective) {
    case CutObjective::rcut:
      return cut / static_cast<double>(size_a) + cut / size_b;
    case CutObjective::ncut:
      if (!(vol_a > 0.0 && vol_b > 0.0)) fail(ErrorCode::ZeroVolume, "side with zero volume");
      return cut / vol_a + cut / vol_b;
    case CutObjective::mcut: {
      const double assoc_a = vol_a - cut;
      const double assoc_b = vol_b - cut;
      if (!(assoc_a > 0.0 && assoc_b > 0.0)) {
        fail(ErrorCode::ZeroVolume, "side with zero internal association");
      }
      return cut / assoc_a + cut / assoc_b;
    }
  }
  return 0.0;
}

namespace {

void require_connected(const SimilarityGraph& g) {
  auto eig = numerics::sym_eig(laplacian(g, LaplacianKind::unnormalized));
  if (!(eig.eigenvalues[1] > 1e-10)) {
    fail(ErrorCode::Disconnected,
         "graph is disconnected (second Laplacian eigenvalue " +
             std::to_string(eig.eigenvalues[1]) + ")");
  }
}

}  // namespace

DenseVector fiedler_vector(const SimilarityGraph& g, CutObjective objective) {
  require_connected(g);
  if (objective == CutObjective::rcut) {
    return numerics::sym_eig(laplacian(g, LaplacianKind::unnormalized))
        .eigenvectors.column(1);
  }
  const DenseVector deg = degrees(g);
  require_positive_degrees(deg);
  auto eig = numerics::sym_eig(laplacian(g, LaplacianKind::symmetric));
  return to_random_walk_vector(eig.eigenvectors.column(1), deg);
}

CutValue sweep_cut(const SimilarityGraph& g, const DenseVector& vector,
                   CutObjective objective) {
  const std::size_t n = g.size();
  if (vector.size() != n) fail(ErrorCode::DimensionMismatch, "sweep vector length");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vector[a] < vector[b]; });

  const DenseVector deg = degrees(g);
  double total_vol = 0.0;
  for (double d : deg) total_vol += d;

  // Incremental bookkeeping while nodes move from B to A in sorted order.
  std::vector<bool> in_a(n, false);
  double cut = 0.0, vol_a = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_split = 0;
  for (std::size_t s = 1; s < n; ++s) {
    const std::size_t u = order[s - 1];
    double to_a = 0.0, to_b = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == u) continue;
      (in_a[j] ? to_a : to_b) += g.w(u, j);
    }
    in_a[u] = true;
    cut += to_b - to_a;
    vol_a += deg[u];
    if (vector[order[s - 1]] == vector[order[s]]) continue;

    const double vol_b = total_vol - vol_a;
    const double na = static_cast<double>(s);
    const double nb = static_cast<double>(n - s);
    double value = std::numeric_limits<double>::infinity();
    switch (objective) {
      case CutObjective::rcut:
        value = cut / na + cut / nb;
        break;
      case CutObjective::ncut:
        if (vol_a > 0.0 && vol_b > 0.0) value = cut / vol_a + cut / vol_b;
        break;
      case CutObjective::mcut: {
        const double assoc_a = vol_a - cut;
        const double assoc_b = vol_b - cut;
        if (assoc_a > 0.0 && assoc_b > 0.0) value = cut / assoc_a + cut / assoc_b;
        break;
      }
    }
    if (value < best) {
      best = value;
      best_split = s;
    }
  }
  if (best_split == 0) {
    fail(ErrorCode::DegeneratePartition, "no threshold yields a valid two-way split");
  }

  CutValue out;
  out.objective = objective;
  out.partition.assign(n, false);
  for (std::size_t s = 0; s < best_split; ++s) out.partition[order[s]] = true;
  if (!out.partition[0]) out.partition.flip();
  out.value = cut_objective(g, out.partition, objective);
  return out;
}

CutValue two_way_partition(const SimilarityGraph& g, TwoWayCriterion criterion) {
  switch (criterion) {
    case TwoWayCriterion::pf: {
      auto eig = numerics::sym_eig(g.w);
      const std::size_t n = g.size();
      CutValue out;
      out.objective = CutObjective::rcut;
      out.partition.assign(n, false);
      std::size_t in_a = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(eig.eigenvectors(i, n - 1)) > 1e-8) {
          out.partition[i] = true;
          ++in_a;
        }
      }
      if (in_a == 0 || in_a == n) {
        fail(ErrorCode::DegeneratePartition,
             "leading affinity eigenvector has no zero entries to split on");
      }
      out.value = cut_objective(g, out.partition, CutObjective::rcut);
      return out;
    }
    case TwoWayCriterion::sm_ncut:
      return sweep_cut(g, fiedler_vector(g, CutObjective::ncut), CutObjective::ncut);
    case TwoWayCriterion::kvv_rcut:
      return sweep_cut(g, fiedler_vector(g, CutObjective::rcut), CutObjective::rcut);
    case TwoWayCriterion::mcut:
      return sweep_cut(g, fiedler_vector(g, CutObjective::mcut), CutObjective::mcut);
  }
  fail(ErrorCode::InvalidConfig, "unknown two-way criterion");
}

SpectralClustering spectral_cluster_detailed(const DenseMatrix& x, std::size_t k,
                                             Algorithm algorithm,
                                             std::optional<double> sigma,
                                             std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidConfig, "spectral clustering needs k >= 2");
  if (k > x.rows()) fail(ErrorCode::KTooLarge, "k exceeds the sample count");
  SimilarityGraph g = similarity_matrix(x, sigma);
  SpectralClustering out;
  out.embedding = spectral_embed(g, k, algorithm);
  out.assignment = kmeans(out.embedding.u, k, seed);
  return out;
}

ClusterAssignment spectral_cluster(const DenseMatrix& x, std::size_t k,
                                   Algorithm algorithm, std::optional<double> sigma,
                                   std::uint64_t seed) {
  return spectral_cluster_detailed(x, k, algorithm, sigma, seed).assignment;
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::basic: return "basic";
    case Algorithm::njw: return "njw";
    case Algorithm::ms: return "ms";
    case Algorithm::slh: return "slh";
  }
  return "basic";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "basic") return Algorithm::basic;
  if (name == "njw") return Algorithm::njw;
  if (name == "ms") return Algorithm::ms;
  if (name == "slh") return Algorithm::slh;
  return std::nullopt;
}

}  // namespace mvgad::spectral

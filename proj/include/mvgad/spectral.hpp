#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mvgad/matrix.hpp"

namespace mvgad::spectral {

// Gaussian-kernel affinity graph: symmetric, entries in [0, 1], zero diagonal.
struct SimilarityGraph {
  DenseMatrix w;
  double sigma = 1.0;

  std::size_t size() const { return w.rows(); }
};

// W[i][j] = exp(-|x_i - x_j|^2 / (2 sigma^2)) off the diagonal. Without an
// explicit sigma the median of the positive pairwise distances is used (1 if
// every distance is zero).
SimilarityGraph similarity_matrix(const DenseMatrix& x,
                                  std::optional<double> sigma = std::nullopt);

// Wraps an explicit weight matrix after checking the SimilarityGraph
// invariants.
SimilarityGraph graph_from_weights(DenseMatrix w);

DenseVector degrees(const SimilarityGraph& g);
DenseMatrix degree_matrix(const SimilarityGraph& g);

enum class LaplacianKind { unnormalized, symmetric, random_walk };

// unnormalized: D - W. symmetric: I - D^-1/2 W D^-1/2. random_walk: the
// transition matrix P = D^-1 W (not I - P).
DenseMatrix laplacian(const SimilarityGraph& g, LaplacianKind kind);

enum class Algorithm { basic, njw, ms, slh };

// Which operator's eigenvectors populate the embedding.
enum class EmbeddingBasis {
  unnormalized,  // smallest of D - W
  symmetric,     // smallest of I - D^-1/2 W D^-1/2, rows normalized
  random_walk,
  affinity_top,  // largest of W
  rw_top,        // largest of P = D^-1 W
};

struct SpectralEmbedding {
  DenseMatrix u;  // n x k, row i embeds sample i
  EmbeddingBasis basis = EmbeddingBasis::unnormalized;
  std::size_t k = 0;
  DenseVector eigenvalues;  // the k eigenvalues used, in column order
};

SpectralEmbedding spectral_embed(const SimilarityGraph& g, std::size_t k,
                                 Algorithm algorithm);

struct ClusterAssignment {
  std::vector<int> labels;
  DenseMatrix centroids;  // k x embedding dimension
  double inertia = 0.0;
  // Inertia after every Lloyd step, for monotonicity checks.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;

  std::size_t k() const { return centroids.rows(); }
};

inline constexpr int kMaxKmeansIterations = 100;

// Lloyd iterations from a seeded k-means++ start, run until the assignment
// stops changing (zero centroid shift) or the iteration cap. Labels are
// renumbered in order of first occurrence.
ClusterAssignment kmeans(const DenseMatrix& y, std::size_t k,
                         std::uint64_t seed);

enum class CutObjective { ncut, rcut, mcut };
enum class TwoWayCriterion { pf, sm_ncut, kvv_rcut, mcut };

struct CutValue {
  CutObjective objective = CutObjective::ncut;
  double value = 0.0;
  std::vector<bool> partition;  // true = side A
};

// cut(A,B) normalized by side size (rcut), volume (ncut) or within-side
// association (mcut).
double cut_objective(const SimilarityGraph& g, const std::vector<bool>& partition,
                     CutObjective objective);

// Fiedler vector of the random-walk Laplacian (ncut, mcut) or of D - W
// (rcut). Throws Disconnected when the second-smallest eigenvalue of D - W is
// not above 1e-10.
DenseVector fiedler_vector(const SimilarityGraph& g, CutObjective objective);

// Best of the threshold partitions that split `vector` between consecutive
// distinct sorted entries.
CutValue sweep_cut(const SimilarityGraph& g, const DenseVector& vector,
                   CutObjective objective);

CutValue two_way_partition(const SimilarityGraph& g, TwoWayCriterion criterion);

struct SpectralClustering {
  SpectralEmbedding embedding;
  ClusterAssignment assignment;
};

SpectralClustering spectral_cluster_detailed(const DenseMatrix& x, std::size_t k,
                                             Algorithm algorithm,
                                             std::optional<double> sigma,
                                             std::uint64_t seed);

ClusterAssignment spectral_cluster(const DenseMatrix& x, std::size_t k,
                                   Algorithm algorithm,
                                   std::optional<double> sigma,
                                   std::uint64_t seed);

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

}  // namespace mvgad::spectral

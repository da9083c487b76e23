#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mvgad/matrix.hpp"

namespace mvgad::gnn {

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 1.0;
};

// Undirected graph at one time step. Rows of x are node features; rows of
// edge_features, when present, line up with `edges`.
struct GraphSnapshot {
  std::int64_t t = 0;
  std::size_t n = 0;
  std::vector<Edge> edges;
  DenseMatrix x;
  std::optional<DenseMatrix> edge_features;

  // Throws InvalidGraph / DimensionMismatch.
  void validate() const;
  std::size_t max_degree() const;
  std::size_t feature_dim() const { return x.cols(); }
  // Edge weight as the single column when no features are attached.
  DenseMatrix effective_edge_features() const;
};

// Relabels node i as perm[i]; edges keep their order.
GraphSnapshot permute_nodes(const GraphSnapshot& g, std::span<const std::size_t> perm);

// h <- tanh(A x + B sum h_u + C sum x_u + E sum x_e + b); o = G_out [h; x].
struct GnnParams {
  DenseMatrix a;      // h x d
  DenseMatrix b;      // h x h
  DenseMatrix c;      // h x d
  DenseMatrix e;      // h x d_e
  DenseVector bias;   // h
  DenseMatrix g_out;  // classes x (h + d)
  double kappa = 0.9;

  std::size_t state_dim() const { return b.rows(); }
  std::size_t feature_dim() const { return a.cols(); }
  std::size_t edge_dim() const { return e.cols(); }
};

inline constexpr double kDefaultKappa = 0.9;
inline constexpr double kDefaultTolerance = 1e-6;
inline constexpr std::size_t kDefaultMaxIterations = 200;

double infinity_norm(const DenseMatrix& m);

bool satisfies_contraction(const GnnParams& p, std::size_t max_degree);

// Scales B down so that |B|_inf * max_degree <= kappa. No-op if already so.
void enforce_contraction(GnnParams& p, std::size_t max_degree);

// Gaussian weights with fan-in scaling; B is scaled to the contraction bound.
GnnParams random_params(std::size_t feature_dim, std::size_t edge_dim,
                        std::size_t state_dim, std::size_t classes,
                        std::size_t max_degree, double kappa, std::uint64_t seed);

struct NodeStates {
  DenseMatrix h;  // n x state_dim
  std::size_t iterations_used = 0;
  double residual = 0.0;
};

// Synchronous iteration from `initial` (zero when absent) until the largest
// per-node change is <= tol. Throws NoConvergence when the contraction bound
// does not hold for this graph or max_iter is exhausted.
NodeStates propagate(const GraphSnapshot& g, const GnnParams& params,
                     double tol = kDefaultTolerance,
                     std::size_t max_iter = kDefaultMaxIterations,
                     const DenseMatrix* initial = nullptr);

DenseMatrix node_output(const NodeStates& states, const GraphSnapshot& g,
                        const GnnParams& params);

// Row i is [h_i ; x_i].
DenseMatrix state_features(const NodeStates& states, const GraphSnapshot& g);

enum class Readout { mean, sum };

DenseVector readout(const NodeStates& states, Readout kind);

// One-layer encoder tanh(Ahat X W_e), Ahat = row-normalized (A + I), scored
// by the bilinear discriminator sigmoid(h^T W_d s).
struct DgiModel {
  DenseMatrix w_e;  // d x h
  DenseMatrix w_d;  // h x h
  std::vector<double> loss_curve;

  std::size_t feature_dim() const { return w_e.rows(); }
  std::size_t hidden_dim() const { return w_e.cols(); }
};

struct DgiSettings {
  std::size_t hidden_dim = 8;
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

DgiModel dgi_init(std::size_t feature_dim, std::size_t hidden_dim, std::uint64_t seed);

// Full-batch gradient descent. loss_curve[e] is the loss before update e.
DgiModel dgi_train(const std::vector<GraphSnapshot>& snapshots,
                   const DgiSettings& settings);

struct DgiLossGradient {
  double loss = 0.0;
  DenseMatrix grad_w_e;
  DenseMatrix grad_w_d;
};

// Loss and analytic gradient on one snapshot with a fixed corruption
// (corrupted row i takes features of node corruption[i]).
DgiLossGradient dgi_loss_gradient(const DgiModel& model, const GraphSnapshot& g,
                                  std::span<const std::size_t> corruption);

struct DiscriminatorScores {
  double real_mean = 0.0;
  double corrupted_mean = 0.0;
};

DiscriminatorScores discriminator_scores(const DgiModel& model, const GraphSnapshot& g,
                                         std::span<const std::size_t> corruption);

// Node embeddings tanh(Ahat X W_e).
DenseMatrix dgi_encode(const DgiModel& model, const GraphSnapshot& g);

struct SnapshotEmbedding {
  std::int64_t t = 0;
  DenseVector z;
};

SnapshotEmbedding dgi_embed(const DgiModel& model, const GraphSnapshot& g);

void save_model(const DgiModel& model, std::ostream& out);
DgiModel load_model(std::istream& in);

std::string_view to_string(Readout r);

}  // namespace mvgad::gnn

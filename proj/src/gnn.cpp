#include "mvgad/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "mvgad/error.hpp"
#include "mvgad/format.hpp"
#include "mvgad/rng.hpp"

namespace mvgad::gnn {

namespace {

struct Neighbor {
  std::size_t node;
  std::size_t edge;
};

using Adjacency = std::vector<std::vector<Neighbor>>;

Adjacency adjacency(const GraphSnapshot& g) {
  Adjacency adj(g.n);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    adj[e.src].push_back({e.dst, k});
    adj[e.dst].push_back({e.src, k});
  }
  return adj;
}

void require_dims(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::DimensionMismatch, what);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// Ahat X with Ahat = row-normalized (A + I); x_rows[u] is the feature row used
// for node u, so a corruption passes a permuted row map.
DenseMatrix smooth(const GraphSnapshot& g, const Adjacency& adj,
                   std::span<const std::size_t> x_rows) {
  const std::size_t d = g.x.cols();
  DenseMatrix m(g.n, d);
  std::vector<double> w, terms;
  for (std::size_t i = 0; i < g.n; ++i) {
    w.assign(1, 1.0);
    for (const auto& nb : adj[i]) w.push_back(g.edges[nb.edge].weight);
    const double denom = order_invariant_sum(w);
    for (std::size_t j = 0; j < d; ++j) {
      terms.clear();
      terms.push_back(g.x(x_rows[i], j));
      for (std::size_t k = 0; k < adj[i].size(); ++k)
        terms.push_back(w[k + 1] * g.x(x_rows[adj[i][k].node], j));
      m(i, j) = order_invariant_sum(terms) / denom;
    }
  }
  return m;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

DenseMatrix tanh_of(DenseMatrix z) {
  for (double& v : z.data()) v = std::tanh(v);
  return z;
}

DenseVector column_mean(const DenseMatrix& h) {
  DenseVector s(h.cols());
  for (std::size_t c = 0; c < h.cols(); ++c)
    s[c] = order_invariant_sum(h.column(c)) / static_cast<double>(h.rows());
  return s;
}

DgiLossGradient loss_gradient(const DgiModel& model, const DenseMatrix& m,
                              const DenseMatrix& mt) {
  const std::size_t n = m.rows();
  const std::size_t h = model.hidden_dim();
  const DenseMatrix hr = tanh_of(m * model.w_e);
  const DenseMatrix hc = tanh_of(mt * model.w_e);
  const DenseVector s = column_mean(hr);
  const DenseVector q = model.w_d * std::span<const double>(s);
  const double inv2n = 1.0 / (2.0 * static_cast<double>(n));

  DgiLossGradient out;
  DenseVector a(n), b(n), gq(h, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = dot(hr.row(i), q);
    const double lt = dot(hc.row(i), q);
    loss += softplus(-l) + softplus(lt);
    a[i] = (sigmoid(l) - 1.0) * inv2n;
    b[i] = sigmoid(lt) * inv2n;
    for (std::size_t c = 0; c < h; ++c) gq[c] += a[i] * hr(i, c) + b[i] * hc(i, c);
  }
  out.loss = loss * inv2n;

  out.grad_w_d = DenseMatrix(h, h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < h; ++c) out.grad_w_d(r, c) = gq[r] * s[c];

  DenseVector via_summary = model.w_d.transpose() * std::span<const double>(gq);
  for (double& v : via_summary) v /= static_cast<double>(n);

  DenseMatrix dz(n, h), dzt(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < h; ++c) {
      dz(i, c) = (a[i] * q[c] + via_summary[c]) * (1.0 - hr(i, c) * hr(i, c));
      dzt(i, c) = b[i] * q[c] * (1.0 - hc(i, c) * hc(i, c));
    }
  }
  const DenseMatrix g1 = m.transpose() * dz;
  const DenseMatrix g2 = mt.transpose() * dzt;
  out.grad_w_e = g1;
  for (std::size_t k = 0; k < g1.data().size(); ++k) out.grad_w_e.data()[k] += g2.data()[k];
  return out;
}

void check_model_input(const DgiModel& model, const GraphSnapshot& g) {
  g.validate();
  require_dims(g.x.cols() == model.feature_dim(),
               "snapshot has " + std::to_string(g.x.cols()) +
                   " features, model expects " + std::to_string(model.feature_dim()));
  if (g.n == 0) fail(ErrorCode::EmptyGraph, "snapshot has no nodes");
}

std::vector<std::size_t> check_corruption(std::span<const std::size_t> corruption,
                                          std::size_t n) {
  require_dims(corruption.size() == n, "corruption length differs from node count");
  std::vector<std::size_t> sorted(corruption.begin(), corruption.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted != iota(n)) fail(ErrorCode::DimensionMismatch, "corruption is not a permutation");
  return {corruption.begin(), corruption.end()};
}

}  // namespace

void GraphSnapshot::validate() const {
  if (x.rows() != n) {
    fail(ErrorCode::DimensionMismatch, "node feature rows " + std::to_string(x.rows()) +
                                           " differ from node count " + std::to_string(n));
  }
  require_finite(x, "node features");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : edges) {
    if (e.src >= n || e.dst >= n) {
      fail(ErrorCode::InvalidGraph, "edge (" + std::to_string(e.src) + ", " +
                                        std::to_string(e.dst) + ") out of range");
    }
    if (e.src == e.dst) fail(ErrorCode::InvalidGraph, "self-loop at node " + std::to_string(e.src));
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      fail(ErrorCode::InvalidGraph, "edge weight must be finite and >= 0");
    }
    if (!seen.emplace(std::min(e.src, e.dst), std::max(e.src, e.dst)).second) {
      fail(ErrorCode::InvalidGraph, "duplicate edge (" + std::to_string(e.src) + ", " +
                                        std::to_string(e.dst) + ")");
    }
  }
  if (edge_features) {
    require_dims(edge_features->rows() == edges.size(), "edge feature rows differ from edge count");
    require_finite(*edge_features, "edge features");
  }
}

std::size_t GraphSnapshot::max_degree() const {
  std::vector<std::size_t> deg(n, 0);
  for (const auto& e : edges) {
    if (e.src < n) ++deg[e.src];
    if (e.dst < n) ++deg[e.dst];
  }
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

DenseMatrix GraphSnapshot::effective_edge_features() const {
  if (edge_features) return *edge_features;
  DenseMatrix f(edges.size(), 1);
  for (std::size_t k = 0; k < edges.size(); ++k) f(k, 0) = edges[k].weight;
  return f;
}

GraphSnapshot permute_nodes(const GraphSnapshot& g, std::span<const std::size_t> perm) {
  require_dims(perm.size() == g.n, "permutation length differs from node count");
  GraphSnapshot out = g;
  for (std::size_t i = 0; i < g.n; ++i) {
    auto src = g.x.row(i);
    std::copy(src.begin(), src.end(), out.x.row(perm[i]).begin());
  }
  for (auto& e : out.edges) {
    e.src = perm[e.src];
    e.dst = perm[e.dst];
  }
  return out;
}

double infinity_norm(const DenseMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

bool satisfies_contraction(const GnnParams& p, std::size_t max_degree) {
  if (!(p.kappa > 0.0 && p.kappa < 1.0)) return false;
  return infinity_norm(p.b) * static_cast<double>(max_degree) <= p.kappa * (1.0 + 1e-12);
}

void enforce_contraction(GnnParams& p, std::size_t max_degree) {
  if (!(p.kappa > 0.0 && p.kappa < 1.0)) {
    fail(ErrorCode::InvalidConfig, "kappa must lie in (0, 1)");
  }
  const double bound = infinity_norm(p.b) * static_cast<double>(max_degree);
  if (bound <= p.kappa) return;
  const double scale = p.kappa / bound;
  for (double& v : p.b.data()) v *= scale;
}

GnnParams random_params(std::size_t feature_dim, std::size_t edge_dim,
                        std::size_t state_dim, std::size_t classes,
                        std::size_t max_degree, double kappa, std::uint64_t seed) {
  if (state_dim == 0) fail(ErrorCode::InvalidConfig, "state dimension must be >= 1");
  Rng rng(seed);
  const double deg = std::max<double>(1.0, static_cast<double>(max_degree));
  auto gaussian = [&](std::size_t r, std::size_t c, double scale) {
    DenseMatrix m(r, c);
    for (double& v : m.data()) v = scale * rng.normal();
    return m;
  };
  auto fan_in = [](std::size_t f) { return 1.0 / std::sqrt(std::max<double>(1.0, f)); };
  GnnParams p;
  p.kappa = kappa;
  p.a = gaussian(state_dim, feature_dim, fan_in(feature_dim));
  p.b = gaussian(state_dim, state_dim, 1.0);
  p.c = gaussian(state_dim, feature_dim, fan_in(feature_dim) / deg);
  p.e = gaussian(state_dim, edge_dim, fan_in(edge_dim) / deg);
  p.bias.resize(state_dim);
  for (double& v : p.bias) v = 0.1 * rng.normal();
  p.g_out = gaussian(classes, state_dim + feature_dim, fan_in(state_dim + feature_dim));
  // scale B onto the bound exactly
  const double norm = infinity_norm(p.b);
  if (!(kappa > 0.0 && kappa < 1.0)) fail(ErrorCode::InvalidConfig, "kappa must lie in (0, 1)");
  if (norm > 0.0) {
    for (double& v : p.b.data()) v *= kappa / (deg * norm);
  }
  return p;
}

NodeStates propagate(const GraphSnapshot& g, const GnnParams& params, double tol,
                     std::size_t max_iter, const DenseMatrix* initial) {
  g.validate();
  const std::size_t n = g.n, d = g.x.cols(), h = params.state_dim();
  const DenseMatrix xe = g.effective_edge_features();
  require_dims(params.b.cols() == h && params.a.rows() == h && params.c.rows() == h &&
                   params.e.rows() == h && params.bias.size() == h,
               "inconsistent state dimension in parameters");
  require_dims(params.a.cols() == d && params.c.cols() == d,
               "parameters expect " + std::to_string(params.a.cols()) + " node features, got " +
                   std::to_string(d));
  require_dims(params.e.cols() == xe.cols(),
               "parameters expect " + std::to_string(params.e.cols()) + " edge features, got " +
                   std::to_string(xe.cols()));
  if (initial) require_dims(initial->rows() == n && initial->cols() == h, "initial state shape");
  const std::size_t max_deg = g.max_degree();
  if (!satisfies_contraction(params, max_deg)) {
    fail(ErrorCode::NoConvergence,
         "contraction bound violated: |B|_inf * max_degree = " +
             format_real(infinity_norm(params.b) * static_cast<double>(max_deg)) +
             " exceeds kappa = " + format_real(params.kappa));
  }

  const Adjacency adj = adjacency(g);
  DenseMatrix fixed(n, h);
  std::vector<double> terms;
  DenseVector sx(d), se(xe.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      terms.clear();
      for (const auto& nb : adj[i]) terms.push_back(g.x(nb.node, j));
      sx[j] = order_invariant_sum(terms);
    }
    for (std::size_t j = 0; j < xe.cols(); ++j) {
      terms.clear();
      for (const auto& nb : adj[i]) terms.push_back(xe(nb.edge, j));
      se[j] = order_invariant_sum(terms);
    }
    const DenseVector ax = params.a * g.x.row(i);
    const DenseVector cx = params.c * std::span<const double>(sx);
    const DenseVector ex = params.e * std::span<const double>(se);
    for (std::size_t c = 0; c < h; ++c) fixed(i, c) = ax[c] + cx[c] + ex[c] + params.bias[c];
  }

  NodeStates st;
  st.h = initial ? *initial : DenseMatrix(n, h);
  DenseMatrix next(n, h);
  DenseVector agg(h);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < h; ++c) {
        terms.clear();
        for (const auto& nb : adj[i]) terms.push_back(st.h(nb.node, c));
        agg[c] = order_invariant_sum(terms);
      }
      const DenseVector bh = params.b * std::span<const double>(agg);
      for (std::size_t c = 0; c < h; ++c) {
        next(i, c) = std::tanh(fixed(i, c) + bh[c]);
        change = std::max(change, std::abs(next(i, c) - st.h(i, c)));
      }
    }
    std::swap(st.h, next);
    st.iterations_used = it;
    st.residual = change;
    if (change <= tol) return st;
  }
  fail(ErrorCode::NoConvergence, "propagation did not reach tolerance " + format_real(tol) +
                                     " in " + std::to_string(max_iter) +
                                     " iterations (residual " + format_real(st.residual) + ")");
}

DenseMatrix state_features(const NodeStates& states, const GraphSnapshot& g) {
  require_dims(states.h.rows() == g.x.rows(), "state rows differ from node count");
  const std::size_t h = states.h.cols(), d = g.x.cols();
  DenseMatrix out(g.x.rows(), h + d);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    std::copy(states.h.row(i).begin(), states.h.row(i).end(), r.begin());
    std::copy(g.x.row(i).begin(), g.x.row(i).end(), r.begin() + h);
  }
  return out;
}

DenseMatrix node_output(const NodeStates& states, const GraphSnapshot& g,
                        const GnnParams& params) {
  const DenseMatrix f = state_features(states, g);
  require_dims(params.g_out.cols() == f.cols(), "output map expects " +
                                                    std::to_string(params.g_out.cols()) +
                                                    " inputs, got " + std::to_string(f.cols()));
  return f * params.g_out.transpose();
}

DenseVector readout(const NodeStates& states, Readout kind) {
  const std::size_t n = states.h.rows();
  if (n == 0) fail(ErrorCode::EmptyGraph, "readout of an empty graph");
  DenseVector out(states.h.cols());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = order_invariant_sum(states.h.column(c));
    if (kind == Readout::mean) out[c] /= static_cast<double>(n);
  }
  return out;
}

DgiModel dgi_init(std::size_t feature_dim, std::size_t hidden_dim, std::uint64_t seed) {
  if (feature_dim == 0 || hidden_dim == 0) {
    fail(ErrorCode::InvalidConfig, "DGI dimensions must be >= 1");
  }
  Rng rng(seed);
  DgiModel m;
  m.w_e = DenseMatrix(feature_dim, hidden_dim);
  const double scale = std::sqrt(2.0 / static_cast<double>(feature_dim + hidden_dim));
  for (double& v : m.w_e.data()) v = scale * rng.normal();
  m.w_d = DenseMatrix(hidden_dim, hidden_dim);
  return m;
}

DgiLossGradient dgi_loss_gradient(const DgiModel& model, const GraphSnapshot& g,
                                  std::span<const std::size_t> corruption) {
  check_model_input(model, g);
  const auto perm = check_corruption(corruption, g.n);
  const Adjacency adj = adjacency(g);
  return loss_gradient(model, smooth(g, adj, iota(g.n)), smooth(g, adj, perm));
}

DiscriminatorScores discriminator_scores(const DgiModel& model, const GraphSnapshot& g,
                                         std::span<const std::size_t> corruption) {
  check_model_input(model, g);
  const auto perm = check_corruption(corruption, g.n);
  const Adjacency adj = adjacency(g);
  const DenseMatrix hr = tanh_of(smooth(g, adj, iota(g.n)) * model.w_e);
  const DenseMatrix hc = tanh_of(smooth(g, adj, perm) * model.w_e);
  const DenseVector s = column_mean(hr);
  const DenseVector q = model.w_d * std::span<const double>(s);
  DiscriminatorScores out;
  for (std::size_t i = 0; i < g.n; ++i) {
    out.real_mean += sigmoid(dot(hr.row(i), q));
    out.corrupted_mean += sigmoid(dot(hc.row(i), q));
  }
  out.real_mean /= static_cast<double>(g.n);
  out.corrupted_mean /= static_cast<double>(g.n);
  return out;
}

DgiModel dgi_train(const std::vector<GraphSnapshot>& snapshots, const DgiSettings& settings) {
  if (snapshots.empty()) fail(ErrorCode::EmptyInput, "DGI training needs at least one snapshot");
  const std::size_t d = snapshots.front().x.cols();
  for (const auto& g : snapshots) {
    g.validate();
    require_dims(g.x.cols() == d, "snapshot " + std::to_string(g.t) + " has " +
                                      std::to_string(g.x.cols()) + " features, expected " +
                                      std::to_string(d));
    if (g.n == 0) fail(ErrorCode::EmptyGraph, "snapshot " + std::to_string(g.t) + " has no nodes");
  }
  if (!(settings.learning_rate > 0.0) || !std::isfinite(settings.learning_rate)) {
    fail(ErrorCode::InvalidConfig, "DGI learning rate must be > 0");
  }
  DgiModel model = dgi_init(d, settings.hidden_dim, derive_seed(settings.seed, "dgi_init"));
  std::vector<Adjacency> adj;
  std::vector<DenseMatrix> smoothed;
  for (const auto& g : snapshots) {
    adj.push_back(adjacency(g));
    smoothed.push_back(smooth(g, adj.back(), iota(g.n)));
  }
  Rng corrupt(derive_seed(settings.seed, "dgi_corrupt"));
  const double inv = 1.0 / static_cast<double>(snapshots.size());
  for (std::size_t epoch = 0; epoch < settings.epochs; ++epoch) {
    double loss = 0.0;
    DenseMatrix gw_e(model.w_e.rows(), model.w_e.cols());
    DenseMatrix gw_d(model.w_d.rows(), model.w_d.cols());
    for (std::size_t s = 0; s < snapshots.size(); ++s) {
      const auto perm = corrupt.permutation(snapshots[s].n);
      const auto lg = loss_gradient(model, smoothed[s], smooth(snapshots[s], adj[s], perm));
      loss += lg.loss * inv;
      for (std::size_t k = 0; k < gw_e.data().size(); ++k) gw_e.data()[k] += lg.grad_w_e.data()[k] * inv;
      for (std::size_t k = 0; k < gw_d.data().size(); ++k) gw_d.data()[k] += lg.grad_w_d.data()[k] * inv;
    }
    if (!std::isfinite(loss) || !gw_e.all_finite() || !gw_d.all_finite()) {
      fail(ErrorCode::NonFiniteLoss, "DGI loss became non-finite at epoch " +
                                         std::to_string(epoch) + " with learning rate " +
                                         format_real(settings.learning_rate) +
                                         "; lower the learning rate");
    }
    model.loss_curve.push_back(loss);
    for (std::size_t k = 0; k < gw_e.data().size(); ++k)
      model.w_e.data()[k] -= settings.learning_rate * gw_e.data()[k];
    for (std::size_t k = 0; k < gw_d.data().size(); ++k)
      model.w_d.data()[k] -= settings.learning_rate * gw_d.data()[k];
  }
  return model;
}

DenseMatrix dgi_encode(const DgiModel& model, const GraphSnapshot& g) {
  check_model_input(model, g);
  return tanh_of(smooth(g, adjacency(g), iota(g.n)) * model.w_e);
}

SnapshotEmbedding dgi_embed(const DgiModel& model, const GraphSnapshot& g) {
  SnapshotEmbedding out{g.t, column_mean(dgi_encode(model, g))};
  for (double v : out.z) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "non-finite snapshot embedding");
  }
  return out;
}

namespace {

void write_block(std::ostream& out, const char* name, const DenseMatrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

std::string next_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) fail(ErrorCode::ParseError, std::string("model file truncated at ") + what);
  return tok;
}

void expect(std::istream& in, const std::string& word) {
  const std::string tok = next_token(in, word.c_str());
  if (tok != word) {
    fail(ErrorCode::ParseError, "model file: expected '" + word + "', found '" + tok + "'");
  }
}

std::size_t read_count(std::istream& in, const char* what) {
  const long long v = parse_integer(next_token(in, what), what);
  if (v < 0) fail(ErrorCode::ParseError, std::string("negative size for ") + what);
  return static_cast<std::size_t>(v);
}

DenseMatrix read_block(std::istream& in, const char* name) {
  expect(in, name);
  const std::size_t r = read_count(in, name), c = read_count(in, name);
  DenseMatrix m(r, c);
  for (double& v : m.data()) v = parse_real(next_token(in, name), name);
  return m;
}

}  // namespace

void save_model(const DgiModel& model, std::ostream& out) {
  out << "mvgad_dgi 1\n";
  write_block(out, "w_e", model.w_e);
  write_block(out, "w_d", model.w_d);
  out << "loss_curve " << model.loss_curve.size() << '\n';
  for (std::size_t k = 0; k < model.loss_curve.size(); ++k) {
    out << format_real(model.loss_curve[k]) << '\n';
  }
}

DgiModel load_model(std::istream& in) {
  expect(in, "mvgad_dgi");
  expect(in, "1");
  DgiModel m;
  m.w_e = read_block(in, "w_e");
  m.w_d = read_block(in, "w_d");
  if (m.w_d.rows() != m.w_e.cols() || m.w_d.cols() != m.w_e.cols()) {
    fail(ErrorCode::ParseError, "model file: w_d shape does not match w_e");
  }
  expect(in, "loss_curve");
  const std::size_t len = read_count(in, "loss_curve");
  for (std::size_t k = 0; k < len; ++k)
    m.loss_curve.push_back(parse_real(next_token(in, "loss_curve"), "loss_curve"));
  return m;
}

std::string_view to_string(Readout r) { return r == Readout::mean ? "mean" : "sum"; }

}  // namespace mvgad::gnn

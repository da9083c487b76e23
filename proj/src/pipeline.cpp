#include "mvgad/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "mvgad/error.hpp"
#include "mvgad/numerics.hpp"
#include "mvgad/rng.hpp"

namespace mvgad::pipeline {

namespace {

template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace

std::size_t block_of(std::size_t node, std::size_t nodes, std::size_t blocks) {
  return node * blocks / nodes;
}

Dataset generate_synthetic(const RunConfig& config, std::uint64_t seed) {
  validate(config);
  const std::size_t n = config.nodes;
  const std::size_t blocks = config.blocks;
  Dataset data;

  std::vector<bool> anomalous(config.timesteps, false);
  for (auto t : config.anomaly_timesteps) anomalous[t] = true;

  Rng graph_rng(derive_seed(seed, "gen_graph"));
  const double boosted = std::min(1.0, config.p_out * config.pout_factor);
  for (std::size_t t = 0; t < config.timesteps; ++t) {
    gnn::GraphSnapshot g;
    g.t = static_cast<std::int64_t>(t);
    g.n = n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool same = block_of(i, n, blocks) == block_of(j, n, blocks);
        double p = same ? config.p_in : config.p_out;
        if (anomalous[t]) {
          p = config.anomaly_mode == AnomalyMode::block_merge ? config.p_in
                                                              : (same ? config.p_in : boosted);
        }
        if (graph_rng.bernoulli(p)) g.edges.push_back({i, j, 1.0});
      }
    }
    data.snapshots.push_back(std::move(g));
    data.temporal.timestamps.push_back(static_cast<std::int64_t>(t));
    data.temporal.labels.push_back(anomalous[t]);
  }

  Rng feat_rng(derive_seed(seed, "gen_features"));
  const std::size_t views = config.view_dims.size();
  std::vector<DenseMatrix> means;
  for (std::size_t v = 0; v < views; ++v) {
    DenseMatrix mu(blocks, config.view_dims[v]);
    for (double& x : mu.data()) x = config.feature_separation * feat_rng.normal();
    means.push_back(std::move(mu));
  }
  // which block each node shows in each view
  std::vector<std::vector<std::size_t>> shown(views, std::vector<std::size_t>(n));
  for (std::size_t v = 0; v < views; ++v)
    for (std::size_t i = 0; i < n; ++i) shown[v][i] = block_of(i, n, blocks);
  data.node_labels.assign(n, false);
  const auto flipped = static_cast<std::size_t>(std::llround(config.inconsistent_fraction * n));
  const auto order = feat_rng.permutation(n);
  for (std::size_t r = 0; r < flipped; ++r) {
    const std::size_t i = order[r];
    const std::size_t v = feat_rng.uniform_index(views);
    const std::size_t own = block_of(i, n, blocks);
    const std::size_t other = (own + 1 + feat_rng.uniform_index(blocks - 1)) % blocks;
    shown[v][i] = other;
    data.node_labels[i] = true;
  }
  for (std::size_t v = 0; v < views; ++v) {
    fusion::ViewFeatureSpace view;
    view.view_id = "view" + std::to_string(v);
    view.x = DenseMatrix(n, config.view_dims[v]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < config.view_dims[v]; ++j)
        view.x(i, j) = means[v](shown[v][i], j) + feat_rng.normal();
    data.views.push_back(std::move(view));
  }
  return data;
}

std::vector<fusion::ViewFeatureSpace> preprocess_views(
    const std::vector<fusion::ViewFeatureSpace>& views, const RunConfig& config) {
  return staged("pca", [&] {
    std::vector<fusion::ViewFeatureSpace> out;
    for (const auto& v : views) {
      const auto model = numerics::pca_fit(v.x, config.pca_variance);
      out.push_back({v.view_id, numerics::pca_transform(model, v.x)});
    }
    return out;
  });
}

fusion::FusionResult fuse(const std::vector<fusion::ViewFeatureSpace>& reduced,
                          const RunConfig& config, std::uint64_t seed) {
  return staged("fusion", [&] {
    fusion::FusionSettings s;
    s.k = config.k;
    s.algorithm = config.spectral_algorithm;
    s.sigma = config.sigma;
    s.mode = config.fusion_mode;
    s.seed = derive_seed(seed, "fusion");
    return fusion::score_views(reduced, s);
  });
}

EmbeddingResult embed(const std::vector<gnn::GraphSnapshot>& snapshots,
                      const fusion::FullFeatureSpace& full, const RunConfig& config,
                      std::uint64_t seed) {
  if (snapshots.empty()) fail(ErrorCode::EmptyInput, "no snapshots to embed");
  std::vector<gnn::GraphSnapshot> states = staged("gnn", [&] {
    std::size_t max_degree = 0;
    std::vector<gnn::GraphSnapshot> graphs = snapshots;
    for (auto& g : graphs) {
      if (g.n != full.x.rows()) {
        fail(ErrorCode::DimensionMismatch,
             "snapshot t=" + std::to_string(g.t) + " has " + std::to_string(g.n) +
                 " nodes but the views have " + std::to_string(full.x.rows()) + " samples");
      }
      g.x = full.x;
      g.validate();
      max_degree = std::max(max_degree, g.max_degree());
    }
    const auto params = gnn::random_params(full.x.cols(), 1, config.hidden_dim, 1, max_degree,
                                           config.kappa, derive_seed(seed, "gnn"));
    for (auto& g : graphs) {
      const auto h = gnn::propagate(g, params, config.gnn_tol, config.gnn_max_iter);
      g.x = gnn::state_features(h, g);
    }
    return graphs;
  });
  return staged("dgi", [&] {
    const auto train = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(config.train_frac * static_cast<double>(states.size()))));
    gnn::DgiSettings s;
    s.hidden_dim = config.hidden_dim;
    s.epochs = config.dgi_epochs;
    s.learning_rate = config.dgi_lr;
    s.seed = derive_seed(seed, "dgi");
    EmbeddingResult r;
    r.model = gnn::dgi_train({states.begin(), states.begin() + static_cast<std::ptrdiff_t>(train)}, s);
    for (const auto& g : states) r.embeddings.push_back(gnn::dgi_embed(r.model, g));
    return r;
  });
}

rrcf::ScoreSeries score(const std::vector<gnn::SnapshotEmbedding>& embeddings,
                        const RunConfig& config, std::uint64_t seed) {
  return staged("rrcf", [&] {
    rrcf::ForestSettings s;
    s.trees = config.trees;
    s.capacity = config.tree_capacity;
    s.shingle = config.shingle;
    s.aggregation = config.score_aggregation;
    s.seed = derive_seed(seed, "rrcf");
    return rrcf::score_embeddings(embeddings, s);
  });
}

DetectionResult run_detection(const std::vector<gnn::GraphSnapshot>& snapshots,
                              const std::vector<fusion::ViewFeatureSpace>& views,
                              const RunConfig& config, std::uint64_t seed) {
  DetectionResult r;
  const auto reduced = preprocess_views(views, config);
  r.fusion = fuse(reduced, config, seed);
  r.embedding = embed(snapshots, r.fusion.full, config, seed);
  r.temporal = score(r.embedding.embeddings, config, seed);
  return r;
}

RunScores temporal_run(std::uint64_t seed, const rrcf::ScoreSeries& scores,
                       const LabeledSeries& truth) {
  if (scores.timestamps != truth.timestamps) {
    fail(ErrorCode::LengthMismatch, "score timestamps do not match the label timestamps");
  }
  return {seed, scores.scores, truth.labels};
}

Evaluation evaluate_runs(const RunConfig& config) {
  validate(config);
  std::vector<RunScores> temporal, sample;
  for (std::size_t r = 0; r < config.runs; ++r) {
    const std::uint64_t s = derive_seed(config.seed, "run", r);
    const Dataset data = generate_synthetic(config, s);
    const auto det = run_detection(data.snapshots, data.views, config, s);
    temporal.push_back(temporal_run(s, det.temporal, data.temporal));
    sample.push_back({s, det.fusion.score.scores, data.node_labels});
  }
  return staged("eval", [&] {
    return Evaluation{evaluate(temporal, config.threshold()), evaluate(sample, config.threshold())};
  });
}

std::string to_json(const Evaluation& evaluation) {
  nlohmann::ordered_json j;
  j["temporal"] = nlohmann::ordered_json::parse(to_json(evaluation.temporal));
  if (evaluation.sample) j["sample"] = nlohmann::ordered_json::parse(to_json(*evaluation.sample));
  return j.dump(2) + "\n";
}

}  // namespace mvgad::pipeline

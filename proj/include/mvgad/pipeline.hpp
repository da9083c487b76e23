#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvgad/config.hpp"
#include "mvgad/fusion.hpp"
#include "mvgad/gnn.hpp"
#include "mvgad/metrics.hpp"
#include "mvgad/rrcf.hpp"

namespace mvgad::pipeline {

struct LabeledSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<bool> labels;
};

// Snapshots carry edges only; node features live in the views, one row per
// node.
struct Dataset {
  std::vector<gnn::GraphSnapshot> snapshots;
  std::vector<fusion::ViewFeatureSpace> views;
  LabeledSeries temporal;
  std::vector<bool> node_labels;  // inconsistent samples
};

std::size_t block_of(std::size_t node, std::size_t nodes, std::size_t blocks);

Dataset generate_synthetic(const RunConfig& config, std::uint64_t seed);

// Per-view PCA at config.pca_variance. Stage "pca".
std::vector<fusion::ViewFeatureSpace> preprocess_views(
    const std::vector<fusion::ViewFeatureSpace>& views, const RunConfig& config);

// Stage "fusion".
fusion::FusionResult fuse(const std::vector<fusion::ViewFeatureSpace>& reduced,
                          const RunConfig& config, std::uint64_t seed);

struct EmbeddingResult {
  std::vector<gnn::SnapshotEmbedding> embeddings;
  gnn::DgiModel model;
};

// Node features = full reduced space; fixed-point states appended to them
// feed DGI, trained on the leading train_frac of the snapshots. Stages "gnn"
// and "dgi".
EmbeddingResult embed(const std::vector<gnn::GraphSnapshot>& snapshots,
                      const fusion::FullFeatureSpace& full, const RunConfig& config,
                      std::uint64_t seed);

// Stage "rrcf".
rrcf::ScoreSeries score(const std::vector<gnn::SnapshotEmbedding>& embeddings,
                        const RunConfig& config, std::uint64_t seed);

struct DetectionResult {
  rrcf::ScoreSeries temporal;
  fusion::FusionResult fusion;
  EmbeddingResult embedding;
};

DetectionResult run_detection(const std::vector<gnn::GraphSnapshot>& snapshots,
                              const std::vector<fusion::ViewFeatureSpace>& views,
                              const RunConfig& config, std::uint64_t seed);

// Aligns scores to labels by timestamp; throws LengthMismatch otherwise.
RunScores temporal_run(std::uint64_t seed, const rrcf::ScoreSeries& scores,
                       const LabeledSeries& truth);

struct Evaluation {
  EvalReport temporal;  // ScoreSeries vs anomalous timesteps
  std::optional<EvalReport> sample;  // consistency scores vs inconsistent samples
};

// Run r draws a fresh dataset and detection under derive_seed(seed, "run", r).
Evaluation evaluate_runs(const RunConfig& config);

std::string to_json(const Evaluation& evaluation);

}  // namespace mvgad::pipeline

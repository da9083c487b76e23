#pragma once

#include <string>
#include <vector>

#include "mvgad/fusion.hpp"
#include "mvgad/gnn.hpp"
#include "mvgad/metrics.hpp"
#include "mvgad/pipeline.hpp"
#include "mvgad/rrcf.hpp"

// CSV with a header row, `\n` line endings and reals at 17 significant
// digits. Readers throw ParseError naming file:line.
namespace mvgad::io {

// Writes to a sibling temporary file, then renames over `path`.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string edges_csv(const std::vector<gnn::GraphSnapshot>& snapshots);
std::string view_csv(const fusion::ViewFeatureSpace& view);
std::string temporal_labels_csv(const pipeline::LabeledSeries& labels);
std::string node_labels_csv(const std::vector<bool>& labels);

std::string scores_csv(const rrcf::ScoreSeries& scores);
std::string roc_csv(const std::vector<pipeline::RocPoint>& roc);
std::string embeddings_csv(const std::vector<gnn::SnapshotEmbedding>& embeddings);
std::string cluster_csv(const std::vector<int>& labels);
std::string consistency_csv(const std::vector<double>& scores);

// Parsers take the text plus a name used in messages.
std::vector<gnn::Edge> parse_edges(const std::string& text, const std::string& name,
                                   std::vector<std::int64_t>* times);
fusion::ViewFeatureSpace parse_view(const std::string& text, const std::string& name,
                                    std::string view_id);
pipeline::LabeledSeries parse_temporal_labels(const std::string& text, const std::string& name);
std::vector<bool> parse_node_labels(const std::string& text, const std::string& name);
rrcf::ScoreSeries parse_scores(const std::string& text, const std::string& name);
std::vector<gnn::SnapshotEmbedding> parse_embeddings(const std::string& text,
                                                     const std::string& name);

// edges.csv, view0.csv ... view{V-1}.csv, labels_t.csv, labels_node.csv.
// Returns the paths written.
std::vector<std::string> save_dataset(const std::string& dir, const pipeline::Dataset& data);

// Views are read as view0.csv, view1.csv, ... until one is missing. One
// snapshot per timestamp of labels_t.csv with n = rows of view0.
pipeline::Dataset load_dataset(const std::string& dir);

}  // namespace mvgad::io

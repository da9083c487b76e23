#include "mvgad/io.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mvgad/error.hpp"
#include "mvgad/format.hpp"

namespace mvgad::io {

namespace fs = std::filesystem;

namespace {

struct Row {
  std::size_t line;
  std::vector<std::string_view> cells;
};

// Header check plus the data rows, split on commas.
std::vector<Row> parse_csv(const std::string& text, const std::string& name,
                           const std::vector<std::string>& header_prefix,
                           bool open_ended = false) {
  std::vector<Row> rows;
  std::string_view rest = text;
  std::size_t line = 0;
  bool header_seen = false;
  while (!rest.empty()) {
    ++line;
    const auto nl = rest.find('\n');
    std::string_view raw = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.empty()) continue;
    Row row{line, {}};
    while (true) {
      const auto comma = raw.find(',');
      row.cells.push_back(raw.substr(0, comma));
      if (comma == std::string_view::npos) break;
      raw = raw.substr(comma + 1);
    }
    if (!header_seen) {
      header_seen = true;
      bool ok = open_ended ? row.cells.size() >= header_prefix.size()
                           : row.cells.size() == header_prefix.size();
      for (std::size_t i = 0; ok && i < header_prefix.size(); ++i) ok = row.cells[i] == header_prefix[i];
      if (!ok) {
        std::string want;
        for (const auto& h : header_prefix) want += (want.empty() ? "" : ",") + h;
        fail(ErrorCode::ParseError, name + ":" + std::to_string(line) + ": expected header '" +
                                        want + (open_ended ? ",...'" : "'"));
      }
      if (open_ended) rows.push_back(std::move(row));  // caller checks the tail
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) fail(ErrorCode::ParseError, name + ": empty file, no header");
  return rows;
}

[[noreturn]] void at(const std::string& name, std::size_t line, const std::string& msg) {
  fail(ErrorCode::ParseError, name + ":" + std::to_string(line) + ": " + msg);
}

void arity(const Row& r, std::size_t n, const std::string& name) {
  if (r.cells.size() != n) {
    at(name, r.line, "expected " + std::to_string(n) + " fields, got " + std::to_string(r.cells.size()));
  }
}

template <typename F>
auto located(const std::string& name, std::size_t line, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    at(name, line, e.what());
  }
}

long long integer(const Row& r, std::size_t i, const std::string& name) {
  return located(name, r.line, [&] { return parse_integer(r.cells[i], "field " + std::to_string(i)); });
}

double real(const Row& r, std::size_t i, const std::string& name) {
  return located(name, r.line, [&] { return parse_real(r.cells[i], "field " + std::to_string(i)); });
}

bool flag(const Row& r, std::size_t i, const std::string& name) {
  const long long v = integer(r, i, name);
  if (v != 0 && v != 1) at(name, r.line, "label must be 0 or 1");
  return v == 1;
}

std::size_t node_index(const Row& r, std::size_t expected, const std::string& name) {
  const long long id = integer(r, 0, name);
  if (id < 0 || static_cast<std::size_t>(id) != expected) {
    at(name, r.line, "node_id " + std::to_string(id) + " out of order, expected " + std::to_string(expected));
  }
  return expected;
}

std::string vector_header(const char* first, const char* prefix, std::size_t n) {
  std::string s = first;
  for (std::size_t j = 0; j < n; ++j) s += std::string(",") + prefix + std::to_string(j);
  return s + "\n";
}

}  // namespace

void write_file(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot move '" + tmp + "' to '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string edges_csv(const std::vector<gnn::GraphSnapshot>& snapshots) {
  std::string s = "t,src,dst,weight\n";
  for (const auto& g : snapshots)
    for (const auto& e : g.edges)
      s += std::to_string(g.t) + "," + std::to_string(e.src) + "," + std::to_string(e.dst) + "," +
           format_real(e.weight) + "\n";
  return s;
}

std::string view_csv(const fusion::ViewFeatureSpace& view) {
  std::string s = vector_header("node_id", "f", view.x.cols());
  for (std::size_t i = 0; i < view.x.rows(); ++i) {
    s += std::to_string(i);
    for (double v : view.x.row(i)) s += "," + format_real(v);
    s += "\n";
  }
  return s;
}

std::string temporal_labels_csv(const pipeline::LabeledSeries& labels) {
  std::string s = "t,label\n";
  for (std::size_t i = 0; i < labels.timestamps.size(); ++i)
    s += std::to_string(labels.timestamps[i]) + (labels.labels[i] ? ",1\n" : ",0\n");
  return s;
}

std::string node_labels_csv(const std::vector<bool>& labels) {
  std::string s = "node_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) s += std::to_string(i) + (labels[i] ? ",1\n" : ",0\n");
  return s;
}

std::string scores_csv(const rrcf::ScoreSeries& scores) {
  std::string s = "t,score\n";
  for (std::size_t i = 0; i < scores.scores.size(); ++i)
    s += std::to_string(scores.timestamps[i]) + "," + format_real(scores.scores[i]) + "\n";
  return s;
}

std::string roc_csv(const std::vector<pipeline::RocPoint>& roc) {
  std::string s = "fpr,tpr\n";
  for (const auto& p : roc) s += format_real(p.fpr) + "," + format_real(p.tpr) + "\n";
  return s;
}

std::string embeddings_csv(const std::vector<gnn::SnapshotEmbedding>& embeddings) {
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().z.size();
  std::string s = vector_header("t", "z", dim);
  for (const auto& e : embeddings) {
    s += std::to_string(e.t);
    for (double v : e.z) s += "," + format_real(v);
    s += "\n";
  }
  return s;
}

std::string cluster_csv(const std::vector<int>& labels) {
  std::string s = "node_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) s += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  return s;
}

std::string consistency_csv(const std::vector<double>& scores) {
  std::string s = "node_id,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) s += std::to_string(i) + "," + format_real(scores[i]) + "\n";
  return s;
}

std::vector<gnn::Edge> parse_edges(const std::string& text, const std::string& name,
                                   std::vector<std::int64_t>* times) {
  std::vector<gnn::Edge> out;
  for (const auto& r : parse_csv(text, name, {"t", "src", "dst", "weight"})) {
    arity(r, 4, name);
    const long long t = integer(r, 0, name);
    const long long a = integer(r, 1, name), b = integer(r, 2, name);
    if (a < 0 || b < 0) at(name, r.line, "negative node id");
    out.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b), real(r, 3, name)});
    if (times) times->push_back(t);
  }
  return out;
}

fusion::ViewFeatureSpace parse_view(const std::string& text, const std::string& name,
                                    std::string view_id) {
  auto rows = parse_csv(text, name, {"node_id"}, true);
  const std::size_t cols = rows.front().cells.size();
  for (std::size_t j = 1; j < cols; ++j) {
    if (rows.front().cells[j] != "f" + std::to_string(j - 1)) {
      at(name, rows.front().line, "expected column f" + std::to_string(j - 1));
    }
  }
  if (cols < 2) at(name, rows.front().line, "no feature columns");
  fusion::ViewFeatureSpace v;
  v.view_id = std::move(view_id);
  v.x = DenseMatrix(rows.size() - 1, cols - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    arity(rows[i], cols, name);
    node_index(rows[i], i - 1, name);
    for (std::size_t j = 1; j < cols; ++j) v.x(i - 1, j - 1) = real(rows[i], j, name);
  }
  return v;
}

pipeline::LabeledSeries parse_temporal_labels(const std::string& text, const std::string& name) {
  pipeline::LabeledSeries out;
  for (const auto& r : parse_csv(text, name, {"t", "label"})) {
    arity(r, 2, name);
    const long long t = integer(r, 0, name);
    if (!out.timestamps.empty() && t <= out.timestamps.back()) at(name, r.line, "timestamps must increase");
    out.timestamps.push_back(t);
    out.labels.push_back(flag(r, 1, name));
  }
  return out;
}

std::vector<bool> parse_node_labels(const std::string& text, const std::string& name) {
  std::vector<bool> out;
  for (const auto& r : parse_csv(text, name, {"node_id", "label"})) {
    arity(r, 2, name);
    node_index(r, out.size(), name);
    out.push_back(flag(r, 1, name));
  }
  return out;
}

rrcf::ScoreSeries parse_scores(const std::string& text, const std::string& name) {
  rrcf::ScoreSeries out;
  for (const auto& r : parse_csv(text, name, {"t", "score"})) {
    arity(r, 2, name);
    out.timestamps.push_back(integer(r, 0, name));
    out.scores.push_back(real(r, 1, name));
  }
  return out;
}

std::vector<gnn::SnapshotEmbedding> parse_embeddings(const std::string& text,
                                                     const std::string& name) {
  auto rows = parse_csv(text, name, {"t"}, true);
  const std::size_t cols = rows.front().cells.size();
  for (std::size_t j = 1; j < cols; ++j) {
    if (rows.front().cells[j] != "z" + std::to_string(j - 1)) {
      at(name, rows.front().line, "expected column z" + std::to_string(j - 1));
    }
  }
  std::vector<gnn::SnapshotEmbedding> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    arity(rows[i], cols, name);
    gnn::SnapshotEmbedding e;
    e.t = integer(rows[i], 0, name);
    for (std::size_t j = 1; j < cols; ++j) e.z.push_back(real(rows[i], j, name));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> save_dataset(const std::string& dir, const pipeline::Dataset& data) {
  std::vector<std::string> written;
  auto put = [&](const std::string& file, const std::string& content) {
    const std::string path = (fs::path(dir) / file).string();
    write_file(path, content);
    written.push_back(path);
  };
  put("edges.csv", edges_csv(data.snapshots));
  for (std::size_t v = 0; v < data.views.size(); ++v) put("view" + std::to_string(v) + ".csv", view_csv(data.views[v]));
  put("labels_t.csv", temporal_labels_csv(data.temporal));
  put("labels_node.csv", node_labels_csv(data.node_labels));
  return written;
}

pipeline::Dataset load_dataset(const std::string& dir) {
  pipeline::Dataset data;
  auto path = [&](const std::string& file) { return (fs::path(dir) / file).string(); };
  for (std::size_t v = 0;; ++v) {
    const std::string p = path("view" + std::to_string(v) + ".csv");
    if (!fs::exists(p)) break;
    data.views.push_back(parse_view(read_file(p), p, "view" + std::to_string(v)));
  }
  if (data.views.empty()) fail(ErrorCode::IoError, "no view0.csv in '" + dir + "'");
  const std::size_t n = data.views.front().x.rows();
  const std::string lt = path("labels_t.csv");
  data.temporal = parse_temporal_labels(read_file(lt), lt);
  const std::string ln = path("labels_node.csv");
  if (fs::exists(ln)) data.node_labels = parse_node_labels(read_file(ln), ln);

  std::map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < data.temporal.timestamps.size(); ++i) {
    gnn::GraphSnapshot g;
    g.t = data.temporal.timestamps[i];
    g.n = n;
    data.snapshots.push_back(std::move(g));
    slot[data.temporal.timestamps[i]] = i;
  }
  const std::string ep = path("edges.csv");
  std::vector<std::int64_t> times;
  const auto edges = parse_edges(read_file(ep), ep, &times);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto it = slot.find(times[i]);
    if (it == slot.end()) {
      fail(ErrorCode::ParseError, ep + ": edge at t=" + std::to_string(times[i]) + " has no label row");
    }
    data.snapshots[it->second].edges.push_back(edges[i]);
  }
  return data;
}

}  // namespace mvgad::io

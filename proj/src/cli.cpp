#include "mvgad/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "mvgad/config.hpp"
#include "mvgad/io.hpp"
#include "mvgad/pipeline.hpp"
#include "mvgad/spectral.hpp"

namespace mvgad::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::string data;
  std::string out;
  std::string embeddings;
  std::string scores;
};

// Tracks artifacts so a failed run can take them back.
class Outputs {
 public:
  void write(const std::string& path, const std::string& content) {
    io::write_file(path, content);
    paths_.push_back(path);
  }
  void add(const std::vector<std::string>& paths) { paths_.insert(paths_.end(), paths.begin(), paths.end()); }
  void discard() {
    std::error_code ec;
    for (const auto& p : paths_) fs::remove(p, ec);
    paths_.clear();
  }
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<std::string> paths_;
};

RunConfig resolve_config(const Options& o) {
  std::string path = o.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("MVGAD_CONFIG"); env && *env) path = env;
  }
  RunConfig c = path.empty() ? RunConfig{} : load_config(path);
  for (const auto& s : o.sets) apply_override(c, s);
  if (!o.data.empty()) c.data_dir = o.data;
  validate(c);
  return c;
}

std::string output_path(const Options& o, const RunConfig& c, const char* default_name) {
  return o.out.empty() ? (fs::path(c.out_dir) / default_name).string() : o.out;
}

void echo_then(Outputs& outputs, const std::string& echo_path, const RunConfig& c) {
  outputs.write(echo_path, config_echo(c));
}

int execute(const std::string& command, const Options& o, Outputs& outputs) {
  const RunConfig c = resolve_config(o);
  const std::uint64_t seed = c.seed;

  if (command == "gen") {
    echo_then(outputs, (fs::path(c.data_dir) / "config.txt").string(), c);
    const auto data = pipeline::generate_synthetic(c, seed);
    outputs.add(io::save_dataset(c.data_dir, data));
    return 0;
  }

  auto artifact = [&](const char* name, auto&& produce) {
    const std::string path = output_path(o, c, name);
    echo_then(outputs, path + ".config.txt", c);
    outputs.write(path, produce());
  };

  if (command == "eval" || command == "roc") {
    std::optional<pipeline::EvalReport> single;
    std::optional<pipeline::Evaluation> runs;
    auto compute = [&] {
      if (!o.scores.empty()) {
        const auto truth = io::load_dataset(c.data_dir).temporal;
        const auto scores = io::parse_scores(io::read_file(o.scores), o.scores);
        single = pipeline::evaluate({pipeline::temporal_run(seed, scores, truth)}, c.threshold());
      } else {
        runs = pipeline::evaluate_runs(c);
      }
    };
    if (command == "eval") {
      artifact("report.json", [&] {
        compute();
        return pipeline::to_json(runs ? *runs : pipeline::Evaluation{*single, std::nullopt});
      });
    } else {
      artifact("roc.csv", [&] {
        compute();
        return io::roc_csv(runs ? runs->temporal.roc : single->roc);
      });
    }
    return 0;
  }

  const auto data = io::load_dataset(c.data_dir);
  if (command == "cluster") {
    artifact("clusters.csv", [&] {
      const auto reduced = pipeline::preprocess_views(data.views, c);
      const auto full = [&] {
        try {
          return fusion::build_full_space(reduced);
        } catch (const Error& e) {
          throw e.with_stage("cluster");
        }
      }();
      try {
        return io::cluster_csv(spectral::spectral_cluster(full.x, c.k, c.spectral_algorithm, c.sigma,
                                                          derive_seed(seed, "cluster"))
                                   .labels);
      } catch (const Error& e) {
        throw e.with_stage("cluster");
      }
    });
  } else if (command == "fuse-score") {
    artifact("consistency.csv", [&] {
      return io::consistency_csv(pipeline::fuse(pipeline::preprocess_views(data.views, c), c, seed).score.scores);
    });
  } else if (command == "embed") {
    artifact("embeddings.csv", [&] {
      const auto f = pipeline::fuse(pipeline::preprocess_views(data.views, c), c, seed);
      return io::embeddings_csv(pipeline::embed(data.snapshots, f.full, c, seed).embeddings);
    });
  } else if (command == "detect") {
    artifact("scores.csv", [&] {
      if (!o.embeddings.empty()) {
        const auto e = io::parse_embeddings(io::read_file(o.embeddings), o.embeddings);
        return io::scores_csv(pipeline::score(e, c, seed));
      }
      return io::scores_csv(pipeline::run_detection(data.snapshots, data.views, c, seed).temporal);
    });
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view graph anomaly detection toolkit"};
  app.name("mvgad");
  app.require_subcommand(1, 1);
  Options o;
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"gen", "write a synthetic dataset to the data directory"},
      {"cluster", "spectral cluster labels of the fused feature space"},
      {"fuse-score", "per-sample cross-view consistency scores"},
      {"embed", "per-snapshot graph embeddings"},
      {"detect", "per-timestep anomaly scores"},
      {"eval", "evaluation report (JSON)"},
      {"roc", "ROC curve (CSV)"},
  };
  for (const auto& s : commands) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", o.config_path, "flat key = value config file (else $MVGAD_CONFIG)");
    sub->add_option("--set", o.sets, "override, key=value (repeatable)");
    sub->add_option("--data", o.data, "dataset directory (overrides data_dir)");
    if (std::string(s.name) != "gen") sub->add_option("--out", o.out, "output file");
    if (std::string(s.name) == "detect") {
      sub->add_option("--embeddings", o.embeddings, "score this embeddings CSV instead of computing one");
    }
    if (std::string(s.name) == "eval" || std::string(s.name) == "roc") {
      sub->add_option("--scores", o.scores, "scores CSV to evaluate against the data directory labels");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mvgad: " << e.what() << "\n" << app.help();
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Outputs outputs;
  try {
    const int code = execute(command, o, outputs);
    for (const auto& p : outputs.paths()) out << "wrote " << p << "\n";
    return code;
  } catch (const ConfigError& e) {
    outputs.discard();
    err << "mvgad " << command << ": " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    outputs.discard();
    err << "mvgad " << command << ": " << (e.stage().empty() ? "" : "stage " + e.stage() + ": ")
        << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    outputs.discard();
    err << "mvgad " << command << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mvgad::cli

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvgad/error.hpp"
#include "mvgad/fusion.hpp"
#include "mvgad/metrics.hpp"
#include "mvgad/rrcf.hpp"
#include "mvgad/spectral.hpp"

namespace mvgad {

enum class AnomalyMode { pout_boost, block_merge };

// Every tunable of a run. Defaults are the documented module defaults.
struct RunConfig {
  std::uint64_t seed = 1;

  // synthetic data
  std::size_t timesteps = 100;
  std::size_t nodes = 60;
  std::size_t blocks = 2;
  double p_in = 0.3;
  double p_out = 0.02;
  std::vector<std::size_t> anomaly_timesteps{40, 41, 42, 43, 44, 70, 71, 72, 73, 74};
  AnomalyMode anomaly_mode = AnomalyMode::pout_boost;
  double pout_factor = 10.0;
  std::vector<std::size_t> view_dims{4, 4};
  double feature_separation = 2.0;
  double inconsistent_fraction = 0.1;

  // fusion
  double pca_variance = 0.95;
  std::optional<double> sigma;
  std::size_t k = 2;
  spectral::Algorithm spectral_algorithm = spectral::Algorithm::njw;
  fusion::ScoreMode fusion_mode = fusion::ScoreMode::vs_full;

  // gnn / dgi
  std::size_t hidden_dim = 8;
  double kappa = 0.9;
  double gnn_tol = 1e-6;
  std::size_t gnn_max_iter = 200;
  std::size_t dgi_epochs = 200;
  double dgi_lr = 0.05;

  // forest
  std::size_t trees = 40;
  std::size_t tree_capacity = 256;
  std::size_t shingle = 4;
  rrcf::Aggregation score_aggregation = rrcf::Aggregation::mean;

  // evaluation
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  pipeline::ThresholdKind threshold_rule = pipeline::ThresholdKind::quantile;
  double threshold_q = 0.95;
  double threshold_value = 0.0;
  std::size_t runs = 3;

  std::string data_dir = "data";
  std::string out_dir = "out";

  pipeline::ThresholdRule threshold() const {
    return {threshold_rule, threshold_q, threshold_value};
  }
};

// ParseError / ValidationError with the offending key, legal range and line.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, const std::string& message, std::string key = {},
              std::string range = {}, std::size_t line = 0)
      : Error(code, message), key_(std::move(key)), range_(std::move(range)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  const std::string& range() const noexcept { return range_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::string range_;
  std::size_t line_;
};

// Flat `key = value` text; values are JSON scalars or bare words, `#` starts a
// comment. Applied on top of `base`, then validated.
RunConfig parse_config(std::string_view text, const RunConfig& base = {});
RunConfig load_config(const std::string& path, const RunConfig& base = {});

// `key=value`, same value syntax as the file.
void apply_override(RunConfig& config, std::string_view assignment);

// Range and cross-field checks; throws ConfigError(ValidationError).
void validate(const RunConfig& config);

// Every key in a fixed order, reals at 17 significant digits, followed by the
// per-stage seeds derived from the root seed. Parses back to the same config.
std::string config_echo(const RunConfig& config);

std::vector<std::string> config_keys();

// "40-44,70-74" style list.
std::vector<std::size_t> parse_index_list(std::string_view text, std::string_view key);
std::string format_index_list(const std::vector<std::size_t>& values);

std::string_view to_string(AnomalyMode m);

}  // namespace mvgad

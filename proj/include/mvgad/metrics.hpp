#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mvgad::pipeline {

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

struct MacroF1Options {
  // Classes to average over. Empty: the classes present in truth.
  std::vector<int> classes;
  // With an explicit class list, keep classes absent from truth (F1 = 0)
  // instead of skipping them.
  bool include_absent = false;
};

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                const MacroF1Options& options = {});

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// Swept over distinct scores from high to low; tied scores move together.
std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<bool>& truth);

// Trapezoidal area. Throws MalformedCurve unless the curve starts at (0,0),
// ends at (1,1) and is non-decreasing in both coordinates.
double auc(const std::vector<RocPoint>& roc);

// Vertical average over every breakpoint of every curve, keeping both limits
// at vertical jumps, so auc(average) = mean of the AUCs.
std::vector<RocPoint> average_roc(const std::vector<std::vector<RocPoint>>& curves);

enum class ThresholdKind { quantile, fixed };

struct ThresholdRule {
  ThresholdKind kind = ThresholdKind::quantile;
  double q = 0.95;
  double value = 0.0;
};

// Linear-interpolation quantile (type 7).
double quantile(std::vector<double> values, double q);

double threshold_for(const std::vector<double>& scores, const ThresholdRule& rule);

// label 1 where score > threshold.
std::vector<int> apply_threshold(const std::vector<double>& scores, double threshold);

struct RunEvaluation {
  std::uint64_t seed = 0;
  double threshold = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double auc = 0.0;
  std::vector<RocPoint> roc;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<RocPoint> roc;
  double auc = 0.0;
  std::size_t runs = 0;
  ThresholdRule threshold_rule;
  std::vector<RunEvaluation> per_run;
};

struct RunScores {
  std::uint64_t seed = 0;
  std::vector<double> scores;
  std::vector<bool> truth;
};

EvalReport evaluate(const std::vector<RunScores>& runs, const ThresholdRule& rule);

// Pretty-printed JSON; reals are shortest round-trip decimals.
std::string to_json(const EvalReport& report);

std::string_view to_string(ThresholdKind k);

}  // namespace mvgad::pipeline

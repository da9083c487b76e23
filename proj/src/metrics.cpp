#include "mvgad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "mvgad/error.hpp"

namespace mvgad::pipeline {

namespace {

void same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    fail(ErrorCode::LengthMismatch,
         "lengths differ: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

// tpr just before (left) and just after (right) the curve crosses fpr = x.
std::pair<double, double> limits_at(const std::vector<RocPoint>& roc, double x) {
  auto first = std::lower_bound(roc.begin(), roc.end(), x,
                                [](const RocPoint& p, double v) { return p.fpr < v; });
  auto last = std::upper_bound(roc.begin(), roc.end(), x,
                               [](double v, const RocPoint& p) { return v < p.fpr; });
  if (first != last) return {first->tpr, std::prev(last)->tpr};
  // strictly inside a segment
  const RocPoint& a = *std::prev(first);
  const RocPoint& b = *first;
  const double t = a.tpr + (b.tpr - a.tpr) * (x - a.fpr) / (b.fpr - a.fpr);
  return {t, t};
}

}  // namespace

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  same_length(pred.size(), truth.size());
  if (truth.empty()) fail(ErrorCode::EmptyInput, "accuracy of an empty label vector");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                const MacroF1Options& options) {
  same_length(pred.size(), truth.size());
  if (truth.empty()) fail(ErrorCode::EmptyInput, "macro-F1 of an empty label vector");
  const std::set<int> in_truth(truth.begin(), truth.end());
  std::vector<int> classes;
  if (options.classes.empty()) {
    classes.assign(in_truth.begin(), in_truth.end());
  } else {
    for (int c : std::set<int>(options.classes.begin(), options.classes.end()))
      if (options.include_absent || in_truth.count(c)) classes.push_back(c);
  }
  if (classes.empty()) fail(ErrorCode::DegenerateLabels, "no class of the list occurs in truth");
  double total = 0.0;
  for (int c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool p = pred[i] == c, t = truth[i] == c;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
    total += f1(tp, fp, fn);
  }
  return total / static_cast<double>(classes.size());
}

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<bool>& truth) {
  same_length(scores.size(), truth.size());
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorCode::NonFiniteValue, "non-finite score");
  }
  const auto positives = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), true));
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) {
    fail(ErrorCode::DegenerateLabels, "ROC needs at least one positive and one negative label");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> roc{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (truth[order[i]] ? tp : fp) += 1;
    roc.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                   static_cast<double>(tp) / static_cast<double>(positives)});
  }
  if (!(roc.back() == RocPoint{1.0, 1.0})) roc.push_back({1.0, 1.0});
  return roc;
}

double auc(const std::vector<RocPoint>& roc) {
  if (roc.size() < 2 || !(roc.front() == RocPoint{0.0, 0.0}) ||
      !(roc.back() == RocPoint{1.0, 1.0})) {
    fail(ErrorCode::MalformedCurve, "ROC must run from (0,0) to (1,1)");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    const RocPoint& a = roc[i - 1];
    const RocPoint& b = roc[i];
    if (b.fpr < a.fpr || b.tpr < a.tpr || b.fpr > 1.0 || b.tpr > 1.0) {
      fail(ErrorCode::MalformedCurve, "ROC point " + std::to_string(i) + " decreases or leaves [0,1]");
    }
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

std::vector<RocPoint> average_roc(const std::vector<std::vector<RocPoint>>& curves) {
  if (curves.empty()) fail(ErrorCode::EmptyInput, "no ROC curves to average");
  for (const auto& c : curves) auc(c);  // validates
  std::set<double> grid;
  for (const auto& c : curves)
    for (const auto& p : c) grid.insert(p.fpr);
  const double n = static_cast<double>(curves.size());
  std::vector<RocPoint> out;
  for (double x : grid) {
    double left = 0.0, right = 0.0;
    for (const auto& c : curves) {
      const auto [l, r] = limits_at(c, x);
      left += l;
      right += r;
    }
    out.push_back({x, left / n});
    if (right != left) out.push_back({x, right / n});
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "quantile of an empty vector");
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorCode::InvalidConfig, "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double threshold_for(const std::vector<double>& scores, const ThresholdRule& rule) {
  return rule.kind == ThresholdKind::quantile ? quantile(scores, rule.q) : rule.value;
}

std::vector<int> apply_threshold(const std::vector<double>& scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

EvalReport evaluate(const std::vector<RunScores>& runs, const ThresholdRule& rule) {
  if (runs.empty()) fail(ErrorCode::EmptyInput, "evaluation needs at least one run");
  EvalReport report;
  report.runs = runs.size();
  report.threshold_rule = rule;
  std::vector<std::vector<RocPoint>> curves;
  for (const auto& run : runs) {
    same_length(run.scores.size(), run.truth.size());
    RunEvaluation ev;
    ev.seed = run.seed;
    ev.threshold = threshold_for(run.scores, rule);
    const auto pred = apply_threshold(run.scores, ev.threshold);
    std::vector<int> truth(run.truth.begin(), run.truth.end());
    ev.accuracy = accuracy(pred, truth);
    ev.macro_f1 = macro_f1(pred, truth);
    ev.roc = roc_points(run.scores, run.truth);
    ev.auc = auc(ev.roc);
    report.accuracy += ev.accuracy;
    report.macro_f1 += ev.macro_f1;
    curves.push_back(ev.roc);
    report.per_run.push_back(std::move(ev));
  }
  const double n = static_cast<double>(runs.size());
  report.accuracy /= n;
  report.macro_f1 /= n;
  report.roc = average_roc(curves);
  report.auc = auc(report.roc);
  return report;
}

namespace {

nlohmann::ordered_json roc_json(const std::vector<RocPoint>& roc) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : roc) arr.push_back({p.fpr, p.tpr});
  return arr;
}

}  // namespace

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["macro_f1"] = report.macro_f1;
  j["auc"] = report.auc;
  j["runs"] = report.runs;
  nlohmann::ordered_json rule;
  rule["kind"] = std::string(to_string(report.threshold_rule.kind));
  if (report.threshold_rule.kind == ThresholdKind::quantile) {
    rule["q"] = report.threshold_rule.q;
  } else {
    rule["value"] = report.threshold_rule.value;
  }
  j["threshold_rule"] = rule;
  j["roc"] = roc_json(report.roc);
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.per_run) {
    nlohmann::ordered_json e;
    e["seed"] = r.seed;
    e["threshold"] = r.threshold;
    e["accuracy"] = r.accuracy;
    e["macro_f1"] = r.macro_f1;
    e["auc"] = r.auc;
    e["roc"] = roc_json(r.roc);
    runs.push_back(std::move(e));
  }
  j["per_run"] = runs;
  return j.dump(2) + "\n";
}

std::string_view to_string(ThresholdKind k) { return k == ThresholdKind::quantile ? "quantile" : "fixed"; }

}  // namespace mvgad::pipeline

#include "mvgad/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mvgad/format.hpp"
#include "mvgad/rng.hpp"

namespace mvgad {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& key, const std::string& range,
                          const std::string& got) {
  throw ConfigError(ErrorCode::ValidationError,
                    "invalid value " + got + " for '" + key + "'; legal range " + range, key,
                    range);
}

std::string shown(const json& v) { return v.dump(); }

struct Key {
  std::string name;
  std::string range;
  std::function<void(RunConfig&, const json&)> set;
  std::function<std::string(const RunConfig&)> get;
  std::function<bool(const RunConfig&)> ok;
};

std::string json_str(std::string_view s) { return json(std::string(s)).dump(); }

std::uint64_t as_unsigned(const Key& k, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  invalid(k.name, k.range, shown(v));
}

double as_real(const Key& k, const json& v) {
  if (v.is_number()) return v.get<double>();
  invalid(k.name, k.range, shown(v));
}

std::string as_string(const Key& k, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  invalid(k.name, k.range, shown(v));
}

template <typename T>
Key count_key(std::string name, T RunConfig::*field, std::uint64_t lo, std::uint64_t hi) {
  Key k;
  k.name = std::move(name);
  k.range = "integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  k.set = [field, k, lo, hi](RunConfig& c, const json& v) {
    const std::uint64_t x = as_unsigned(k, v);
    if (x < lo || x > hi) invalid(k.name, k.range, shown(v));
    c.*field = static_cast<T>(x);
  };
  k.get = [field](const RunConfig& c) { return std::to_string(c.*field); };
  k.ok = [field, lo, hi](const RunConfig& c) {
    return static_cast<std::uint64_t>(c.*field) >= lo && static_cast<std::uint64_t>(c.*field) <= hi;
  };
  return k;
}

struct Interval {
  double lo, hi;
  bool lo_open, hi_open;

  bool contains(double x) const {
    if (!std::isfinite(x)) return false;
    return (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
  }
  std::string text() const {
    auto num = [](double v) {
      if (std::isinf(v)) return std::string(v > 0 ? "∞" : "-∞");
      std::ostringstream s;
      s << v;
      return s.str();
    };
    return std::string(lo_open ? "(" : "[") + num(lo) + ", " + num(hi) + (hi_open ? ")" : "]");
  }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

Key real_key(std::string name, double RunConfig::*field, Interval iv) {
  Key k;
  k.name = std::move(name);
  k.range = iv.text();
  k.set = [field, k, iv](RunConfig& c, const json& v) {
    const double x = as_real(k, v);
    if (!iv.contains(x)) invalid(k.name, k.range, shown(v));
    c.*field = x;
  };
  k.get = [field](const RunConfig& c) { return format_real(c.*field); };
  k.ok = [field, iv](const RunConfig& c) { return iv.contains(c.*field); };
  return k;
}

template <typename E>
Key enum_key(std::string name, E RunConfig::*field, std::vector<E> values) {
  Key k;
  k.name = std::move(name);
  k.range = "one of {";
  for (std::size_t i = 0; i < values.size(); ++i) {
    k.range += (i ? ", " : "") + std::string(to_string(values[i]));
  }
  k.range += "}";
  k.set = [field, k, values](RunConfig& c, const json& v) {
    const std::string s = as_string(k, v);
    for (E e : values) {
      if (to_string(e) == s) {
        c.*field = e;
        return;
      }
    }
    invalid(k.name, k.range, shown(v));
  };
  k.get = [field](const RunConfig& c) { return json_str(to_string(c.*field)); };
  k.ok = [](const RunConfig&) { return true; };
  return k;
}

Key string_key(std::string name, std::string RunConfig::*field) {
  Key k;
  k.name = std::move(name);
  k.range = "non-empty string";
  k.set = [field, k](RunConfig& c, const json& v) {
    const std::string s = as_string(k, v);
    if (s.empty()) invalid(k.name, k.range, shown(v));
    c.*field = s;
  };
  k.get = [field](const RunConfig& c) { return json_str(c.*field); };
  k.ok = [field](const RunConfig& c) { return !(c.*field).empty(); };
  return k;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> t;
    {
      Key k;
      k.name = "seed";
      k.range = "integer in [0, 2^64)";
      k.set = [k](RunConfig& c, const json& v) { c.seed = as_unsigned(k, v); };
      k.get = [](const RunConfig& c) { return std::to_string(c.seed); };
      k.ok = [](const RunConfig&) { return true; };
      t.push_back(k);
    }
    t.push_back(count_key("timesteps", &RunConfig::timesteps, 2, 100000));
    t.push_back(count_key("nodes", &RunConfig::nodes, 4, 5000));
    t.push_back(count_key("blocks", &RunConfig::blocks, 2, 64));
    t.push_back(real_key("p_in", &RunConfig::p_in, {0, 1, true, false}));
    t.push_back(real_key("p_out", &RunConfig::p_out, {0, 1, false, false}));
    {
      Key k;
      k.name = "anomaly_timesteps";
      k.range = "comma list of t or a-b ranges within [0, timesteps)";
      k.set = [k](RunConfig& c, const json& v) {
        c.anomaly_timesteps = parse_index_list(as_string(k, v), k.name);
      };
      k.get = [](const RunConfig& c) { return json_str(format_index_list(c.anomaly_timesteps)); };
      k.ok = [](const RunConfig& c) {
        for (auto t : c.anomaly_timesteps)
          if (t >= c.timesteps) return false;
        return true;
      };
      t.push_back(k);
    }
    t.push_back(enum_key("anomaly_mode", &RunConfig::anomaly_mode,
                         {AnomalyMode::pout_boost, AnomalyMode::block_merge}));
    t.push_back(real_key("pout_factor", &RunConfig::pout_factor, {1, kInf, false, true}));
    {
      Key k;
      k.name = "view_dims";
      k.range = "comma list of at least 2 integers in [1, 1000]";
      k.set = [k](RunConfig& c, const json& v) {
        const std::string text = as_string(k, v);
        std::vector<std::size_t> dims;
        std::string_view rest = text;
        while (true) {
          const auto comma = rest.find(',');
          long long d = 0;
          try {
            d = parse_integer(rest.substr(0, comma), k.name);
          } catch (const Error&) {
            invalid(k.name, k.range, shown(v));
          }
          if (d < 1 || d > 1000) invalid(k.name, k.range, shown(v));
          dims.push_back(static_cast<std::size_t>(d));
          if (comma == std::string_view::npos) break;
          rest = rest.substr(comma + 1);
        }
        if (dims.size() < 2) invalid(k.name, k.range, shown(v));
        c.view_dims = dims;
      };
      k.get = [](const RunConfig& c) {
        std::string s;
        for (std::size_t i = 0; i < c.view_dims.size(); ++i)
          s += (i ? "," : "") + std::to_string(c.view_dims[i]);
        return json_str(s);
      };
      k.ok = [](const RunConfig& c) {
        if (c.view_dims.size() < 2) return false;
        for (auto d : c.view_dims)
          if (d < 1 || d > 1000) return false;
        return true;
      };
      t.push_back(k);
    }
    t.push_back(real_key("feature_separation", &RunConfig::feature_separation, {0, kInf, true, true}));
    t.push_back(real_key("inconsistent_fraction", &RunConfig::inconsistent_fraction, {0, 0.5, false, false}));
    t.push_back(real_key("pca_variance", &RunConfig::pca_variance, {0, 1, true, false}));
    {
      Key k;
      k.name = "sigma";
      k.range = "(0, ∞)";
      k.set = [k](RunConfig& c, const json& v) {
        if (v.is_string() && v.get<std::string>() == "auto") {
          c.sigma.reset();
          return;
        }
        const double x = as_real(k, v);
        if (!(x > 0.0) || !std::isfinite(x)) invalid(k.name, k.range, shown(v));
        c.sigma = x;
      };
      k.get = [](const RunConfig& c) { return c.sigma ? format_real(*c.sigma) : json_str("auto"); };
      k.ok = [](const RunConfig& c) { return !c.sigma || (*c.sigma > 0.0 && std::isfinite(*c.sigma)); };
      t.push_back(k);
    }
    t.push_back(count_key("k", &RunConfig::k, 2, 64));
    t.push_back(enum_key("spectral_algorithm", &RunConfig::spectral_algorithm,
                         {spectral::Algorithm::basic, spectral::Algorithm::njw,
                          spectral::Algorithm::ms, spectral::Algorithm::slh}));
    t.push_back(enum_key("fusion_mode", &RunConfig::fusion_mode,
                         {fusion::ScoreMode::vs_full, fusion::ScoreMode::pairwise}));
    t.push_back(count_key("hidden_dim", &RunConfig::hidden_dim, 1, 256));
    t.push_back(real_key("kappa", &RunConfig::kappa, {0, 1, true, true}));
    t.push_back(real_key("gnn_tol", &RunConfig::gnn_tol, {0, 1, true, true}));
    t.push_back(count_key("gnn_max_iter", &RunConfig::gnn_max_iter, 1, 100000));
    t.push_back(count_key("dgi_epochs", &RunConfig::dgi_epochs, 0, 100000));
    t.push_back(real_key("dgi_lr", &RunConfig::dgi_lr, {0, kInf, true, true}));
    t.push_back(count_key("trees", &RunConfig::trees, 1, 10000));
    t.push_back(count_key("tree_capacity", &RunConfig::tree_capacity, 1, 1000000));
    t.push_back(count_key("shingle", &RunConfig::shingle, 1, 1000));
    t.push_back(enum_key("score_aggregation", &RunConfig::score_aggregation,
                         {rrcf::Aggregation::mean, rrcf::Aggregation::median}));
    t.push_back(real_key("train_frac", &RunConfig::train_frac, {0, 1, true, true}));
    t.push_back(real_key("val_frac", &RunConfig::val_frac, {0, 1, true, true}));
    t.push_back(real_key("test_frac", &RunConfig::test_frac, {0, 1, true, true}));
    t.push_back(enum_key("threshold_rule", &RunConfig::threshold_rule,
                         {pipeline::ThresholdKind::quantile, pipeline::ThresholdKind::fixed}));
    t.push_back(real_key("threshold_q", &RunConfig::threshold_q, {0, 1, false, false}));
    t.push_back(real_key("threshold_value", &RunConfig::threshold_value, {-kInf, kInf, true, true}));
    t.push_back(count_key("runs", &RunConfig::runs, 1, 1000));
    t.push_back(string_key("data_dir", &RunConfig::data_dir));
    t.push_back(string_key("out_dir", &RunConfig::out_dir));
    return t;
  }();
  return table;
}

const Key* find_key(std::string_view name) {
  for (const auto& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_error(const std::string& msg, std::size_t line) {
  throw ConfigError(ErrorCode::ParseError,
                    line ? "line " + std::to_string(line) + ": " + msg : msg, {}, {}, line);
}

// JSON scalar, or the raw text as a string when it is not valid JSON.
json scalar(std::string_view text, std::size_t line) {
  json v;
  try {
    v = json::parse(text);
  } catch (const json::parse_error&) {
    return json(std::string(text));
  }
  if (v.is_structured() || v.is_null()) parse_error("value must be a scalar", line);
  return v;
}

void assign(RunConfig& c, std::string_view line_text, std::size_t line) {
  const auto eq = line_text.find('=');
  if (eq == std::string_view::npos) parse_error("expected 'key = value'", line);
  const std::string_view key = trim(line_text.substr(0, eq));
  const std::string_view value = trim(line_text.substr(eq + 1));
  if (key.empty()) parse_error("missing key", line);
  if (value.empty()) parse_error("missing value for '" + std::string(key) + "'", line);
  const Key* k = find_key(key);
  if (!k) {
    throw ConfigError(ErrorCode::ValidationError, "unknown key '" + std::string(key) + "'",
                      std::string(key), "a known key", line);
  }
  k->set(c, scalar(value, line));
}

// strips a # comment that is not inside a quoted string
std::string_view strip_comment(std::string_view s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

}  // namespace

std::vector<std::size_t> parse_index_list(std::string_view text, std::string_view key) {
  std::vector<std::size_t> out;
  const std::string name(key);
  const std::string range = "comma list of non-negative integers or a-b ranges";
  std::string_view rest = trim(text);
  if (rest.empty()) return out;
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    const auto dash = item.find('-');
    auto num = [&](std::string_view s) {
      try {
        const long long v = parse_integer(s, name);
        if (v < 0) invalid(name, range, json_str(text));
        return static_cast<std::size_t>(v);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error&) {
        invalid(name, range, json_str(text));
      }
    };
    if (dash == std::string_view::npos) {
      out.push_back(num(item));
    } else {
      const std::size_t a = num(item.substr(0, dash)), b = num(item.substr(dash + 1));
      if (b < a) invalid(name, range, json_str(text));
      for (std::size_t t = a; t <= b; ++t) out.push_back(t);
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string format_index_list(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j + 1 < values.size() && values[j + 1] == values[j] + 1) ++j;
    if (!s.empty()) s += ",";
    s += std::to_string(values[i]);
    if (j > i) s += "-" + std::to_string(values[j]);
    i = j + 1;
  }
  return s;
}

void validate(const RunConfig& c) {
  for (const auto& k : keys()) {
    if (!k.ok(c)) invalid(k.name, k.range, k.get(c));
  }
  if (c.blocks > c.nodes) invalid("blocks", "integer in [2, nodes]", std::to_string(c.blocks));
  if (c.k > c.nodes) invalid("k", "integer in [2, nodes]", std::to_string(c.k));
  if (c.shingle > c.timesteps) invalid("shingle", "integer in [1, timesteps]", std::to_string(c.shingle));
  const double sum = c.train_frac + c.val_frac + c.test_frac;
  if (std::abs(sum - 1.0) > 1e-9) {
    invalid("train_frac", "train_frac + val_frac + test_frac = 1 (+-1e-9)", format_real(sum));
  }
}

RunConfig parse_config(std::string_view text, const RunConfig& base) {
  RunConfig c = base;
  std::size_t line = 0;
  while (!text.empty()) {
    ++line;
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    const std::string_view body = trim(strip_comment(raw));
    if (!body.empty()) assign(c, body, line);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), base);
}

void apply_override(RunConfig& config, std::string_view assignment) {
  if (assignment.find('=') == std::string_view::npos) {
    parse_error("override '" + std::string(assignment) + "' is not key=value", 0);
  }
  assign(config, trim(assignment), 0);
}

std::string config_echo(const RunConfig& c) {
  std::string out = "# resolved configuration\n";
  out += "# stage seeds:";
  for (const char* stage : {"gen_graph", "gen_features", "cluster", "fusion", "gnn", "dgi", "rrcf"}) {
    out += std::string(" ") + stage + "=" + std::to_string(derive_seed(c.seed, stage));
  }
  out += "\n# run seeds:";
  for (std::size_t r = 0; r < c.runs; ++r) out += " " + std::to_string(derive_seed(c.seed, "run", r));
  out += "\n";
  for (const auto& k : keys()) out += k.name + " = " + k.get(c) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.name);
  return out;
}

std::string_view to_string(AnomalyMode m) {
  return m == AnomalyMode::pout_boost ? "pout_boost" : "block_merge";
}

}  // namespace mvgad

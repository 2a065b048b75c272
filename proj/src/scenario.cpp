#include "phishsim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "phishsim/io.hpp"

#ifndef PHISHSIM_DEFAULT_DATA_DIR
#define PHISHSIM_DEFAULT_DATA_DIR "data"
#endif

namespace phishsim {

namespace fs = std::filesystem;

SimTime ScenarioConfig::duration_seconds() const {
  return static_cast<SimTime>(std::llround(duration_hours * kSecondsPerHour));
}

SimTime ScenarioConfig::warmup_seconds() const {
  return static_cast<SimTime>(std::llround(warmup_minutes * kSecondsPerMinute));
}

std::string to_string(const Diagnostic& d) {
  return d.path.empty() ? d.message : d.path + ": " + d.message;
}

namespace {

std::string join_messages(const std::vector<Diagnostic>& diags) {
  std::string msg = "invalid scenario config";
  for (const auto& d : diags) msg += "\n  " + to_string(d);
  return msg;
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : InvalidArgument(join_messages(diagnostics)), diagnostics_(std::move(diagnostics)) {}

fs::path default_data_dir() {
  if (const char* env = std::getenv("PHISHSIM_DATA_DIR"); env != nullptr && *env != '\0')
    return fs::path(env);
  return fs::path(PHISHSIM_DEFAULT_DATA_DIR);
}

fs::path preset_path(std::string_view name, const fs::path& data_dir) {
  for (auto known : kPresetNames)
    if (known == name) return data_dir / "presets" / (std::string(name) + ".yaml");
  throw InvalidArgument("unknown preset '" + std::string(name) + "' (expected exp1..exp4)");
}

namespace {

std::string child_path(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

/// Splits "a.b: message" produced by validate() helpers into a diagnostic.
Diagnostic from_exception_message(std::string_view msg, std::string_view fallback_path) {
  auto pos = msg.find(": ");
  if (pos != std::string_view::npos && msg.substr(0, pos).find(' ') == std::string_view::npos)
    return {std::string(msg.substr(0, pos)), std::string(msg.substr(pos + 2))};
  return {std::string(fallback_path), std::string(msg)};
}

class Reader {
 public:
  std::vector<Diagnostic> diags;

  void error(const std::string& path, std::string message) {
    diags.push_back({path, std::move(message)});
  }

  bool require_map(const YAML::Node& n, const std::string& path) {
    if (n.IsMap()) return true;
    error(path, "expected a mapping");
    return false;
  }

  void check_keys(const YAML::Node& n, const std::string& path,
                  std::initializer_list<std::string_view> allowed) {
    if (!n.IsMap()) return;
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) error(child_path(path, key), "unknown field");
    }
  }

  template <typename T>
  bool get(const YAML::Node& parent, std::string_view key, const std::string& path, T& dst,
           const char* type_name) {
    const YAML::Node n = parent[std::string(key)];
    if (!n.IsDefined()) return false;
    const std::string p = child_path(path, key);
    if (!n.IsScalar()) {
      error(p, std::string("expected ") + type_name);
      return false;
    }
    try {
      dst = n.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      error(p, std::string("expected ") + type_name + ", got '" + n.Scalar() + "'");
      return false;
    }
  }

  bool get_double(const YAML::Node& parent, std::string_view key, const std::string& path,
                  double& dst) {
    double v = dst;
    if (!get(parent, key, path, v, "a number")) return false;
    if (!std::isfinite(v)) {
      error(child_path(path, key), "must be finite");
      return false;
    }
    dst = v;
    return true;
  }

  template <typename Int>
  bool get_count(const YAML::Node& parent, std::string_view key, const std::string& path,
                 Int& dst) {
    long long v = 0;
    if (!get(parent, key, path, v, "an integer")) return false;
    if (v < 0) {
      error(child_path(path, key), "must be >= 0");
      return false;
    }
    dst = static_cast<Int>(v);
    return true;
  }
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

std::optional<Theme> theme_key(Reader& r, const std::string& key, const std::string& path) {
  auto t = try_parse_theme(key);
  if (!t) r.error(child_path(path, key), "unknown theme (expected politics, sports or entertainment)");
  return t;
}

void read_distribution(Reader& r, const YAML::Node& n, const std::string& path,
                       CountDistribution& dst) {
  if (!n.IsDefined()) return;
  if (!r.require_map(n, path)) return;
  r.check_keys(n, path, {"dist", "value", "min", "max", "mu", "sigma"});
  std::string kind;
  if (!r.get(n, "dist", path, kind, "a string")) {
    r.error(child_path(path, "dist"), "required (constant, uniform or lognormal)");
    return;
  }
  CountDistribution d;
  if (kind == "constant") {
    d.kind = CountDistribution::Kind::constant;
    if (!r.get_double(n, "value", path, d.a)) r.error(child_path(path, "value"), "required");
  } else if (kind == "uniform") {
    d.kind = CountDistribution::Kind::uniform;
    if (!r.get_double(n, "min", path, d.a)) r.error(child_path(path, "min"), "required");
    if (!r.get_double(n, "max", path, d.b)) r.error(child_path(path, "max"), "required");
  } else if (kind == "lognormal") {
    d.kind = CountDistribution::Kind::lognormal;
    if (!r.get_double(n, "mu", path, d.a)) r.error(child_path(path, "mu"), "required");
    if (!r.get_double(n, "sigma", path, d.b)) r.error(child_path(path, "sigma"), "required");
  } else {
    r.error(child_path(path, "dist"), "unknown distribution '" + kind + "'");
    return;
  }
  try {
    d.validate(path);
  } catch (const InvalidArgument& e) {
    r.diags.push_back(from_exception_message(e.what(), path));
  }
  dst = d;
}

nlohmann::json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : n) j[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& item : n) j.push_back(yaml_to_json(item));
      return j;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = n.Scalar();
      if (s == "true") return true;
      if (s == "false") return false;
      try {
        return n.as<double>();
      } catch (const YAML::Exception&) {
        return s;
      }
    }
    default:
      return nullptr;
  }
}

void read_policy_fields(Reader& r, const YAML::Node& n, const std::string& path, BotPolicy& p) {
  r.get(n, "mention_target", path, p.mention_target, "a boolean");
  r.get(n, "diversify_baits", path, p.diversify_baits, "a boolean");
  r.get(n, "intersperse_legit", path, p.intersperse_legit, "a boolean");
  r.get(n, "use_shortener", path, p.use_shortener, "a boolean");
  long long legit = p.legit_per_attack;
  if (r.get(n, "legit_per_attack", path, legit, "an integer")) p.legit_per_attack = static_cast<int>(legit);
  r.get_double(n, "skip_fraction", path, p.skip_fraction);
  if (const YAML::Node m = n["max_rate"]; m.IsDefined()) {
    if (m.IsNull()) {
      p.max_rate.reset();
    } else {
      double v = 0.0;
      if (r.get_double(n, "max_rate", path, v)) p.max_rate = v;
    }
  }
  if (const YAML::Node np = n["night_pause"]; np.IsDefined()) {
    const std::string pp = child_path(path, "night_pause");
    if (np.IsNull()) {
      p.night_pause.reset();
    } else if (np.IsSequence() && np.size() == 2) {
      try {
        p.night_pause = NightPause{np[0].as<int>(), np[1].as<int>()};
      } catch (const YAML::Exception&) {
        r.error(pp, "expected [start_hour, end_hour]");
      }
    } else {
      r.error(pp, "expected null or [start_hour, end_hour]");
    }
  }
}

void apply_override(YAML::Node node, const std::vector<std::string>& keys, std::size_t i,
                    const YAML::Node& value) {
  const std::string& key = keys[i];
  const bool last = i + 1 == keys.size();
  if (node.IsSequence()) {
    char* end = nullptr;
    const unsigned long idx = std::strtoul(key.c_str(), &end, 10);
    if (end == key.c_str() || *end != '\0' || idx >= node.size())
      throw InvalidArgument("no element '" + key + "' in sequence");
    if (last) {
      node[idx] = value;
    } else {
      apply_override(node[idx], keys, i + 1, value);
    }
    return;
  }
  if (!node.IsMap() && !node.IsNull()) throw InvalidArgument("'" + key + "' is under a scalar");
  if (last) {
    node[key] = value;
    return;
  }
  if (!node[key].IsDefined() || node[key].IsNull()) node[key] = YAML::Node(YAML::NodeType::Map);
  apply_override(node[key], keys, i + 1, value);
}

struct Parsed {
  ScenarioConfig cfg;
  std::vector<Diagnostic> diags;
};

Parsed parse(const fs::path& path, std::span<const std::string> overrides) {
  Parsed out;
  Reader r;
  ScenarioConfig& cfg = out.cfg;
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    out.diags.push_back({"", "cannot read config file " + path.string()});
    return out;
  } catch (const YAML::Exception& e) {
    out.diags.push_back({"", path.string() + ": " + e.what()});
    return out;
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);

  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      r.error("--override", "'" + ov + "': expected key=value");
      continue;
    }
    std::vector<std::string> keys;
    std::stringstream ks(ov.substr(0, eq));
    for (std::string k; std::getline(ks, k, '.');) keys.push_back(k);
    try {
      apply_override(root, keys, 0, YAML::Load(ov.substr(eq + 1)));
    } catch (const std::exception& e) {
      r.error(ov.substr(0, eq), std::string("cannot apply override: ") + e.what());
    }
  }

  if (!r.require_map(root, "")) {
    out.diags = r.diags;
    return out;
  }
  const fs::path base = fs::absolute(path).parent_path();

  r.check_keys(root, "",
               {"name", "mode", "seed", "start_day", "duration_hours", "warmup_minutes",
                "bot_tick_seconds", "buffer_capacity", "keywords", "corpus", "landing",
                "population", "organic", "sampling", "detection", "victim", "bots", "capture"});
  r.get(root, "name", "", cfg.name, "a string");
  std::string mode = "campaign";
  if (r.get(root, "mode", "", mode, "a string")) {
    if (mode == "campaign") {
      cfg.mode = RunMode::campaign;
    } else if (mode == "capture") {
      cfg.mode = RunMode::capture;
    } else {
      r.error("mode", "expected campaign or capture");
    }
  }
  r.get(root, "seed", "", cfg.seed, "an unsigned integer");
  r.get(root, "start_day", "", cfg.start_day, "an integer");
  if (cfg.start_day < 0) r.error("start_day", "must be >= 0");
  r.get_double(root, "duration_hours", "", cfg.duration_hours);
  if (!(cfg.duration_hours > 0.0)) r.error("duration_hours", "must be > 0");
  r.get_double(root, "warmup_minutes", "", cfg.warmup_minutes);
  if (cfg.warmup_minutes < 0.0) r.error("warmup_minutes", "must be >= 0");
  r.get_count(root, "bot_tick_seconds", "", cfg.bot_tick_seconds);
  if (cfg.bot_tick_seconds < 1) r.error("bot_tick_seconds", "must be >= 1");
  r.get_count(root, "buffer_capacity", "", cfg.buffer_capacity);
  if (cfg.buffer_capacity < 1) r.error("buffer_capacity", "must be >= 1");

  // keywords
  if (const YAML::Node kw = root["keywords"]; !kw.IsDefined()) {
    r.error("keywords", "required");
  } else if (r.require_map(kw, "keywords")) {
    for (const auto& kv : kw) {
      const auto key = kv.first.as<std::string>();
      auto theme = theme_key(r, key, "keywords");
      std::string file;
      if (!r.get(kw, key, "keywords", file, "a file path") || !theme) continue;
      cfg.keyword_files[*theme] = resolve(base, file);
    }
  }

  if (const YAML::Node c = root["corpus"]; c.IsDefined() && r.require_map(c, "corpus")) {
    r.check_keys(c, "corpus", {"headlines", "benign"});
    std::string s;
    if (r.get(c, "headlines", "corpus", s, "a file path")) cfg.headlines_file = resolve(base, s);
    if (r.get(c, "benign", "corpus", s, "a file path")) cfg.benign_file = resolve(base, s);
  }

  if (const YAML::Node l = root["landing"]; l.IsDefined() && r.require_map(l, "landing")) {
    r.check_keys(l, "landing", {"project_document", "transport", "base_url"});
    std::string s;
    if (r.get(l, "project_document", "landing", s, "a file path"))
      cfg.project_document = resolve(base, s);
    if (r.get(l, "transport", "landing", s, "a string")) {
      if (s == "in_process") {
        cfg.transport = Transport::in_process;
      } else if (s == "http") {
        cfg.transport = Transport::http;
      } else {
        r.error("landing.transport", "expected in_process or http");
      }
    }
    r.get(l, "base_url", "landing", cfg.landing_base_url, "a string");
  }

  if (const YAML::Node p = root["population"]; !p.IsDefined()) {
    r.error("population", "required");
  } else if (r.require_map(p, "population")) {
    r.check_keys(p, "population",
                 {"accounts", "followers", "following", "posts", "age_days", "location_tags",
                  "location_probability"});
    if (const YAML::Node a = p["accounts"]; a.IsDefined() && r.require_map(a, "population.accounts")) {
      for (const auto& kv : a) {
        const auto key = kv.first.as<std::string>();
        auto theme = theme_key(r, key, "population.accounts");
        std::size_t n = 0;
        if (r.get_count(a, key, "population.accounts", n) && theme) cfg.population.accounts[*theme] = n;
      }
    }
    read_distribution(r, p["followers"], "population.followers", cfg.population.followers);
    read_distribution(r, p["following"], "population.following", cfg.population.following);
    read_distribution(r, p["posts"], "population.posts", cfg.population.posts);
    read_distribution(r, p["age_days"], "population.age_days", cfg.population.age_days);
    if (const YAML::Node t = p["location_tags"]; t.IsDefined()) {
      if (!t.IsSequence()) {
        r.error("population.location_tags", "expected a list of strings");
      } else {
        cfg.population.location_tags.clear();
        for (const auto& item : t) cfg.population.location_tags.push_back(item.as<std::string>());
      }
    }
    r.get_double(p, "location_probability", "population", cfg.population.location_probability);
    if (!(cfg.population.location_probability >= 0.0 && cfg.population.location_probability <= 1.0))
      r.error("population.location_probability", "must be in [0,1]");
  }
  if (cfg.population.total() == 0) r.error("population.accounts", "empty population");

  if (const YAML::Node o = root["organic"]; o.IsDefined() && r.require_map(o, "organic")) {
    r.check_keys(o, "organic", {"tweets_per_hour", "keyword_probability"});
    if (const YAML::Node t = o["tweets_per_hour"];
        t.IsDefined() && r.require_map(t, "organic.tweets_per_hour")) {
      for (const auto& kv : t) {
        const auto key = kv.first.as<std::string>();
        auto theme = theme_key(r, key, "organic.tweets_per_hour");
        double v = 0.0;
        if (!r.get_double(t, key, "organic.tweets_per_hour", v) || !theme) continue;
        if (v < 0.0) r.error("organic.tweets_per_hour." + key, "must be >= 0");
        cfg.organic.tweets_per_hour[*theme] = v;
      }
    }
    r.get_double(o, "keyword_probability", "organic", cfg.organic.keyword_probability);
    if (!(cfg.organic.keyword_probability >= 0.0 && cfg.organic.keyword_probability <= 1.0))
      r.error("organic.keyword_probability", "must be in [0,1]");
  }

  if (const YAML::Node s = root["sampling"]; s.IsDefined() && r.require_map(s, "sampling")) {
    r.check_keys(s, "sampling", {"bands"});
    r.get_count(s, "bands", "sampling", cfg.bands);
    if (cfg.bands < 1) r.error("sampling.bands", "must be >= 1");
  }
  if (const YAML::Node c = root["capture"]; c.IsDefined() && r.require_map(c, "capture")) {
    r.check_keys(c, "capture", {"histogram_bins"});
    r.get_count(c, "histogram_bins", "capture", cfg.histogram_bins);
    if (cfg.histogram_bins < 1) r.error("capture.histogram_bins", "must be >= 1");
  }

  if (const YAML::Node d = root["detection"]; d.IsDefined() && r.require_map(d, "detection")) {
    DetectionConfig& dc = cfg.detection;
    r.check_keys(d, "detection",
                 {"window_size", "mention_frac_threshold", "similarity_threshold",
                  "similarity_lookback", "continuous_hours_threshold", "rate_threshold",
                  "complaint_ban_count", "score_ban_threshold", "rule_points", "decay_per_hour",
                  "rule_cooldown_seconds"});
    r.get_count(d, "window_size", "detection", dc.window_size);
    r.get_double(d, "mention_frac_threshold", "detection", dc.mention_frac_threshold);
    r.get_double(d, "similarity_threshold", "detection", dc.similarity_threshold);
    r.get_count(d, "similarity_lookback", "detection", dc.similarity_lookback);
    r.get_count(d, "continuous_hours_threshold", "detection", dc.continuous_hours_threshold);
    r.get_count(d, "rate_threshold", "detection", dc.rate_threshold);
    r.get_count(d, "complaint_ban_count", "detection", dc.complaint_ban_count);
    r.get_double(d, "score_ban_threshold", "detection", dc.score_ban_threshold);
    r.get_double(d, "decay_per_hour", "detection", dc.decay_per_hour);
    r.get_count(d, "rule_cooldown_seconds", "detection", dc.rule_cooldown);
    if (const YAML::Node rp = d["rule_points"];
        rp.IsDefined() && r.require_map(rp, "detection.rule_points")) {
      const std::string pp = "detection.rule_points";
      r.check_keys(rp, pp, {"mention_saturation", "near_duplicate", "continuous_activity", "rate"});
      r.get_double(rp, "mention_saturation", pp, dc.rule_points.mention_saturation);
      r.get_double(rp, "near_duplicate", pp, dc.rule_points.near_duplicate);
      r.get_double(rp, "continuous_activity", pp, dc.rule_points.continuous_activity);
      r.get_double(rp, "rate", pp, dc.rule_points.rate);
    }
  }
  try {
    cfg.detection.validate();
  } catch (const InvalidArgument& e) {
    r.diags.push_back(from_exception_message(e.what(), "detection"));
  }

  if (const YAML::Node v = root["victim"]; v.IsDefined()) {
    try {
      cfg.victim = params_from_json(yaml_to_json(v));
    } catch (const InvalidArgument& e) {
      r.diags.push_back(from_exception_message(e.what(), "victim"));
    }
  }

  if (const YAML::Node b = root["bots"]; b.IsDefined() && !b.IsNull()) {
    if (!b.IsSequence()) {
      r.error("bots", "expected a list");
    } else {
      for (std::size_t i = 0; i < b.size(); ++i) {
        const std::string bp = "bots." + std::to_string(i);
        const YAML::Node n = b[i];
        if (!r.require_map(n, bp)) continue;
        r.check_keys(n, bp,
                     {"theme", "policy", "quota", "mention_target", "diversify_baits",
                      "intersperse_legit", "legit_per_attack", "use_shortener", "night_pause",
                      "skip_fraction", "max_rate"});
        BotConfig bot;
        std::string s;
        if (!r.get(n, "theme", bp, s, "a theme")) {
          r.error(bp + ".theme", "required");
        } else if (auto t = try_parse_theme(s)) {
          bot.theme = *t;
        } else {
          r.error(bp + ".theme", "unknown theme '" + s + "'");
        }
        if (!r.get(n, "policy", bp, s, "a policy version")) {
          r.error(bp + ".policy", "required (v2, v3 or v4)");
        } else {
          try {
            bot.policy = BotPolicy::preset(parse_policy_version(s));
          } catch (const InvalidArgument& e) {
            r.error(bp + ".policy", e.what());
          }
        }
        if (const YAML::Node q = n["quota"]; q.IsDefined() && !q.IsNull()) {
          std::size_t quota = 0;
          if (r.get_count(n, "quota", bp, quota)) bot.quota = quota;
        }
        read_policy_fields(r, n, bp, bot.policy);
        try {
          bot.policy.validate(bp);
        } catch (const InvalidArgument& e) {
          r.diags.push_back(from_exception_message(e.what(), bp));
        }
        cfg.bots.push_back(std::move(bot));
      }
    }
  }
  out.diags = std::move(r.diags);
  return out;
}

std::vector<std::string> read_keyword_file(const fs::path& p) {
  std::vector<std::string> out;
  for (std::string& line : io::read_lines(p)) {
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

void cross_check(const ScenarioConfig& cfg, std::vector<Diagnostic>& diags) {
  auto file_ok = [&](const fs::path& p, const std::string& field) {
    if (p.empty()) {
      diags.push_back({field, "required"});
      return false;
    }
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) {
      diags.push_back({field, "file not found: " + p.string()});
      return false;
    }
    return true;
  };
  for (const auto& [theme, file] : cfg.keyword_files) {
    const std::string field = "keywords." + std::string(to_string(theme));
    if (!file_ok(file, field)) continue;
    try {
      if (read_keyword_file(file).empty()) diags.push_back({field, "keyword list is empty"});
    } catch (const std::exception& e) {
      diags.push_back({field, e.what()});
    }
  }
  for (const auto& [theme, rate] : cfg.organic.tweets_per_hour) {
    if (rate > 0.0 && !cfg.keyword_files.count(theme))
      diags.push_back({"keywords." + std::string(to_string(theme)),
                       "required: organic traffic is configured for this theme"});
  }
  if (cfg.mode == RunMode::capture) {
    if (!cfg.bots.empty()) diags.push_back({"bots", "capture mode runs no bots"});
    return;
  }
  if (cfg.bots.empty()) diags.push_back({"bots", "campaign mode needs at least one bot"});
  const bool headlines_ok = file_ok(cfg.headlines_file, "corpus.headlines");
  if (file_ok(cfg.benign_file, "corpus.benign")) {
    try {
      load_benign_corpus(cfg.benign_file);
    } catch (const std::exception& e) {
      diags.push_back({"corpus.benign", e.what()});
    }
  }
  file_ok(cfg.project_document, "landing.project_document");
  std::optional<HeadlineCorpus> corpus;
  if (headlines_ok) {
    try {
      corpus = HeadlineCorpus::load(cfg.headlines_file);
    } catch (const std::exception& e) {
      diags.push_back({"corpus.headlines", e.what()});
    }
  }
  for (std::size_t i = 0; i < cfg.bots.size(); ++i) {
    const BotConfig& bot = cfg.bots[i];
    const std::string bp = "bots." + std::to_string(i);
    if (!cfg.keyword_files.count(bot.theme))
      diags.push_back({bp + ".theme", "no keyword list for theme " + std::string(to_string(bot.theme))});
    if (corpus && corpus->for_theme(bot.theme).empty())
      diags.push_back({bp + ".theme", "headline corpus has no entries for theme " +
                                          std::string(to_string(bot.theme))});
    auto acc = cfg.population.accounts.find(bot.theme);
    if (acc == cfg.population.accounts.end() || acc->second == 0)
      diags.push_back({bp + ".theme", "population has no accounts with this theme"});
  }
}

}  // namespace

std::vector<Diagnostic> validate_config(const fs::path& path, std::span<const std::string> overrides) {
  Parsed p = parse(path, overrides);
  if (p.diags.empty() || !p.cfg.keyword_files.empty()) cross_check(p.cfg, p.diags);
  return p.diags;
}

ScenarioConfig load_config(const fs::path& path, std::span<const std::string> overrides) {
  Parsed p = parse(path, overrides);
  cross_check(p.cfg, p.diags);
  if (!p.diags.empty()) throw ConfigError(std::move(p.diags));
  return std::move(p.cfg);
}

std::map<Theme, std::vector<std::string>> load_keywords(const ScenarioConfig& cfg) {
  std::map<Theme, std::vector<std::string>> out;
  for (const auto& [theme, file] : cfg.keyword_files) out[theme] = read_keyword_file(file);
  return out;
}

namespace {

void emit_double(YAML::Emitter& e, double v) { e << YAML::Value << io::format_double(v); }

void emit_distribution(YAML::Emitter& e, const char* key, const CountDistribution& d) {
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
  switch (d.kind) {
    case CountDistribution::Kind::constant:
      e << YAML::Key << "dist" << YAML::Value << "constant" << YAML::Key << "value";
      emit_double(e, d.a);
      break;
    case CountDistribution::Kind::uniform:
      e << YAML::Key << "dist" << YAML::Value << "uniform" << YAML::Key << "min";
      emit_double(e, d.a);
      e << YAML::Key << "max";
      emit_double(e, d.b);
      break;
    case CountDistribution::Kind::lognormal:
      e << YAML::Key << "dist" << YAML::Value << "lognormal" << YAML::Key << "mu";
      emit_double(e, d.a);
      e << YAML::Key << "sigma";
      emit_double(e, d.b);
      break;
  }
  e << YAML::EndMap;
}

}  // namespace

std::string to_yaml(const ScenarioConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;
  e << YAML::Key << "mode" << YAML::Value << (c.mode == RunMode::campaign ? "campaign" : "capture");
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "start_day" << YAML::Value << c.start_day;
  e << YAML::Key << "duration_hours";
  emit_double(e, c.duration_hours);
  e << YAML::Key << "warmup_minutes";
  emit_double(e, c.warmup_minutes);
  e << YAML::Key << "bot_tick_seconds" << YAML::Value << c.bot_tick_seconds;
  e << YAML::Key << "buffer_capacity" << YAML::Value << c.buffer_capacity;

  e << YAML::Key << "keywords" << YAML::Value << YAML::BeginMap;
  for (const auto& [t, f] : c.keyword_files)
    e << YAML::Key << std::string(to_string(t)) << YAML::Value << f.string();
  e << YAML::EndMap;
  if (c.mode == RunMode::campaign) {
    e << YAML::Key << "corpus" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "headlines" << YAML::Value << c.headlines_file.string();
    e << YAML::Key << "benign" << YAML::Value << c.benign_file.string();
    e << YAML::EndMap;
    e << YAML::Key << "landing" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "project_document" << YAML::Value << c.project_document.string();
    e << YAML::Key << "transport" << YAML::Value
      << (c.transport == Transport::http ? "http" : "in_process");
    e << YAML::Key << "base_url" << YAML::Value << c.landing_base_url;
    e << YAML::EndMap;
  }

  e << YAML::Key << "population" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "accounts" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (const auto& [t, n] : c.population.accounts)
    e << YAML::Key << std::string(to_string(t)) << YAML::Value << n;
  e << YAML::EndMap;
  emit_distribution(e, "followers", c.population.followers);
  emit_distribution(e, "following", c.population.following);
  emit_distribution(e, "posts", c.population.posts);
  emit_distribution(e, "age_days", c.population.age_days);
  e << YAML::Key << "location_tags" << YAML::Value << YAML::Flow << c.population.location_tags;
  e << YAML::Key << "location_probability";
  emit_double(e, c.population.location_probability);
  e << YAML::EndMap;

  e << YAML::Key << "organic" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tweets_per_hour" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (const auto& [t, r] : c.organic.tweets_per_hour) {
    e << YAML::Key << std::string(to_string(t));
    emit_double(e, r);
  }
  e << YAML::EndMap;
  e << YAML::Key << "keyword_probability";
  emit_double(e, c.organic.keyword_probability);
  e << YAML::EndMap;

  e << YAML::Key << "sampling" << YAML::Value << YAML::BeginMap << YAML::Key << "bands"
    << YAML::Value << c.bands << YAML::EndMap;
  e << YAML::Key << "capture" << YAML::Value << YAML::BeginMap << YAML::Key << "histogram_bins"
    << YAML::Value << c.histogram_bins << YAML::EndMap;

  const DetectionConfig& d = c.detection;
  e << YAML::Key << "detection" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "window_size" << YAML::Value << d.window_size;
  e << YAML::Key << "mention_frac_threshold";
  emit_double(e, d.mention_frac_threshold);
  e << YAML::Key << "similarity_threshold";
  emit_double(e, d.similarity_threshold);
  e << YAML::Key << "similarity_lookback" << YAML::Value << d.similarity_lookback;
  e << YAML::Key << "continuous_hours_threshold" << YAML::Value << d.continuous_hours_threshold;
  e << YAML::Key << "rate_threshold" << YAML::Value << d.rate_threshold;
  e << YAML::Key << "complaint_ban_count" << YAML::Value << d.complaint_ban_count;
  e << YAML::Key << "score_ban_threshold";
  emit_double(e, d.score_ban_threshold);
  e << YAML::Key << "decay_per_hour";
  emit_double(e, d.decay_per_hour);
  e << YAML::Key << "rule_cooldown_seconds" << YAML::Value << d.rule_cooldown;
  e << YAML::Key << "rule_points" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "mention_saturation";
  emit_double(e, d.rule_points.mention_saturation);
  e << YAML::Key << "near_duplicate";
  emit_double(e, d.rule_points.near_duplicate);
  e << YAML::Key << "continuous_activity";
  emit_double(e, d.rule_points.continuous_activity);
  e << YAML::Key << "rate";
  emit_double(e, d.rule_points.rate);
  e << YAML::EndMap;
  e << YAML::EndMap;

  if (c.mode == RunMode::campaign) {
    const SusceptibilityParams& v = c.victim;
    e << YAML::Key << "victim" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "beta" << YAML::Value << YAML::BeginMap;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      e << YAML::Key << std::string(kFeatureNames[i]);
      emit_double(e, v.beta[i]);
    }
    e << YAML::EndMap;
    e << YAML::Key << "register_given_visit";
    emit_double(e, v.register_given_visit);
    e << YAML::Key << "plain_access_given_visit";
    emit_double(e, v.plain_access_given_visit);
    e << YAML::Key << "doc_click_given_visit";
    emit_double(e, v.doc_click_given_visit);
    e << YAML::Key << "complaint_prob";
    emit_double(e, v.complaint_prob);
    e << YAML::Key << "mean_response_delay_s";
    emit_double(e, v.mean_response_delay_s);
    e << YAML::EndMap;

    e << YAML::Key << "bots" << YAML::Value << YAML::BeginSeq;
    for (const BotConfig& b : c.bots) {
      const BotPolicy& p = b.policy;
      e << YAML::BeginMap;
      e << YAML::Key << "theme" << YAML::Value << std::string(to_string(b.theme));
      e << YAML::Key << "policy" << YAML::Value << std::string(to_string(p.version));
      e << YAML::Key << "quota";
      if (b.quota) {
        e << YAML::Value << *b.quota;
      } else {
        e << YAML::Value << YAML::Null;
      }
      e << YAML::Key << "mention_target" << YAML::Value << p.mention_target;
      e << YAML::Key << "diversify_baits" << YAML::Value << p.diversify_baits;
      e << YAML::Key << "intersperse_legit" << YAML::Value << p.intersperse_legit;
      e << YAML::Key << "legit_per_attack" << YAML::Value << p.legit_per_attack;
      e << YAML::Key << "use_shortener" << YAML::Value << p.use_shortener;
      e << YAML::Key << "night_pause";
      if (p.night_pause) {
        e << YAML::Value << YAML::Flow << YAML::BeginSeq << p.night_pause->start_hour
          << p.night_pause->end_hour << YAML::EndSeq;
      } else {
        e << YAML::Value << YAML::Null;
      }
      e << YAML::Key << "skip_fraction";
      emit_double(e, p.skip_fraction);
      e << YAML::Key << "max_rate";
      if (p.max_rate) {
        emit_double(e, *p.max_rate);
      } else {
        e << YAML::Value << YAML::Null;
      }
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace phishsim

#include "phishsim/bot_agent.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "phishsim/io.hpp"

namespace phishsim {

std::string_view to_string(PolicyVersion v) {
  switch (v) {
    case PolicyVersion::v2: return "v2";
    case PolicyVersion::v3: return "v3";
    case PolicyVersion::v4: return "v4";
  }
  return "?";
}

PolicyVersion parse_policy_version(std::string_view s) {
  if (s == "v2") return PolicyVersion::v2;
  if (s == "v3") return PolicyVersion::v3;
  if (s == "v4") return PolicyVersion::v4;
  throw InvalidArgument("unknown policy version '" + std::string(s) + "'");
}

bool NightPause::contains(SimTime t) const {
  const int h = hour_of_day(t);
  if (start_hour == end_hour) return false;
  if (start_hour < end_hour) return h >= start_hour && h < end_hour;
  return h >= start_hour || h < end_hour;
}

int NightPause::awake_hours() const {
  if (start_hour == end_hour) return 24;
  const int len = start_hour < end_hour ? end_hour - start_hour : 24 - start_hour + end_hour;
  return 24 - len;
}

BotPolicy BotPolicy::preset(PolicyVersion version) {
  BotPolicy p;
  p.version = version;
  if (version == PolicyVersion::v2) return p;
  p.diversify_baits = true;
  p.intersperse_legit = true;
  p.use_shortener = true;
  p.max_rate = 30.0;
  if (version == PolicyVersion::v3) return p;
  p.night_pause = NightPause{};
  p.skip_fraction = 0.5;
  p.max_rate = 4.0;
  return p;
}

void BotPolicy::validate(std::string_view where) const {
  const std::string w(where);
  if (legit_per_attack < 1) throw InvalidArgument(w + ".legit_per_attack: must be >= 1");
  if (!(skip_fraction >= 0.0 && skip_fraction <= 1.0))
    throw InvalidArgument(w + ".skip_fraction: must be in [0,1]");
  if (max_rate && (!(*max_rate > 0.0) || !std::isfinite(*max_rate)))
    throw InvalidArgument(w + ".max_rate: must be a positive number");
  if (night_pause) {
    if (night_pause->start_hour < 0 || night_pause->start_hour > 23)
      throw InvalidArgument(w + ".night_pause.start_hour: must be in [0,23]");
    if (night_pause->end_hour < 0 || night_pause->end_hour > 24)
      throw InvalidArgument(w + ".night_pause.end_hour: must be in [0,24]");
  }
}

HeadlineCorpus::HeadlineCorpus(std::map<Theme, std::vector<Headline>> by_theme)
    : by_theme_(std::move(by_theme)) {}

HeadlineCorpus HeadlineCorpus::load(const std::filesystem::path& path) {
  std::map<Theme, std::vector<Headline>> by_theme;
  std::size_t line_no = 0;
  for (const std::string& line : io::read_lines(path)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("theme") || !j.contains("headline") ||
        !j["theme"].is_string() || !j["headline"].is_string())
      throw InvalidArgument(where + ": expected {theme, headline, source_url}");
    Headline h;
    h.headline = j["headline"].get<std::string>();
    if (h.headline.empty()) throw InvalidArgument(where + ": empty headline");
    if (j.contains("source_url") && j["source_url"].is_string())
      h.source_url = j["source_url"].get<std::string>();
    by_theme[parse_theme(j["theme"].get<std::string>())].push_back(std::move(h));
  }
  return HeadlineCorpus(std::move(by_theme));
}

const std::vector<Headline>& HeadlineCorpus::for_theme(Theme theme) const {
  static const std::vector<Headline> kEmpty;
  auto it = by_theme_.find(theme);
  return it == by_theme_.end() ? kEmpty : it->second;
}

std::size_t HeadlineCorpus::size() const {
  std::size_t n = 0;
  for (const auto& [t, v] : by_theme_) n += v.size();
  return n;
}

std::vector<std::string> load_benign_corpus(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (std::string& line : io::read_lines(path))
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(std::move(line));
  if (out.empty()) throw InvalidArgument(path.string() + ": benign corpus is empty");
  return out;
}

const std::vector<std::string>& phrasing_variants() {
  static const std::vector<std::string> kVariants = {
      "Leia agora: {headline}",
      "Você viu isso? {headline}",
      "{headline}. Vale a leitura",
      "Notícia do dia: {headline}",
      "Olha que interessante: {headline}",
      "{headline} (detalhes no link)",
  };
  return kVariants;
}

UrlShortener::UrlShortener(std::uint64_t seed, std::string base)
    : state_(derive_seed(seed, "shortener")), base_(std::move(base)) {}

std::string UrlShortener::shorten(const std::string& url) {
  static constexpr char kAlphabet[] =
      "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  std::string token;
  do {
    state_ = splitmix64(state_);
    std::uint64_t x = state_;
    token.clear();
    for (int i = 0; i < 10; ++i) {
      token.push_back(kAlphabet[x % 62]);
      x /= 62;
    }
  } while (links_.count(token) != 0);
  links_.emplace(token, url);
  return base_ + token;
}

std::optional<std::string> UrlShortener::expand(std::string_view s) const {
  if (s.substr(0, base_.size()) == base_) s.remove_prefix(base_.size());
  auto it = links_.find(std::string(s));
  if (it == links_.end()) return std::nullopt;
  return it->second;
}

bool UrlShortener::is_short(std::string_view url) const {
  return url.substr(0, base_.size()) == base_;
}

std::string bait_url(std::string_view landing_base, std::string_view pseudonym) {
  std::string base(landing_base);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/bait?id=" + std::string(pseudonym);
}

std::optional<std::string> pseudonym_from_url(std::string_view url) {
  auto q = url.find('?');
  if (q == std::string_view::npos) return std::nullopt;
  std::string_view query = url.substr(q + 1);
  if (auto h = query.find('#'); h != std::string_view::npos) query = query.substr(0, h);
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view kv = query.substr(0, amp);
    if (kv.substr(0, 3) == "id=" && kv.size() > 3) return std::string(kv.substr(3));
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return std::nullopt;
}

BaitDraft craft_bait(const TargetRecord& target, std::string_view mention_handle,
                     const BotPolicy& policy, const HeadlineCorpus& corpus, std::size_t sequence,
                     std::string_view landing_base, UrlShortener* shortener) {
  const auto& headlines = corpus.for_theme(target.theme);
  if (headlines.empty())
    throw InvalidArgument("empty headline corpus for theme " + std::string(to_string(target.theme)));
  const auto& variants = phrasing_variants();
  BaitDraft d;
  d.theme = target.theme;
  if (policy.diversify_baits) {
    const std::size_t n = headlines.size();
    d.headline_index = sequence % n;
    d.variant_index = (sequence + sequence / n) % variants.size();
  }
  std::string text = variants[d.variant_index];
  text.replace(text.find("{headline}"), 10, headlines[d.headline_index].headline);
  d.text = std::move(text);
  if (policy.mention_target) d.mentions.emplace_back(mention_handle);
  d.link = bait_url(landing_base, target.pseudonym);
  if (policy.use_shortener) {
    if (shortener == nullptr) throw ContractViolation("policy needs a URL shortener");
    d.link = shortener->shorten(d.link);
  }
  return d;
}

TokenBucket::TokenBucket(double rate_per_hour, double capacity_tokens, SimTime start)
    : per_second_(std::llround(rate_per_hour * 1000.0)),
      capacity_(std::llround(capacity_tokens * static_cast<double>(kUnitsPerToken))),
      units_(capacity_),
      last_(start) {
  if (per_second_ <= 0) throw InvalidArgument("token bucket: rate must be positive");
  if (capacity_ < kUnitsPerToken) throw InvalidArgument("token bucket: capacity below one token");
}

void TokenBucket::refill(SimTime now) {
  if (now <= last_) return;
  const std::int64_t elapsed = now - last_;
  if (elapsed > capacity_ / per_second_) {
    units_ = capacity_;
  } else {
    units_ = std::min(capacity_, units_ + elapsed * per_second_);
  }
  last_ = now;
}

bool TokenBucket::try_take(SimTime now) {
  refill(now);
  if (units_ < kUnitsPerToken) return false;
  units_ -= kUnitsPerToken;
  return true;
}

double TokenBucket::tokens() const {
  return static_cast<double>(units_) / static_cast<double>(kUnitsPerToken);
}

std::string_view to_string(BotAction a) {
  switch (a) {
    case BotAction::idle: return "idle";
    case BotAction::send_attack: return "send_attack";
    case BotAction::send_legit: return "send_legit";
  }
  return "?";
}

BotAgent::BotAgent(std::string handle, Theme theme, BotPolicy policy,
                   std::optional<std::size_t> quota, SimTime start, std::uint64_t seed)
    : handle_(std::move(handle)),
      theme_(theme),
      policy_(std::move(policy)),
      quota_(quota),
      legit_cursor_(static_cast<std::size_t>(derive_seed(seed, "legit:" + handle_))) {
  policy_.validate();
  if (policy_.max_rate) bucket_.emplace(*policy_.max_rate, 1.0, start);
}

BotAction BotAgent::next_action(SimTime now, std::size_t pending_targets) {
  if (halted_) return BotAction::idle;
  if (policy_.night_pause && policy_.night_pause->contains(now)) return BotAction::idle;
  BotAction want;
  if (quota_reached() || (policy_.intersperse_legit && legit_owed_ > 0)) {
    want = BotAction::send_legit;
  } else if (pending_targets > 0) {
    want = BotAction::send_attack;
  } else {
    return BotAction::idle;
  }
  if (bucket_ && !bucket_->try_take(now)) return BotAction::idle;
  return want;
}

void BotAgent::record_attack() {
  ++attacks_sent_;
  if (policy_.intersperse_legit) legit_owed_ = policy_.legit_per_attack;
}

void BotAgent::record_legit() {
  ++legit_sent_;
  if (legit_owed_ > 0) --legit_owed_;
}

const std::string& BotAgent::next_legit_text(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw InvalidArgument("benign corpus is empty");
  return corpus[legit_cursor_++ % corpus.size()];
}

}  // namespace phishsim

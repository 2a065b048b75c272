#include "phishsim/detection.hpp"

#include <algorithm>
#include <cmath>

#include "phishsim/text.hpp"

namespace phishsim {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::mention_saturation:
      return "mention_saturation";
    case Rule::near_duplicate:
      return "near_duplicate";
    case Rule::continuous_activity:
      return "continuous_activity";
    case Rule::rate:
      return "rate";
    case Rule::complaints:
      return "complaints";
  }
  return "unknown";
}

std::string_view rule_code(Rule rule) {
  switch (rule) {
    case Rule::mention_saturation:
      return "R1";
    case Rule::near_duplicate:
      return "R2";
    case Rule::continuous_activity:
      return "R3";
    case Rule::rate:
      return "R4";
    case Rule::complaints:
      return "complaints";
  }
  return "?";
}

double RulePoints::operator[](Rule r) const {
  switch (r) {
    case Rule::mention_saturation:
      return mention_saturation;
    case Rule::near_duplicate:
      return near_duplicate;
    case Rule::continuous_activity:
      return continuous_activity;
    case Rule::rate:
      return rate;
    case Rule::complaints:
      return 0.0;
  }
  return 0.0;
}

void DetectionConfig::validate() const {
  auto fail = [](const char* field, const char* why) {
    throw InvalidArgument(std::string("detection.") + field + ": " + why);
  };
  auto fraction = [&](const char* field, double v) {
    if (!(v >= 0.0 && v <= 1.0)) fail(field, "must be in [0, 1]");
  };
  if (window_size == 0) fail("window_size", "must be positive");
  fraction("mention_frac_threshold", mention_frac_threshold);
  fraction("similarity_threshold", similarity_threshold);
  if (similarity_lookback == 0) fail("similarity_lookback", "must be positive");
  if (continuous_hours_threshold <= 0) fail("continuous_hours_threshold", "must be positive");
  if (rate_threshold < 0) fail("rate_threshold", "must be non-negative");
  if (complaint_ban_count <= 0) fail("complaint_ban_count", "must be positive");
  if (!(score_ban_threshold > 0.0)) fail("score_ban_threshold", "must be positive");
  if (!(decay_per_hour >= 0.0)) fail("decay_per_hour", "must be non-negative");
  if (rule_cooldown < 0) fail("rule_cooldown_seconds", "must be non-negative");
  for (double p : {rule_points.mention_saturation, rule_points.near_duplicate,
                   rule_points.continuous_activity, rule_points.rate}) {
    if (!(p >= 0.0) || !std::isfinite(p)) fail("rule_points", "must be finite and non-negative");
  }
}

// ---------------------------------------------------------------------------
// Similarity

namespace {

std::uint64_t gram_hash(const std::string& a, const std::string& b, const std::string& c) {
  std::string joined;
  joined.reserve(a.size() + b.size() + c.size() + 2);
  joined.append(a).push_back('\x1f');
  joined.append(b).push_back('\x1f');
  joined.append(c);
  return fnv1a64(joined);
}

void sort_unique(std::vector<std::uint64_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

double sorted_jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace

Shingles make_shingles(std::span<const std::string> tokens) {
  Shingles s;
  s.short_text = tokens.size() < 3;
  s.tokens.reserve(tokens.size());
  for (const auto& t : tokens) s.tokens.push_back(fnv1a64(t));
  sort_unique(s.tokens);
  if (!s.short_text) {
    s.grams.reserve(tokens.size() - 2);
    for (std::size_t i = 0; i + 2 < tokens.size(); ++i)
      s.grams.push_back(gram_hash(tokens[i], tokens[i + 1], tokens[i + 2]));
    sort_unique(s.grams);
  }
  return s;
}

double jaccard(const Shingles& a, const Shingles& b) {
  if (a.short_text || b.short_text) return sorted_jaccard(a.tokens, b.tokens);
  return sorted_jaccard(a.grams, b.grams);
}

double jaccard_3gram(std::string_view a, std::string_view b) {
  const auto ta = text::tokenize(a);
  const auto tb = text::tokenize(b);
  return jaccard(make_shingles(ta), make_shingles(tb));
}

std::string canonical_link_token(std::string_view url) {
  const auto cut = url.find_first_of("?#");
  return text::to_lower(url.substr(0, cut));
}

std::vector<std::string> similarity_tokens(std::span<const std::string> text_tokens,
                                           const std::optional<std::string>& link) {
  std::vector<std::string> out(text_tokens.begin(), text_tokens.end());
  // The leading control byte keeps link tokens disjoint from word tokens.
  if (link) out.push_back("\x01" + canonical_link_token(*link));
  return out;
}

// ---------------------------------------------------------------------------
// Standing updates

double AccountStanding::score_at(SimTime now, const DetectionConfig& cfg) const {
  const double elapsed_h = static_cast<double>(std::max<SimTime>(0, now - score_updated_at)) /
                           static_cast<double>(kSecondsPerHour);
  return std::max(0.0, score - cfg.decay_per_hour * elapsed_h);
}

RuleEvaluation score_tweet(AccountStanding& standing, const TweetRecord& tweet,
                           const DetectionConfig& cfg) {
  const auto tokens = text::tokenize(tweet.text);
  return score_tweet(standing, tweet, tokens, cfg);
}

RuleEvaluation score_tweet(AccountStanding& s, const TweetRecord& tweet,
                           std::span<const std::string> text_tokens, const DetectionConfig& cfg) {
  if (s.banned()) throw ContractViolation("scoring a banned account");
  const SimTime now = tweet.posted_at;
  RuleEvaluation ev;

  s.score = s.score_at(now, cfg);
  s.score_updated_at = now;

  RecentTweet cur;
  cur.at = now;
  cur.has_mention = !tweet.mentions.empty();
  cur.shingles = make_shingles(similarity_tokens(text_tokens, tweet.link));

  // R2 against the previous `similarity_lookback` tweets.
  {
    const std::size_t n = s.recent_tweets.size();
    const std::size_t from = n > cfg.similarity_lookback ? n - cfg.similarity_lookback : 0;
    for (std::size_t i = from; i < n; ++i)
      ev.max_similarity = std::max(ev.max_similarity, jaccard(cur.shingles, s.recent_tweets[i].shingles));
    ev.satisfied[1] = n > 0 && ev.max_similarity >= cfg.similarity_threshold;
  }

  s.recent_tweets.push_back(std::move(cur));
  const std::size_t keep = std::max(cfg.window_size, cfg.similarity_lookback);
  while (s.recent_tweets.size() > keep) s.recent_tweets.pop_front();

  // R1 over the last `window_size` tweets, current included.
  if (s.recent_tweets.size() >= cfg.window_size) {
    std::size_t with_mention = 0;
    for (std::size_t i = s.recent_tweets.size() - cfg.window_size; i < s.recent_tweets.size(); ++i)
      with_mention += s.recent_tweets[i].has_mention ? 1 : 0;
    ev.mention_fraction = static_cast<double>(with_mention) / static_cast<double>(cfg.window_size);
    ev.satisfied[0] = ev.mention_fraction >= cfg.mention_frac_threshold;
  }

  // Activity horizon (now - H hours, now].
  const int horizon_h = std::max(1, cfg.continuous_hours_threshold);
  s.activity.push_back(now);
  while (!s.activity.empty() && s.activity.front() <= now - horizon_h * kSecondsPerHour)
    s.activity.pop_front();

  for (auto it = s.activity.rbegin(); it != s.activity.rend() && *it > now - kSecondsPerHour; ++it)
    ++ev.tweets_last_hour;
  ev.satisfied[3] = ev.tweets_last_hour > cfg.rate_threshold;

  // R3: every hour bucket (now-(k+1)h, now-kh], i.e. age in [kh, (k+1)h),
  // for k < H holds a tweet.
  {
    std::vector<bool> seen(static_cast<std::size_t>(cfg.continuous_hours_threshold), false);
    for (SimTime t : s.activity) {
      const SimTime age = now - t;  // in [0, H h)
      const auto k = static_cast<std::size_t>(age / kSecondsPerHour);
      if (k < seen.size()) seen[k] = true;
    }
    ev.active_hours = static_cast<int>(std::count(seen.begin(), seen.end(), true));
    ev.satisfied[2] = ev.active_hours == cfg.continuous_hours_threshold;
  }

  for (std::size_t r = 0; r < kWindowRuleCount; ++r) {
    if (!ev.satisfied[r]) continue;
    const auto& last = s.last_award[r];
    if (last && now - *last < cfg.rule_cooldown) continue;
    const auto rule = static_cast<Rule>(r);
    s.score += cfg.rule_points[rule];
    s.last_award[r] = now;
    ev.awarded[r] = true;
    if (!s.banned() && s.score >= cfg.score_ban_threshold) {
      s.banned_at = now;
      s.ban_rule = rule;
      ev.banned_now = true;
      ev.trigger = rule;
    }
  }
  ev.score_after = s.score;
  return ev;
}

bool register_complaint(AccountStanding& s, SimTime now, const DetectionConfig& cfg) {
  if (s.banned()) return false;
  s.complaint_count += 1;
  if (s.complaint_count >= cfg.complaint_ban_count) {
    s.score = s.score_at(now, cfg);
    s.score_updated_at = std::max(s.score_updated_at, now);
    s.banned_at = now;
    s.ban_rule = Rule::complaints;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Engine

DetectionEngine::DetectionEngine(DetectionConfig cfg, const Platform* platform)
    : cfg_(std::move(cfg)), platform_(platform) {
  cfg_.validate();
}

bool DetectionEngine::is_banned(std::string_view handle) const {
  const auto* s = standing(handle);
  return s != nullptr && s->banned();
}

const AccountStanding* DetectionEngine::standing(std::string_view handle) const {
  auto it = standings_.find(std::string(handle));
  return it == standings_.end() ? nullptr : &it->second;
}

void DetectionEngine::record_ban(const std::string& handle, const AccountStanding& s) {
  BanEvent ev{handle, *s.banned_at, s.ban_rule.value_or(Rule::complaints), s.score};
  bans_.push_back(ev);
  if (ban_sink_) ban_sink_(ev);
}

RuleEvaluation DetectionEngine::score_impl(const TweetRecord& tweet,
                                           std::span<const std::string> tokens) {
  auto [it, inserted] = standings_.try_emplace(tweet.author);
  if (inserted) it->second.score_updated_at = tweet.posted_at;
  RuleEvaluation ev = score_tweet(it->second, tweet, tokens, cfg_);
  if (eval_sink_) eval_sink_(tweet, ev);
  if (ev.banned_now) record_ban(it->first, it->second);
  return ev;
}

RuleEvaluation DetectionEngine::score(const TweetRecord& tweet) {
  const auto tokens = text::tokenize(tweet.text);
  return score_impl(tweet, tokens);
}

void DetectionEngine::on_post(const PostedTweet& tweet) { score_impl(tweet.record, tweet.tokens); }

void DetectionEngine::register_complaint(std::string_view target, std::string_view against,
                                         SimTime now) {
  if (platform_ && (!platform_->has_account(target) || !platform_->has_account(against)))
    throw InvalidArgument("complaint references an unknown account");
  auto [it, inserted] = standings_.try_emplace(std::string(against));
  if (inserted) it->second.score_updated_at = now;
  if (phishsim::register_complaint(it->second, now, cfg_)) record_ban(it->first, it->second);
}

}  // namespace phishsim

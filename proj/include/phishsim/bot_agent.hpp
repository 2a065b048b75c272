#pragma once

// Attacker side: policy bundles, bait corpora, the URL shortener, rate
// limiting and the per-bot action state machine.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phishsim/core.hpp"
#include "phishsim/target_sampler.hpp"

namespace phishsim {

enum class PolicyVersion : std::uint8_t { v2, v3, v4 };

std::string_view to_string(PolicyVersion v);
PolicyVersion parse_policy_version(std::string_view s);

struct NightPause {
  int start_hour = 0;  // inclusive
  int end_hour = 8;    // exclusive; may wrap past midnight

  bool contains(SimTime t) const;
  /// Awake hours per day.
  int awake_hours() const;
};

struct BotPolicy {
  PolicyVersion version = PolicyVersion::v2;
  bool mention_target = true;
  bool diversify_baits = false;
  bool intersperse_legit = false;
  /// Legit posts per attack when interspersing.
  int legit_per_attack = 1;
  bool use_shortener = false;
  std::optional<NightPause> night_pause;
  double skip_fraction = 0.0;
  /// Tweets per hour across attack and legit posts; nullopt = one post per
  /// bot tick.
  std::optional<double> max_rate;

  static BotPolicy preset(PolicyVersion version);
  void validate(std::string_view where = "policy") const;
};

struct Headline {
  std::string headline;
  std::string source_url;
};

/// Headlines partitioned by theme, file order preserved.
class HeadlineCorpus {
 public:
  HeadlineCorpus() = default;
  explicit HeadlineCorpus(std::map<Theme, std::vector<Headline>> by_theme);
  /// JSON Lines {theme, headline, source_url}.
  static HeadlineCorpus load(const std::filesystem::path& path);

  const std::vector<Headline>& for_theme(Theme theme) const;
  std::size_t size() const;

 private:
  std::map<Theme, std::vector<Headline>> by_theme_;
};

/// One benign post per line; blank lines ignored.
std::vector<std::string> load_benign_corpus(const std::filesystem::path& path);

/// Surface templates; "{headline}" is replaced by the headline.
const std::vector<std::string>& phrasing_variants();

/// Deterministic short-link issuer. Tokens are unique per issuer.
class UrlShortener {
 public:
  explicit UrlShortener(std::uint64_t seed, std::string base = "https://sho.rt/");

  std::string shorten(const std::string& url);
  /// Long URL for a short URL or bare token.
  std::optional<std::string> expand(std::string_view short_url_or_token) const;
  bool is_short(std::string_view url) const;
  std::size_t size() const { return links_.size(); }

 private:
  std::uint64_t state_;
  std::string base_;
  std::unordered_map<std::string, std::string> links_;
};

/// "<base>/bait?id=<pseudonym>"
std::string bait_url(std::string_view landing_base, std::string_view pseudonym);
/// The id query attribute of a bait URL.
std::optional<std::string> pseudonym_from_url(std::string_view url);

struct BaitDraft {
  std::string text;
  std::vector<std::string> mentions;
  std::string link;
  Theme theme = Theme::politics;
  std::size_t headline_index = 0;
  std::size_t variant_index = 0;
};

/// Builds the `sequence`-th bait of a bot. v2 (no diversification) always
/// uses variant 0 and the head headline; diversified policies walk the
/// headline list and rotate variants so consecutive baits differ.
/// `mention_handle` is the in-platform handle of the target.
BaitDraft craft_bait(const TargetRecord& target, std::string_view mention_handle,
                     const BotPolicy& policy, const HeadlineCorpus& corpus, std::size_t sequence,
                     std::string_view landing_base, UrlShortener* shortener);

/// Token bucket in exact integer arithmetic. One token costs 3600 * 1000
/// units; each second adds round(rate_per_hour * 1000) units.
class TokenBucket {
 public:
  TokenBucket(double rate_per_hour, double capacity_tokens, SimTime start);

  void refill(SimTime now);
  bool try_take(SimTime now);
  double tokens() const;

 private:
  static constexpr std::int64_t kUnitsPerToken = 3600LL * 1000;
  std::int64_t per_second_;
  std::int64_t capacity_;
  std::int64_t units_;
  SimTime last_;
};

enum class BotAction : std::uint8_t { idle, send_attack, send_legit };

std::string_view to_string(BotAction a);

using PendingTarget = SampledTarget;

/// One attacking account. The campaign asks next_action() on every bot
/// tick and performs the returned action.
class BotAgent {
 public:
  BotAgent(std::string handle, Theme theme, BotPolicy policy, std::optional<std::size_t> quota,
           SimTime start, std::uint64_t seed);

  const std::string& handle() const { return handle_; }
  Theme theme() const { return theme_; }
  const BotPolicy& policy() const { return policy_; }
  std::optional<std::size_t> quota() const { return quota_; }

  /// Decides the action at `now` and, for a send, consumes rate budget.
  /// Idle during the night pause, when the bucket is empty, or when an
  /// attack is due but no target is pending. Once the quota is spent the
  /// bot keeps posting legit tweets at its cadence.
  BotAction next_action(SimTime now, std::size_t pending_targets);

  /// Bookkeeping after the campaign performed the action.
  void record_attack();
  void record_legit();

  bool quota_reached() const { return quota_ && attacks_sent_ >= *quota_; }
  bool wants_targets() const { return !quota_reached() && !halted_; }
  std::size_t attacks_sent() const { return attacks_sent_; }
  std::size_t legit_sent() const { return legit_sent_; }
  bool halted() const { return halted_; }
  void halt() { halted_ = true; }

  std::deque<PendingTarget>& pending() { return pending_; }
  /// Next benign post (rotating through the corpus from a per-bot offset).
  const std::string& next_legit_text(const std::vector<std::string>& corpus);

 private:
  std::string handle_;
  Theme theme_;
  BotPolicy policy_;
  std::optional<std::size_t> quota_;
  std::optional<TokenBucket> bucket_;
  std::size_t attacks_sent_ = 0;
  std::size_t legit_sent_ = 0;
  int legit_owed_ = 0;
  bool halted_ = false;
  std::size_t legit_cursor_;
  std::deque<PendingTarget> pending_;
};

}  // namespace phishsim

#pragma once

// Platform-side behavioural bot detector. Four window rules plus a
// complaint counter feed a decaying per-account score; crossing the ban
// threshold bans the account for good.
//
//   R1 mention saturation  share of the last `window_size` tweets that carry
//                          a mention >= mention_frac_threshold
//   R2 near duplicate      max token-3-gram Jaccard against the last
//                          `similarity_lookback` tweets >= similarity_threshold
//   R3 continuous activity at least one tweet in each of the last
//                          `continuous_hours_threshold` hours
//   R4 rate                tweets in the trailing hour > rate_threshold
//
// A satisfied rule awards its points at most once per `rule_cooldown`
// seconds. The score decays linearly at `decay_per_hour`.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phishsim/core.hpp"
#include "phishsim/sim_core.hpp"

namespace phishsim {

enum class Rule : std::uint8_t {
  mention_saturation = 0,
  near_duplicate = 1,
  continuous_activity = 2,
  rate = 3,
  complaints = 4,
};

inline constexpr std::size_t kWindowRuleCount = 4;

std::string_view to_string(Rule rule);
/// "R1".."R4", "complaints".
std::string_view rule_code(Rule rule);

struct RulePoints {
  double mention_saturation = 40.0;
  double near_duplicate = 30.0;
  double continuous_activity = 50.0;
  double rate = 25.0;

  double operator[](Rule r) const;
};

struct DetectionConfig {
  std::size_t window_size = 20;
  double mention_frac_threshold = 0.9;
  double similarity_threshold = 0.7;
  std::size_t similarity_lookback = 50;
  int continuous_hours_threshold = 24;
  int rate_threshold = 30;
  int complaint_ban_count = 3;
  double score_ban_threshold = 100.0;
  RulePoints rule_points;
  double decay_per_hour = 10.0;
  SimTime rule_cooldown = kSecondsPerHour;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// Sorted, de-duplicated 64-bit shingle fingerprints of one text.
struct Shingles {
  std::vector<std::uint64_t> grams;   // token 3-grams
  std::vector<std::uint64_t> tokens;  // token set, for texts under 3 tokens
  bool short_text = false;            // fewer than 3 tokens
};

Shingles make_shingles(std::span<const std::string> tokens);

/// Jaccard similarity of two shingle sets. Falls back to token-set Jaccard
/// when either side has fewer than 3 tokens; two empty texts score 1.0.
double jaccard(const Shingles& a, const Shingles& b);

/// Token-3-gram Jaccard similarity of two texts.
double jaccard_3gram(std::string_view a, std::string_view b);

/// Token used for a link in the similarity fingerprint: the URL with its
/// query and fragment removed, lowercased. Parametrised bait links thus
/// collapse to one shared token while per-target short links stay unique.
std::string canonical_link_token(std::string_view url);

/// Tokens R2 compares: the text tokens followed by the canonical link.
std::vector<std::string> similarity_tokens(std::span<const std::string> text_tokens,
                                           const std::optional<std::string>& link);

struct RecentTweet {
  SimTime at = 0;
  bool has_mention = false;
  Shingles shingles;
};

struct AccountStanding {
  double score = 0.0;
  SimTime score_updated_at = 0;
  int complaint_count = 0;
  std::deque<RecentTweet> recent_tweets;  // newest at the back
  std::deque<SimTime> activity;           // post times inside the R3 horizon
  std::array<std::optional<SimTime>, kWindowRuleCount> last_award{};
  std::optional<SimTime> banned_at;
  std::optional<Rule> ban_rule;

  bool banned() const { return banned_at.has_value(); }
  /// Score after decay up to `now`, without mutating the standing.
  double score_at(SimTime now, const DetectionConfig& cfg) const;
};

struct RuleEvaluation {
  std::array<bool, kWindowRuleCount> satisfied{};
  std::array<bool, kWindowRuleCount> awarded{};
  double mention_fraction = 0.0;
  double max_similarity = 0.0;
  int tweets_last_hour = 0;
  int active_hours = 0;
  double score_after = 0.0;
  bool banned_now = false;
  std::optional<Rule> trigger;

  bool fired(Rule r) const { return satisfied[static_cast<std::size_t>(r)]; }
};

/// Evaluates R1..R4 for `tweet` (posted at tweet.posted_at) and updates the
/// standing. Throws ContractViolation if the account is already banned.
RuleEvaluation score_tweet(AccountStanding& standing, const TweetRecord& tweet,
                           const DetectionConfig& cfg);
RuleEvaluation score_tweet(AccountStanding& standing, const TweetRecord& tweet,
                           std::span<const std::string> text_tokens, const DetectionConfig& cfg);

/// Returns true if this complaint banned the account. Complaints against a
/// banned account are absorbed.
bool register_complaint(AccountStanding& standing, SimTime now, const DetectionConfig& cfg);

struct BanEvent {
  std::string handle;
  SimTime banned_at = 0;
  Rule trigger = Rule::complaints;
  double score = 0.0;
};

/// Per-account standings for the whole platform, wired in as the
/// platform's post observer. Single-threaded: call from the event loop.
class DetectionEngine : public PostObserver {
 public:
  using BanSink = std::function<void(const BanEvent&)>;
  using EvaluationSink = std::function<void(const TweetRecord&, const RuleEvaluation&)>;

  explicit DetectionEngine(DetectionConfig cfg, const Platform* platform = nullptr);

  void on_ban(BanSink sink) { ban_sink_ = std::move(sink); }
  void on_evaluation(EvaluationSink sink) { eval_sink_ = std::move(sink); }

  bool is_blocked(std::string_view handle) const override { return is_banned(handle); }
  void on_post(const PostedTweet& tweet) override;

  RuleEvaluation score(const TweetRecord& tweet);
  /// `target` complains about `against`. Both must exist when a platform
  /// is attached.
  void register_complaint(std::string_view target, std::string_view against, SimTime now);

  bool is_banned(std::string_view handle) const;
  const AccountStanding* standing(std::string_view handle) const;
  const DetectionConfig& config() const { return cfg_; }
  const std::vector<BanEvent>& bans() const { return bans_; }

 private:
  RuleEvaluation score_impl(const TweetRecord& tweet, std::span<const std::string> tokens);
  void record_ban(const std::string& handle, const AccountStanding& s);

  DetectionConfig cfg_;
  const Platform* platform_;
  std::unordered_map<std::string, AccountStanding> standings_;
  std::vector<BanEvent> bans_;
  BanSink ban_sink_;
  EvaluationSink eval_sink_;
};

}  // namespace phishsim

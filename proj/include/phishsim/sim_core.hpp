#pragma once

// Simulated microblogging platform: accounts, the event clock, the
// timeline, keyword streams and the bounded flow buffer feeding bots.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phishsim/core.hpp"
#include "phishsim/text.hpp"

namespace phishsim {

struct AccountProfile {
  std::string handle;
  std::int64_t followers_count = 0;
  std::int64_t following_count = 0;
  std::int64_t post_count = 0;
  SimTime created_at = 0;
  std::optional<std::string> location_tag;
  Theme theme_affinity = Theme::politics;
  bool is_bot = false;

  bool operator==(const AccountProfile&) const = default;
};

struct TweetRecord {
  std::string author;
  std::string text;
  std::vector<std::string> mentions;
  std::optional<std::string> link;
  std::vector<std::string> matched_keywords;
  SimTime posted_at = 0;
  Theme theme = Theme::politics;

  bool operator==(const TweetRecord&) const = default;
};

/// Bounded FIFO between a keyword stream (producer) and a bot (consumer).
/// The producer never blocks: a push on a full buffer evicts the oldest
/// entry. Safe to share between one producer and one consumer thread.
class FlowBuffer {
 public:
  using EvictionHook = std::function<void(const TweetRecord&)>;

  explicit FlowBuffer(std::size_t capacity);

  FlowBuffer(const FlowBuffer&) = delete;
  FlowBuffer& operator=(const FlowBuffer&) = delete;

  void push(TweetRecord tweet);
  std::optional<TweetRecord> pop();
  /// Removes and returns every entry, oldest first.
  std::vector<TweetRecord> drain();

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::uint64_t dropped_count() const;
  std::vector<TweetRecord> snapshot() const;

  /// Called (under the buffer lock) with each evicted entry.
  void set_eviction_hook(EvictionHook hook);

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<TweetRecord> entries_;
  std::uint64_t dropped_ = 0;
  EvictionHook on_evict_;
};

/// Simulated clock plus a stable-ordered event queue. Events with equal
/// timestamps fire in insertion order.
class EventScheduler {
 public:
  using Action = std::function<void(SimTime)>;

  struct Fired {
    SimTime at;
    std::uint64_t sequence;
    std::string label;
  };

  explicit EventScheduler(SimTime start = 0, SimTime step = 1);

  SimTime now() const { return now_; }
  SimTime step() const { return step_; }

  /// Returns the insertion sequence number. Events cannot be scheduled in
  /// the past.
  std::uint64_t schedule(SimTime at, Action action, std::string label = {});

  /// Moves the clock forward by `delta_seconds` (> 0) and fires every event
  /// due at or before the new time, in (timestamp, insertion) order. Events
  /// scheduled while firing are honoured if they fall inside the window.
  std::vector<Fired> advance_clock(SimTime delta_seconds);

  std::size_t pending() const { return queue_.size(); }
  std::optional<SimTime> next_event_time() const;

 private:
  struct Entry {
    SimTime at;
    std::uint64_t sequence;
    std::string label;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.at != b.at ? a.at > b.at : a.sequence > b.sequence;
    }
  };

  SimTime now_;
  SimTime step_;
  std::uint64_t next_sequence_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
};

/// Integer count distribution used for synthetic account attributes.
struct CountDistribution {
  enum class Kind { constant, uniform, lognormal };
  Kind kind = Kind::constant;
  // constant: a = value. uniform: integers in [a, b]. lognormal:
  // floor(exp(N(a, b))) with a = mu, b = sigma.
  double a = 0.0;
  double b = 0.0;

  static CountDistribution constant(double value) { return {Kind::constant, value, 0.0}; }
  static CountDistribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static CountDistribution lognormal(double mu, double sigma) {
    return {Kind::lognormal, mu, sigma};
  }

  void validate(std::string_view what) const;
  std::int64_t sample(Rng& rng) const;
  /// Analytic mean of the continuous law before flooring (uniform and
  /// constant are exact).
  double nominal_mean() const;
};

struct PopulationSpec {
  std::map<Theme, std::size_t> accounts;
  CountDistribution followers = CountDistribution::lognormal(5.0, 2.0);
  CountDistribution following = CountDistribution::lognormal(5.5, 1.2);
  CountDistribution posts = CountDistribution::lognormal(7.0, 1.5);
  CountDistribution age_days = CountDistribution::uniform(30, 3650);
  std::vector<std::string> location_tags = {"BR-DF", "BR-SP", "BR-RJ", "BR-MG", "BR-BA"};
  double location_probability = 0.6;
  /// Accounts are created `age_days` before this instant.
  SimTime reference_time = 0;

  std::size_t total() const;
};

/// Synthetic population, themes in fixed order. Handles are
/// "tw_<pol|spo|ent>_<6 digits>". Deterministic in (spec, seed).
std::vector<AccountProfile> generate_population(const PopulationSpec& spec, std::uint64_t seed);

/// Tokens computed once per posted tweet, shared by every consumer.
struct PostedTweet {
  const TweetRecord& record;
  const std::vector<std::string>& tokens;
};

/// Platform-side hook consulted before and after every post.
class PostObserver {
 public:
  virtual ~PostObserver() = default;
  virtual bool is_blocked(std::string_view handle) const = 0;
  virtual void on_post(const PostedTweet& tweet) = 0;
};

class Platform {
 public:
  using Sink = std::function<void(const TweetRecord&)>;

  struct Subscription {
    std::size_t id;
  };

  Platform(EventScheduler& scheduler, std::map<Theme, std::vector<std::string>> theme_keywords);

  void add_account(AccountProfile profile);
  bool has_account(std::string_view handle) const;
  const AccountProfile& account(std::string_view handle) const;
  const std::vector<AccountProfile>& accounts() const { return accounts_; }
  /// Indices into accounts() of every account with the given theme.
  const std::vector<std::size_t>& accounts_with_theme(Theme theme) const;

  void set_observer(PostObserver* observer) { observer_ = observer; }

  /// Appends a tweet stamped with the current clock time. Throws
  /// AccountBanned when the observer blocks the author.
  const TweetRecord& post_tweet(std::string_view author, std::string text,
                                std::vector<std::string> mentions, std::optional<std::string> link,
                                Theme theme);

  /// Every subsequently posted tweet matching at least one keyword is
  /// pushed into `buffer`, in posting order. The buffer must outlive the
  /// platform or be unsubscribed.
  Subscription stream_by_keywords(std::vector<std::string> keywords, FlowBuffer& buffer);
  Subscription subscribe(std::vector<std::string> keywords, Sink sink);
  void unsubscribe(Subscription sub);

  const std::vector<TweetRecord>& timeline() const { return timeline_; }
  const text::KeywordSet& keywords_for(Theme theme) const;
  bool retain_timeline() const { return retain_timeline_; }
  /// Long runs may skip keeping the timeline in memory.
  void set_retain_timeline(bool retain) { retain_timeline_ = retain; }
  std::uint64_t posts_total() const { return posts_total_; }
  SimTime now() const { return scheduler_.now(); }

 private:
  struct Stream {
    std::size_t id;
    text::KeywordSet keywords;
    Sink sink;
  };

  EventScheduler& scheduler_;
  std::map<Theme, text::KeywordSet> theme_keywords_;
  std::vector<AccountProfile> accounts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<Theme, std::vector<std::size_t>> by_theme_;
  std::vector<TweetRecord> timeline_;
  TweetRecord last_post_;
  std::vector<Stream> streams_;
  std::size_t next_stream_id_ = 0;
  PostObserver* observer_ = nullptr;
  bool retain_timeline_ = true;
  std::uint64_t posts_total_ = 0;
};

}  // namespace phishsim

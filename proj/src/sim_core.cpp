#include "phishsim/sim_core.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

namespace phishsim {

// ---------------------------------------------------------------------------
// FlowBuffer

FlowBuffer::FlowBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("flow buffer capacity must be positive");
}

void FlowBuffer::push(TweetRecord tweet) {
  std::lock_guard lock(mu_);
  if (entries_.size() == capacity_) {
    if (on_evict_) on_evict_(entries_.front());
    entries_.pop_front();
    ++dropped_;
  }
  entries_.push_back(std::move(tweet));
}

std::optional<TweetRecord> FlowBuffer::pop() {
  std::lock_guard lock(mu_);
  if (entries_.empty()) return std::nullopt;
  TweetRecord out = std::move(entries_.front());
  entries_.pop_front();
  return out;
}

std::vector<TweetRecord> FlowBuffer::drain() {
  std::lock_guard lock(mu_);
  std::vector<TweetRecord> out(std::make_move_iterator(entries_.begin()),
                               std::make_move_iterator(entries_.end()));
  entries_.clear();
  return out;
}

std::size_t FlowBuffer::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::uint64_t FlowBuffer::dropped_count() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::vector<TweetRecord> FlowBuffer::snapshot() const {
  std::lock_guard lock(mu_);
  return {entries_.begin(), entries_.end()};
}

void FlowBuffer::set_eviction_hook(EvictionHook hook) {
  std::lock_guard lock(mu_);
  on_evict_ = std::move(hook);
}

// ---------------------------------------------------------------------------
// EventScheduler

EventScheduler::EventScheduler(SimTime start, SimTime step) : now_(start), step_(step) {
  if (start < 0) throw InvalidArgument("clock cannot start before the epoch");
  if (step <= 0) throw InvalidArgument("clock step must be positive");
}

std::uint64_t EventScheduler::schedule(SimTime at, Action action, std::string label) {
  if (at < now_) throw InvalidArgument("cannot schedule an event in the past");
  const std::uint64_t seq = next_sequence_++;
  queue_.push(Entry{at, seq, std::move(label), std::move(action)});
  return seq;
}

std::vector<EventScheduler::Fired> EventScheduler::advance_clock(SimTime delta_seconds) {
  if (delta_seconds <= 0) throw InvalidArgument("clock delta must be positive");
  const SimTime target = now_ + delta_seconds;
  std::vector<Fired> fired;
  while (!queue_.empty() && queue_.top().at <= target) {
    // priority_queue::top is const; the entry is copied out before popping
    // so the action may schedule further events.
    Entry e = queue_.top();
    queue_.pop();
    now_ = e.at;
    if (e.action) e.action(e.at);
    fired.push_back(Fired{e.at, e.sequence, std::move(e.label)});
  }
  now_ = target;
  return fired;
}

std::optional<SimTime> EventScheduler::next_event_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().at;
}

// ---------------------------------------------------------------------------
// Population

void CountDistribution::validate(std::string_view what) const {
  auto fail = [&](const std::string& why) {
    throw InvalidArgument(std::string(what) + ": " + why);
  };
  if (!std::isfinite(a) || !std::isfinite(b)) fail("non-finite distribution parameter");
  switch (kind) {
    case Kind::constant:
      if (a < 0) fail("negative support");
      break;
    case Kind::uniform:
      if (a < 0 || b < 0) fail("negative support");
      if (b < a) fail("uniform upper bound below lower bound");
      break;
    case Kind::lognormal:
      if (b < 0) fail("lognormal sigma must be non-negative");
      break;
  }
}

std::int64_t CountDistribution::sample(Rng& rng) const {
  switch (kind) {
    case Kind::constant:
      return static_cast<std::int64_t>(std::floor(a));
    case Kind::uniform: {
      const auto lo = static_cast<std::int64_t>(std::ceil(a));
      const auto hi = static_cast<std::int64_t>(std::floor(b));
      std::uniform_int_distribution<std::int64_t> dist(lo, hi);
      return dist(rng);
    }
    case Kind::lognormal: {
      std::normal_distribution<double> normal(a, b);
      const double v = std::floor(std::exp(normal(rng)));
      return v > 9.0e15 ? static_cast<std::int64_t>(9.0e15) : static_cast<std::int64_t>(v);
    }
  }
  return 0;
}

double CountDistribution::nominal_mean() const {
  switch (kind) {
    case Kind::constant:
      return std::floor(a);
    case Kind::uniform:
      return (std::ceil(a) + std::floor(b)) / 2.0;
    case Kind::lognormal:
      return std::exp(a + b * b / 2.0);
  }
  return 0.0;
}

std::size_t PopulationSpec::total() const {
  std::size_t n = 0;
  for (const auto& [theme, count] : accounts) n += count;
  return n;
}

namespace {

std::string_view theme_prefix(Theme t) {
  switch (t) {
    case Theme::politics:
      return "pol";
    case Theme::sports:
      return "spo";
    case Theme::entertainment:
      return "ent";
  }
  return "xxx";
}

}  // namespace

std::vector<AccountProfile> generate_population(const PopulationSpec& spec, std::uint64_t seed) {
  if (spec.total() == 0) throw InvalidArgument("empty population");
  spec.followers.validate("followers");
  spec.following.validate("following");
  spec.posts.validate("posts");
  spec.age_days.validate("age_days");
  if (spec.location_probability < 0.0 || spec.location_probability > 1.0)
    throw InvalidArgument("location_probability must be in [0, 1]");

  Rng rng = make_rng(seed, "population");
  std::vector<AccountProfile> out;
  out.reserve(spec.total());
  std::size_t serial = 0;
  for (Theme theme : kAllThemes) {
    auto it = spec.accounts.find(theme);
    if (it == spec.accounts.end()) continue;
    for (std::size_t i = 0; i < it->second; ++i) {
      AccountProfile p;
      char handle[32];
      std::snprintf(handle, sizeof handle, "tw_%s_%06zu", theme_prefix(theme).data(), serial++);
      p.handle = handle;
      p.theme_affinity = theme;
      p.followers_count = spec.followers.sample(rng);
      p.following_count = spec.following.sample(rng);
      p.post_count = spec.posts.sample(rng);
      const std::int64_t age_days = spec.age_days.sample(rng);
      p.created_at = std::max<SimTime>(0, spec.reference_time - age_days * kSecondsPerDay);
      if (!spec.location_tags.empty() && uniform01(rng) < spec.location_probability) {
        p.location_tag = spec.location_tags[rng() % spec.location_tags.size()];
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Platform

Platform::Platform(EventScheduler& scheduler,
                   std::map<Theme, std::vector<std::string>> theme_keywords)
    : scheduler_(scheduler) {
  for (auto& [theme, words] : theme_keywords) theme_keywords_[theme] = text::KeywordSet(words);
}

void Platform::add_account(AccountProfile profile) {
  if (profile.followers_count < 0 || profile.following_count < 0 || profile.post_count < 0)
    throw InvalidArgument("account counts must be non-negative");
  if (profile.created_at > scheduler_.now())
    throw InvalidArgument("account created after the current clock");
  if (index_.count(profile.handle)) throw InvalidArgument("duplicate handle");
  const std::size_t idx = accounts_.size();
  index_.emplace(profile.handle, idx);
  by_theme_[profile.theme_affinity].push_back(idx);
  accounts_.push_back(std::move(profile));
}

bool Platform::has_account(std::string_view handle) const {
  return index_.count(std::string(handle)) != 0;
}

const AccountProfile& Platform::account(std::string_view handle) const {
  auto it = index_.find(std::string(handle));
  if (it == index_.end()) throw InvalidArgument("unknown account");
  return accounts_[it->second];
}

const std::vector<std::size_t>& Platform::accounts_with_theme(Theme theme) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = by_theme_.find(theme);
  return it == by_theme_.end() ? kEmpty : it->second;
}

const text::KeywordSet& Platform::keywords_for(Theme theme) const {
  static const text::KeywordSet kEmpty;
  auto it = theme_keywords_.find(theme);
  return it == theme_keywords_.end() ? kEmpty : it->second;
}

const TweetRecord& Platform::post_tweet(std::string_view author, std::string text,
                                        std::vector<std::string> mentions,
                                        std::optional<std::string> link, Theme theme) {
  auto it = index_.find(std::string(author));
  if (it == index_.end()) throw InvalidArgument("unknown account");
  if (observer_ && observer_->is_blocked(author)) throw AccountBanned(std::string(author));

  const std::vector<std::string> tokens = text::tokenize(text);
  TweetRecord rec;
  rec.author = std::string(author);
  rec.text = std::move(text);
  rec.mentions = std::move(mentions);
  rec.link = std::move(link);
  rec.matched_keywords = keywords_for(theme).match(tokens);
  rec.posted_at = scheduler_.now();
  rec.theme = theme;

  accounts_[it->second].post_count += 1;
  ++posts_total_;
  const TweetRecord* stored;
  if (retain_timeline_) {
    timeline_.push_back(std::move(rec));
    stored = &timeline_.back();
  } else {
    last_post_ = std::move(rec);
    stored = &last_post_;
  }

  for (auto& s : streams_) {
    if (s.keywords.matches_any(tokens)) s.sink(*stored);
  }
  if (observer_) observer_->on_post(PostedTweet{*stored, tokens});
  return *stored;
}

Platform::Subscription Platform::subscribe(std::vector<std::string> keywords, Sink sink) {
  text::KeywordSet set(keywords);
  if (set.empty()) throw InvalidArgument("keyword list must not be empty");
  const std::size_t id = next_stream_id_++;
  streams_.push_back(Stream{id, std::move(set), std::move(sink)});
  return Subscription{id};
}

Platform::Subscription Platform::stream_by_keywords(std::vector<std::string> keywords,
                                                    FlowBuffer& buffer) {
  return subscribe(std::move(keywords), [&buffer](const TweetRecord& t) { buffer.push(t); });
}

void Platform::unsubscribe(Subscription sub) {
  std::erase_if(streams_, [&](const Stream& s) { return s.id == sub.id; });
}

}  // namespace phishsim

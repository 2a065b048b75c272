#include <doctest.h>

#include <algorithm>
#include <set>

#include "phishsim/detection.hpp"
#include "phishsim/text.hpp"

using namespace phishsim;

namespace {

TweetRecord tweet(SimTime at, std::string text, bool mention = false,
                  std::optional<std::string> link = std::nullopt) {
  TweetRecord t;
  t.author = "bot";
  t.text = std::move(text);
  t.posted_at = at;
  if (mention) t.mentions = {"someone"};
  t.link = std::move(link);
  return t;
}

// Reference implementation over the full history, using string shingles.
struct BruteForce {
  struct Post {
    SimTime at;
    bool mention;
    std::vector<std::string> tokens;
  };
  DetectionConfig cfg;
  std::vector<Post> history;
  double score = 0;
  SimTime updated = 0;
  std::array<std::optional<SimTime>, 4> last{};

  static std::set<std::string> grams(const std::vector<std::string>& t) {
    std::set<std::string> g;
    if (t.size() < 3) {
      g.insert(t.begin(), t.end());
      return g;
    }
    for (std::size_t i = 0; i + 2 < t.size(); ++i) g.insert(t[i] + '\x1f' + t[i + 1] + '\x1f' + t[i + 2]);
    return g;
  }
  static double jac(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> ta = a, tb = b;
    if (a.size() < 3 || b.size() < 3) {
      std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
      return set_jac(sa, sb);
    }
    return set_jac(grams(ta), grams(tb));
  }
  static double set_jac(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
  }

  std::array<bool, 4> push(const TweetRecord& t) {
    std::vector<std::string> toks = text::tokenize(t.text);
    if (t.link) toks.push_back("\x01" + canonical_link_token(*t.link));
    const SimTime now = t.posted_at;
    std::array<bool, 4> fired{};
    // R2 against earlier posts only.
    const std::size_t n = history.size();
    double best = 0;
    for (std::size_t i = n > cfg.similarity_lookback ? n - cfg.similarity_lookback : 0; i < n; ++i)
      best = std::max(best, jac(toks, history[i].tokens));
    fired[1] = n > 0 && best >= cfg.similarity_threshold;
    history.push_back({now, !t.mentions.empty(), toks});
    if (history.size() >= cfg.window_size) {
      std::size_t m = 0;
      for (std::size_t i = history.size() - cfg.window_size; i < history.size(); ++i) m += history[i].mention;
      fired[0] = static_cast<double>(m) / static_cast<double>(cfg.window_size) >= cfg.mention_frac_threshold;
    }
    int last_hour = 0;
    std::vector<bool> hours(static_cast<std::size_t>(cfg.continuous_hours_threshold));
    for (const auto& p : history) {
      if (now - p.at < kSecondsPerHour) ++last_hour;
      const SimTime h = (now - p.at) / kSecondsPerHour;
      if (h < cfg.continuous_hours_threshold) hours[static_cast<std::size_t>(h)] = true;
    }
    fired[3] = last_hour > cfg.rate_threshold;
    fired[2] = std::all_of(hours.begin(), hours.end(), [](bool b) { return b; });

    score = std::max(0.0, score - cfg.decay_per_hour * static_cast<double>(now - updated) / 3600.0);
    updated = now;
    const double pts[4] = {cfg.rule_points.mention_saturation, cfg.rule_points.near_duplicate,
                           cfg.rule_points.continuous_activity, cfg.rule_points.rate};
    for (int r = 0; r < 4; ++r) {
      if (!fired[r] || (last[r] && now - *last[r] < cfg.rule_cooldown)) continue;
      score += pts[r];
      last[r] = now;
    }
    return fired;
  }
};

}  // namespace

TEST_CASE("jaccard_3gram examples") {
  CHECK(jaccard_3gram("a b c d", "a b c e") == doctest::Approx(1.0 / 3.0));
  CHECK(jaccard_3gram("o jogo de hoje", "o jogo de hoje") == 1.0);
  CHECK(jaccard_3gram("um dois tres", "quatro cinco seis") == 0.0);
  CHECK(jaccard_3gram("", "") == 1.0);
  CHECK(jaccard_3gram("oi", "oi tchau") == doctest::Approx(0.5));
}

TEST_CASE("jaccard_3gram is symmetric") {
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    std::string x, y;
    for (int k = 0, n = static_cast<int>(rng() % 7); k < n; ++k) x += vocab[rng() % 5] + " ";
    for (int k = 0, n = static_cast<int>(rng() % 7); k < n; ++k) y += vocab[rng() % 5] + " ";
    CHECK(jaccard_3gram(x, y) == jaccard_3gram(y, x));
    CHECK(jaccard_3gram(x, y) == doctest::Approx(BruteForce::jac(text::tokenize(x), text::tokenize(y))));
  }
}

TEST_CASE("canonical link token drops query and fragment") {
  CHECK(canonical_link_token("https://Landing.example/bait?id=abc#x") == "https://landing.example/bait");
  CHECK(canonical_link_token("https://sho.rt/Ab12") == "https://sho.rt/ab12");
}

TEST_CASE("R1 fires on the 20th consecutive mention") {
  AccountStanding s;
  DetectionConfig cfg;
  cfg.score_ban_threshold = 1e9;
  for (int i = 1; i <= 20; ++i) {
    const auto ev = score_tweet(s, tweet(i * 600, "post numero " + std::to_string(i) + " texto diferente " + std::string(static_cast<std::size_t>(i), 'x'), true), cfg);
    CHECK(ev.fired(Rule::mention_saturation) == (i == 20));
  }
}

TEST_CASE("R2 on identical and disjoint texts") {
  DetectionConfig cfg;
  AccountStanding s;
  score_tweet(s, tweet(0, "veja a noticia de hoje"), cfg);
  CHECK(score_tweet(s, tweet(60, "veja a noticia de hoje"), cfg).fired(Rule::near_duplicate));
  AccountStanding d;
  score_tweet(d, tweet(0, "um dois tres"), cfg);
  const auto ev = score_tweet(d, tweet(60, "quatro cinco seis"), cfg);
  CHECK_FALSE(ev.fired(Rule::near_duplicate));
  CHECK(ev.max_similarity == 0.0);
}

TEST_CASE("shared raw bait links raise similarity; per-target short links do not") {
  DetectionConfig cfg;
  AccountStanding raw, short_links;
  score_tweet(raw, tweet(0, "leia agora o jogo", false, "https://l.example/bait?id=1"), cfg);
  const auto r = score_tweet(raw, tweet(60, "leia agora o jogo", false, "https://l.example/bait?id=2"), cfg);
  score_tweet(short_links, tweet(0, "leia agora o jogo", false, "https://sho.rt/aaaa"), cfg);
  const auto s = score_tweet(short_links, tweet(60, "leia agora o jogo", false, "https://sho.rt/bbbb"), cfg);
  CHECK(r.max_similarity == 1.0);
  CHECK(s.max_similarity == doctest::Approx(0.5));
}

TEST_CASE("R3 needs a post in each of the last 24 hours") {
  DetectionConfig cfg;
  cfg.score_ban_threshold = 1e9;
  AccountStanding s;
  RuleEvaluation ev;
  for (int h = 0; h < 24; ++h) {
    ev = score_tweet(s, tweet(h * 3600 + 10, "hora " + std::to_string(h) + " algo novo aqui"), cfg);
    CHECK(ev.fired(Rule::continuous_activity) == (h == 23));
  }
  AccountStanding gap;
  for (int h = 0; h < 26; ++h) {
    if (h == 12) continue;
    ev = score_tweet(gap, tweet(h * 3600 + 10, "hora " + std::to_string(h) + " outro texto"), cfg);
  }
  CHECK_FALSE(ev.fired(Rule::continuous_activity));
}

TEST_CASE("R4 fires above the hourly rate") {
  DetectionConfig cfg;
  cfg.score_ban_threshold = 1e9;
  AccountStanding s;
  RuleEvaluation ev;
  for (int i = 0; i <= cfg.rate_threshold; ++i) {
    ev = score_tweet(s, tweet(i * 60, "post " + std::to_string(i) + " " + std::string(static_cast<std::size_t>(i + 1), 'z')), cfg);
    CHECK(ev.fired(Rule::rate) == (i == cfg.rate_threshold));
  }
}

TEST_CASE("rules agree with a brute-force evaluator over random traces") {
  const std::vector<std::string> vocab = {"gol", "jogo", "hoje", "veja", "noticia", "time",
                                          "copa", "final"};
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    DetectionConfig cfg;
    cfg.score_ban_threshold = 1e12;
    cfg.window_size = 5 + seed % 4;
    cfg.similarity_lookback = 3 + seed % 5;
    cfg.continuous_hours_threshold = 3;
    cfg.rate_threshold = 6;
    BruteForce oracle{cfg};
    AccountStanding s;
    std::mt19937_64 rng(seed);
    SimTime now = 0;
    for (int i = 0; i < 400; ++i) {
      now += 1 + static_cast<SimTime>(rng() % 1500);
      std::string text;
      for (int k = 0, n = 1 + static_cast<int>(rng() % 5); k < n; ++k) text += vocab[rng() % vocab.size()] + " ";
      std::optional<std::string> link;
      if (rng() % 3 == 0) link = "https://l.example/bait?id=" + std::to_string(rng() % 4);
      const auto t = tweet(now, text, rng() % 4 != 0, link);
      const auto ev = score_tweet(s, t, cfg);
      const auto want = oracle.push(t);
      for (std::size_t r = 0; r < 4; ++r) CHECK(ev.satisfied[r] == want[r]);
      CHECK(ev.score_after == doctest::Approx(oracle.score).epsilon(1e-9));
    }
  }
}

TEST_CASE("score crosses the threshold once, then the account is frozen") {
  DetectionConfig cfg;
  AccountStanding s;
  std::optional<SimTime> ban;
  for (int i = 0; i < 400 && !s.banned(); ++i) {
    const auto ev = score_tweet(s, tweet(i * 60, "mesmo texto de sempre aqui", true), cfg);
    if (ev.banned_now) ban = i * 60;
  }
  REQUIRE(s.banned());
  CHECK(s.banned_at == ban);
  CHECK(s.score >= cfg.score_ban_threshold);
  CHECK_THROWS_AS(score_tweet(s, tweet(*ban + 60, "outra"), cfg), ContractViolation);
}

TEST_CASE("score decays linearly between posts") {
  DetectionConfig cfg;
  AccountStanding s;
  s.score = 50;
  s.score_updated_at = 0;
  CHECK(s.score_at(2 * 3600, cfg) == doctest::Approx(30));
  CHECK(s.score_at(10 * 3600, cfg) == 0.0);
}

TEST_CASE("complaints ban at the configured count and are absorbed after") {
  DetectionConfig cfg;
  AccountStanding s;
  CHECK_FALSE(register_complaint(s, 10, cfg));
  CHECK_FALSE(register_complaint(s, 20, cfg));
  CHECK_FALSE(s.banned());
  CHECK(register_complaint(s, 30, cfg));
  CHECK(s.banned_at == 30);
  CHECK(s.ban_rule == Rule::complaints);
  const AccountStanding before = s;
  CHECK_FALSE(register_complaint(s, 40, cfg));
  CHECK(s.complaint_count == before.complaint_count);
  CHECK(s.banned_at == before.banned_at);
}

TEST_CASE("engine emits one ban event and blocks the account") {
  DetectionEngine engine{DetectionConfig{}};
  std::vector<BanEvent> seen;
  engine.on_ban([&](const BanEvent& b) { seen.push_back(b); });
  for (int i = 0; i < 5; ++i) engine.register_complaint("v", "bot", 100 + i);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].handle == "bot");
  CHECK(seen[0].banned_at == 102);
  CHECK(rule_code(seen[0].trigger) == "complaints");
  CHECK(engine.is_blocked("bot"));
  CHECK_FALSE(engine.is_blocked("v"));
}

TEST_CASE("config validation names the field") {
  DetectionConfig cfg;
  cfg.mention_frac_threshold = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("detection.mention_frac_threshold"), InvalidArgument);
  cfg = {};
  cfg.window_size = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

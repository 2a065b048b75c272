#include <doctest.h>

#include <random>
#include <sstream>

#include "phishsim/report.hpp"
#include "phishsim/run_log.hpp"
#include "support.hpp"

using namespace phishsim;

namespace {

RunMetadata meta_for(std::initializer_list<std::pair<Theme, PolicyVersion>> bots) {
  RunMetadata meta;
  meta.scenario = "fixture";
  meta.seed = 1;
  meta.duration_hours = 48;
  meta.attack_start = 1000;
  for (auto [theme, policy] : bots) {
    BotSummary b;
    b.actor = "bot/" + std::string(to_string(theme));
    b.theme = theme;
    b.policy = policy;
    meta.bots.push_back(b);
  }
  return meta;
}

RunLogEvent attack(Theme theme, const std::string& pseudonym, SimTime t = 2000) {
  return {t, "bot/" + std::string(to_string(theme)), "attack_sent",
          {{"theme", std::string(to_string(theme))}, {"pseudonym", pseudonym}}};
}

RunLogEvent landing(const std::string& pseudonym, const char* kind, int status = 200) {
  return {3000, "victim", "landing_request", {{"pseudonym", pseudonym}, {"kind", kind}, {"status", status}}};
}

std::vector<RunLogEvent> attacks(std::map<Theme, int> counts) {
  std::vector<RunLogEvent> log;
  for (auto [theme, n] : counts)
    for (int i = 0; i < n; ++i) log.push_back(attack(theme, std::string(to_string(theme)) + std::to_string(i)));
  return log;
}

}  // namespace

TEST_CASE("table counts are reproduced from the log") {
  const auto exp3_log = attacks({{Theme::politics, 336}, {Theme::sports, 160}, {Theme::entertainment, 245}});
  const auto exp3 = summarize_report(exp3_log, {}, std::nullopt,
                                     meta_for({{Theme::politics, PolicyVersion::v3},
                                               {Theme::sports, PolicyVersion::v3},
                                               {Theme::entertainment, PolicyVersion::v3}}));
  CHECK(exp3.stimuli.at(Theme::politics) == 336);
  CHECK(exp3.stimuli.at(Theme::sports) == 160);
  CHECK(exp3.stimuli.at(Theme::entertainment) == 245);
  CHECK(exp3.total_stimuli == 741);

  const auto exp4_log = attacks({{Theme::politics, 353}, {Theme::sports, 216}});
  const auto exp4 = summarize_report(exp4_log, {}, std::nullopt,
                                     meta_for({{Theme::politics, PolicyVersion::v4},
                                               {Theme::sports, PolicyVersion::v4}}));
  CHECK(exp4.stimuli.at(Theme::politics) == 353);
  CHECK(exp4.stimuli.at(Theme::sports) == 216);
  CHECK(exp4.stimuli.at(Theme::entertainment) == 0);
  CHECK(exp4.stimuli.at(Theme::politics) - exp3.stimuli.at(Theme::politics) == 17);
  CHECK(exp4.meta.bots[0].attacks == 353);
}

TEST_CASE("per-theme stimuli sum to the attack tweets in the log") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<Theme, int> counts;
    for (Theme t : kAllThemes) counts[t] = static_cast<int>(rng() % 50);
    auto log = attacks(counts);
    log.push_back({0, "bot/sports", "legit_sent", {{"theme", "sports"}}});
    const auto r = summarize_report(log, {}, std::nullopt,
                                    meta_for({{Theme::politics, PolicyVersion::v3},
                                              {Theme::sports, PolicyVersion::v3},
                                              {Theme::entertainment, PolicyVersion::v3}}));
    std::uint64_t sum = 0;
    for (auto [t, n] : r.stimuli) sum += n;
    std::uint64_t attack_events = 0;
    for (const auto& e : log) attack_events += e.event == "attack_sent";
    CHECK(sum == attack_events);
    CHECK(r.total_stimuli == attack_events);
    CHECK(r.meta.bots[1].legit == 1);
  }
}

TEST_CASE("hits, bans and the ledger are carried into the report") {
  auto log = attacks({{Theme::sports, 3}, {Theme::entertainment, 2}});
  log.push_back(landing("sports0", "page_view"));
  log.push_back(landing("sports0", "plain_access"));
  log.push_back(landing("sports1", "page_view"));
  log.push_back(landing("entertainment1", "page_view"));
  log.push_back(landing("entertainment1", "register_access", 400));
  log.push_back({5400, "platform", "ban", {{"actor", "bot/sports"}, {"banned_at", 6400}, {"triggering_rule", "R4"}, {"score", 2.5}}});

  LandingService svc(LandingContent::load(phishsim::testing::data_dir()));
  for (const char* p : {"sports0", "sports1", "sports2"}) svc.register_pseudonym(p, Theme::sports);
  for (const char* p : {"entertainment0", "entertainment1"}) svc.register_pseudonym(p, Theme::entertainment);
  InProcessLandingClient c(svc);
  c.visit("sports0", 1);
  c.plain_access("sports0", 2);
  c.visit("sports1", 3);
  c.visit("entertainment1", 4);
  c.register_access("entertainment1", "", "", "", 5);

  const auto r = summarize_report(log, svc.snapshot(), std::nullopt,
                                  meta_for({{Theme::sports, PolicyVersion::v2},
                                            {Theme::entertainment, PolicyVersion::v2}}));
  CHECK(r.hits.at(Theme::sports) == 3);
  CHECK(r.hits.at(Theme::entertainment) == 1);
  CHECK(r.ledger.total_visits == 3);
  CHECK(r.ledger.news_visits == 1);
  CHECK(r.ledger.per_pseudonym.empty());
  const auto& sports_bot = r.meta.bots[0];
  CHECK(sports_bot.banned_at == 6400);
  CHECK(sports_bot.ban_rule == "R4");
  CHECK(*sports_bot.hours_to_ban == doctest::Approx(1.5));
  CHECK_FALSE(r.meta.bots[1].banned_at);

  const auto j = to_json(r);
  CHECK(j["stimuli"]["sports"] == 3);
  CHECK(j["hits"]["sports"] == 3);
  CHECK(j["bots"][0]["ban_rule"] == "R4");
  CHECK(j["bots"][1]["banned_at"].is_null());
  CHECK_FALSE(j["ledger"].contains("per_pseudonym"));
  CHECK_FALSE(j.contains("fit"));
}

TEST_CASE("inconsistent inputs are rejected as corrupted") {
  const auto meta = meta_for({{Theme::sports, PolicyVersion::v2}});
  auto base = attacks({{Theme::sports, 2}});

  SUBCASE("ledger counts a visit the log does not") {
    LedgerSnapshot ledger;
    ledger.unique_visitors = ledger.total_visits = 1;
    ledger.per_pseudonym["sports0"].visit_count = 1;
    CHECK_THROWS_AS(summarize_report(base, ledger, std::nullopt, meta), ContractViolation);
  }
  SUBCASE("log counts a download the ledger does not") {
    base.push_back(landing("sports0", "project_doc"));
    CHECK_THROWS_WITH_AS(summarize_report(base, {}, std::nullopt, meta),
                         doctest::Contains("corrupted run"), ContractViolation);
  }
  SUBCASE("same pseudonym attacked twice") {
    base.push_back(attack(Theme::sports, "sports0"));
    CHECK_THROWS_AS(summarize_report(base, {}, std::nullopt, meta), ContractViolation);
  }
  SUBCASE("attack from an actor not in the metadata") {
    base.push_back(attack(Theme::politics, "politics0"));
    CHECK_THROWS_AS(summarize_report(base, {}, std::nullopt, meta), ContractViolation);
  }
  SUBCASE("ledger hit on a pseudonym never stimulated") {
    base.push_back(landing("stranger", "page_view"));
    LedgerSnapshot ledger;
    ledger.unique_visitors = ledger.total_visits = 1;
    ledger.per_pseudonym["stranger"].visit_count = 1;
    CHECK_THROWS_AS(summarize_report(base, ledger, std::nullopt, meta), ContractViolation);
  }
  SUBCASE("ledger that breaks its own invariants") {
    base.push_back(landing("sports0", "plain_access"));
    LedgerSnapshot ledger;
    ledger.unregistered_access = 1;
    CHECK_THROWS_AS(summarize_report(base, ledger, std::nullopt, meta), ContractViolation);
  }
}

TEST_CASE("empty run gives an all-zero report without a fit") {
  const auto r = summarize_report({}, {}, std::nullopt, RunMetadata{});
  CHECK(r.total_stimuli == 0);
  for (Theme t : kAllThemes) {
    CHECK(r.stimuli.at(t) == 0);
    CHECK(r.hits.at(t) == 0);
  }
  CHECK(r.ledger == LedgerSnapshot{});
  const auto j = to_json(r);
  CHECK_FALSE(j.contains("fit"));
  CHECK(j["total_stimuli"] == 0);
}

TEST_CASE("run log round trip") {
  std::vector<RunLogEvent> log = {attack(Theme::politics, "abc", 7), landing("abc", "page_view")};
  std::stringstream ss;
  write_run_log(ss, log);
  CHECK(read_run_log(ss) == log);
  std::stringstream bad("{\"t\": 1}\n");
  CHECK_THROWS(read_run_log(bad));
}

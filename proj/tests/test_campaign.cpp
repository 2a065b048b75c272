#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "phishsim/bot_agent.hpp"
#include "phishsim/campaign.hpp"
#include "phishsim/io.hpp"
#include "support.hpp"

using namespace phishsim;
using phishsim::testing::data_dir;
using phishsim::testing::TempDir;

namespace {

ScenarioConfig preset(std::string_view name, std::vector<std::string> overrides = {}) {
  return load_config(preset_path(name, data_dir()), overrides);
}

std::size_t count_events(const CampaignResult& r, std::string_view event, std::string_view actor = {}) {
  std::size_t n = 0;
  for (const auto& e : r.log) n += e.event == event && (actor.empty() || e.actor == actor);
  return n;
}

std::map<std::string, std::string> read_dir(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    out[entry.path().filename().string()] = io::read_file(entry.path());
  return out;
}

}  // namespace

TEST_CASE("two plain bots send their quotas and are banned") {
  const auto r = run_campaign(preset("exp2"));
  CHECK(count_events(r, "attack_sent", "bot/sports") == 33);
  CHECK(count_events(r, "attack_sent", "bot/entertainment") == 32);
  CHECK(r.report.total_stimuli == 65);
  CHECK(r.targets.size() == 65);
  for (const auto& b : r.report.meta.bots) {
    INFO(b.actor);
    CHECK(b.banned_at.has_value());
    CHECK(*b.hours_to_ban < 3.5);
  }
  CHECK(r.report.hits.at(Theme::sports) > r.report.hits.at(Theme::entertainment));
  CHECK(r.ledger.invariants_hold());
}

TEST_CASE("pseudonyms are stimulated once and every landing hit is attributed") {
  const auto r = run_campaign(preset("exp3"));
  std::set<std::string> attacked;
  std::set<std::string> responded;
  for (const auto& e : r.log) {
    if (e.event == "attack_sent") {
      const auto p = e.payload.at("pseudonym").get<std::string>();
      CHECK(attacked.insert(p).second);
      const auto link = e.payload.at("link").get<std::string>();
      CHECK(link.find(p) == std::string::npos);  // v3 hides the id behind the shortener
    }
    if (e.event == "landing_request") {
      const auto p = e.payload.at("pseudonym").get<std::string>();
      CHECK(attacked.count(p) == 1);
      responded.insert(p);
    }
  }
  CHECK(attacked.size() == 741);
  CHECK(r.ledger.unattributed.hits() == 0);
  for (const auto& [p, h] : r.ledger.per_pseudonym) CHECK(attacked.count(p) == 1);
  CHECK(r.ledger.unique_visitors == responded.size());
  std::set<std::string> handles(r.handles.begin(), r.handles.end());
  for (const auto& p : attacked) CHECK(handles.count(p) == 0);
}

TEST_CASE("plain bait links carry the pseudonym itself") {
  const auto r = run_campaign(preset("exp2"));
  for (const auto& e : r.log) {
    if (e.event != "attack_sent") continue;
    CHECK(pseudonym_from_url(e.payload.at("link").get<std::string>()) ==
          e.payload.at("pseudonym").get<std::string>());
  }
}

TEST_CASE("paced bots post nothing during the night pause") {
  const auto r = run_campaign(preset("exp4"));
  const NightPause pause;
  std::size_t posts = 0;
  for (const auto& e : r.log) {
    if (e.event != "attack_sent" && e.event != "legit_sent") continue;
    ++posts;
    CHECK_FALSE(pause.contains(e.t));
  }
  CHECK(posts > 569);

  // A run that lies entirely inside the pause produces no bot posts at all.
  const auto night = run_campaign(preset("exp4", {"duration_hours=7.5"}));
  CHECK(count_events(night, "attack_sent") == 0);
  CHECK(count_events(night, "legit_sent") == 0);
  CHECK(night.report.total_stimuli == 0);
}

TEST_CASE("the same seed gives the same run") {
  const auto a = run_campaign(preset("exp2"));
  const auto b = run_campaign(preset("exp2"));
  CHECK(a.log == b.log);
  CHECK(a.ledger == b.ledger);
  const auto c = run_campaign(preset("exp2", {"seed=7"}));
  CHECK(c.log != a.log);
}

TEST_CASE("HTTP transport books the same ledger as the in-process one") {
  const auto local = run_campaign(preset("exp2"));
  const auto wire = run_campaign(preset("exp2", {"landing.transport=http"}));
  CHECK(wire.ledger == local.ledger);
  CHECK(wire.log == local.log);
}

TEST_CASE("campaign artifacts are complete and reproducible") {
  TempDir dir("campaign");
  const auto r = run_campaign(preset("exp2"));
  write_artifacts(r, dir.path() / "a");
  write_artifacts(run_campaign(preset("exp2")), dir.path() / "b");
  const auto a = read_dir(dir.path() / "a");
  CHECK(a == read_dir(dir.path() / "b"));

  const auto names = artifact_names(RunMode::campaign);
  const std::set<std::string> expected(names.begin(), names.end());
  std::set<std::string> got;
  for (const auto& [name, _] : a) got.insert(name);
  CHECK(got == expected);
  CHECK(got == std::set<std::string>{"config.yaml", "ledger.json", "report.json", "run_log.jsonl", "targets.csv"});

  std::istringstream log_in(a.at("run_log.jsonl"));
  CHECK(read_run_log(log_in) == r.log);
  std::istringstream targets_in(a.at("targets.csv"));
  CHECK(read_targets_csv(targets_in).size() == 65);
  CHECK(ledger_from_json(nlohmann::json::parse(a.at("ledger.json"))) == r.ledger);
  const auto report = nlohmann::json::parse(a.at("report.json"));
  CHECK(report["stimuli"]["sports"] == 33);
  CHECK(report["seed"] == 20181018);

  // The config snapshot replays the run.
  const auto replay = run_campaign(load_config(dir.path() / "a" / "config.yaml"));
  CHECK(replay.log == r.log);

  for (const auto& [name, content] : a)
    for (const auto& h : r.handles) CHECK_MESSAGE(content.find(h) == std::string::npos, name);
}

TEST_CASE("capture mode emits only the capture artifacts") {
  TempDir dir("capture");
  const auto r = run_campaign(preset("exp1"));
  CHECK(r.report.total_stimuli == 0);
  CHECK(r.targets.empty());
  CHECK_FALSE(r.capture.empty());
  CHECK(r.organic_posts >= r.capture.size());
  write_artifacts(r, dir.path());
  std::set<std::string> got;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) got.insert(e.path().filename().string());
  CHECK(got == std::set<std::string>{"capture.jsonl", "config.yaml", "followerrank_histogram.csv"});

  std::set<std::string> handles(r.handles.begin(), r.handles.end());
  for (const auto& t : r.capture) {
    CHECK(handles.count(t.author) == 0);
    CHECK_FALSE(t.matched_keywords.empty());
    for (const auto& m : t.mentions) CHECK(handles.count(m) == 0);
  }
  std::map<Theme, std::uint64_t> per_theme;
  for (const auto& b : r.histogram) {
    CHECK(b.lower < b.upper);
    per_theme[b.theme] += b.accounts;
  }
  std::map<Theme, std::set<std::string>> authors;
  for (const auto& t : r.capture) authors[t.theme].insert(t.author);
  for (const auto& [theme, set] : authors) CHECK(per_theme[theme] == set.size());
}

TEST_CASE("summary mentions every bot") {
  const auto r = run_campaign(preset("exp2"));
  const auto text = summary_text(r);
  CHECK(text.find("bot/sports") != std::string::npos);
  CHECK(text.find("bot/entertainment") != std::string::npos);
  CHECK(text.find("65") != std::string::npos);
}

#include "phishsim/report.hpp"

#include <set>

namespace phishsim {

namespace {

[[noreturn]] void corrupted(const std::string& what) {
  throw ContractViolation("corrupted run: " + what);
}

}  // namespace

CampaignReport summarize_report(std::span<const RunLogEvent> log, const LedgerSnapshot& ledger,
                                std::optional<RegressionFit> fit, RunMetadata meta,
                                std::string fit_note) {
  CampaignReport r;
  for (Theme t : kAllThemes) {
    r.stimuli[t] = 0;
    r.hits[t] = 0;
  }
  std::map<std::string, BotSummary*> bots;
  for (auto& b : meta.bots) bots[b.actor] = &b;

  std::map<std::string, Theme> attacked;
  std::uint64_t page_views = 0, registers = 0, plains = 0, docs = 0;
  for (const RunLogEvent& e : log) {
    if (e.event == "attack_sent") {
      const Theme theme = parse_theme(e.payload.at("theme").get<std::string>());
      const auto pseudonym = e.payload.at("pseudonym").get<std::string>();
      if (!attacked.emplace(pseudonym, theme).second) corrupted("pseudonym attacked twice");
      ++r.stimuli[theme];
      ++r.total_stimuli;
      auto it = bots.find(e.actor);
      if (it == bots.end()) corrupted("attack from unknown actor " + e.actor);
      if (it->second->theme != theme) corrupted("attack outside the bot's theme");
      ++it->second->attacks;
    } else if (e.event == "legit_sent") {
      auto it = bots.find(e.actor);
      if (it == bots.end()) corrupted("post from unknown actor " + e.actor);
      ++it->second->legit;
    } else if (e.event == "ban") {
      const auto actor = e.payload.value("actor", std::string());
      auto it = bots.find(actor);
      if (it != bots.end() && !it->second->banned_at) {
        it->second->banned_at = e.payload.at("banned_at").get<SimTime>();
        it->second->ban_rule = e.payload.at("triggering_rule").get<std::string>();
        it->second->hours_to_ban =
            static_cast<double>(*it->second->banned_at - meta.attack_start) / kSecondsPerHour;
      }
    } else if (e.event == "landing_request") {
      const int status = e.payload.at("status").get<int>();
      if (status >= 400) continue;
      const auto kind = e.payload.at("kind").get<std::string>();
      if (kind == "page_view") ++page_views;
      else if (kind == "register_access") ++registers;
      else if (kind == "plain_access") ++plains;
      else if (kind == "project_doc") ++docs;
    }
  }

  if (page_views != ledger.total_visits) corrupted("page views in log differ from ledger total_visits");
  if (registers != ledger.registered_access) corrupted("registrations in log differ from ledger");
  if (plains != ledger.unregistered_access) corrupted("plain accesses in log differ from ledger");
  if (docs != ledger.project_downloads) corrupted("downloads in log differ from ledger");
  if (auto v = ledger.invariant_violation(); !v.empty()) corrupted(v);
  for (const auto& [pseudonym, h] : ledger.per_pseudonym) {
    auto it = attacked.find(pseudonym);
    if (it == attacked.end()) corrupted("ledger holds a pseudonym that was never stimulated");
    if (h.theme && *h.theme != it->second) corrupted("ledger theme differs from the attack theme");
    r.hits[it->second] += h.hits();
  }

  r.ledger = ledger;
  r.ledger.per_pseudonym.clear();
  r.fit = std::move(fit);
  r.fit_note = std::move(fit_note);
  r.meta = std::move(meta);
  return r;
}

nlohmann::json to_json(const CampaignReport& r) {
  nlohmann::json stimuli = nlohmann::json::object();
  nlohmann::json hits = nlohmann::json::object();
  for (const auto& [t, n] : r.stimuli) stimuli[std::string(to_string(t))] = n;
  for (const auto& [t, n] : r.hits) hits[std::string(to_string(t))] = n;
  nlohmann::json bots = nlohmann::json::array();
  for (const BotSummary& b : r.meta.bots) {
    nlohmann::json j = {{"actor", b.actor},
                        {"theme", std::string(to_string(b.theme))},
                        {"policy", std::string(to_string(b.policy))},
                        {"attacks", b.attacks},
                        {"legit_posts", b.legit}};
    j["quota"] = b.quota ? nlohmann::json(*b.quota) : nlohmann::json(nullptr);
    j["banned_at"] = b.banned_at ? nlohmann::json(*b.banned_at) : nlohmann::json(nullptr);
    j["ban_rule"] = b.ban_rule ? nlohmann::json(*b.ban_rule) : nlohmann::json(nullptr);
    j["hours_to_ban"] = b.hours_to_ban ? nlohmann::json(*b.hours_to_ban) : nlohmann::json(nullptr);
    bots.push_back(std::move(j));
  }
  nlohmann::json ledger = to_json(r.ledger);
  ledger.erase("per_pseudonym");
  nlohmann::json j = {{"scenario", r.meta.scenario},
                      {"seed", r.meta.seed},
                      {"duration_hours", r.meta.duration_hours},
                      {"attack_start", r.meta.attack_start},
                      {"stimuli", stimuli},
                      {"total_stimuli", r.total_stimuli},
                      {"hits", hits},
                      {"bots", bots},
                      {"ledger", ledger}};
  if (r.fit) j["fit"] = to_json(*r.fit);
  if (!r.fit_note.empty()) j["fit_note"] = r.fit_note;
  return j;
}

}  // namespace phishsim

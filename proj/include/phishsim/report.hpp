#pragma once

// Campaign accounting: per-theme stimuli and hits, bot outcomes, the
// ledger counters and the regression fit, cross-checked against the run
// log.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phishsim/bot_agent.hpp"
#include "phishsim/landing.hpp"
#include "phishsim/profiler.hpp"
#include "phishsim/run_log.hpp"

namespace phishsim {

struct BotSummary {
  std::string actor;  // e.g. "bot/sports"
  Theme theme = Theme::politics;
  PolicyVersion policy = PolicyVersion::v2;
  std::optional<std::size_t> quota;
  std::size_t attacks = 0;
  std::size_t legit = 0;
  std::optional<SimTime> banned_at;
  std::optional<std::string> ban_rule;
  /// Hours from the start of the attack phase to the ban.
  std::optional<double> hours_to_ban;
};

struct RunMetadata {
  std::string scenario;
  std::uint64_t seed = 0;
  double duration_hours = 0.0;
  SimTime attack_start = 0;
  std::vector<BotSummary> bots;  // actor, theme, policy and quota filled in
};

struct CampaignReport {
  RunMetadata meta;
  std::map<Theme, std::uint64_t> stimuli;
  std::map<Theme, std::uint64_t> hits;
  std::uint64_t total_stimuli = 0;
  LedgerSnapshot ledger;  // counters only
  std::optional<RegressionFit> fit;
  std::string fit_note;
};

/// Counts attack tweets per theme and per bot from the log and checks
/// them against the ledger. Throws ContractViolation ("corrupted run")
/// when the log and the ledger disagree.
CampaignReport summarize_report(std::span<const RunLogEvent> log, const LedgerSnapshot& ledger,
                                std::optional<RegressionFit> fit, RunMetadata meta,
                                std::string fit_note = {});

nlohmann::json to_json(const CampaignReport& report);

}  // namespace phishsim

#pragma once

// Runs one scenario end to end and writes its artifacts.
//
// campaign mode: stream -> buffer -> sample -> craft -> post -> detection
// -> victim response -> landing hits, then accounting and the fit.
// capture mode: organic traffic only; emits the pseudonymised keyword
// capture and a FollowerRank histogram per theme.

#include <filesystem>
#include <string>
#include <vector>

#include "phishsim/landing.hpp"
#include "phishsim/report.hpp"
#include "phishsim/run_log.hpp"
#include "phishsim/scenario.hpp"
#include "phishsim/target_sampler.hpp"

namespace phishsim {

struct HistogramBin {
  Theme theme = Theme::politics;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t accounts = 0;
};

struct CampaignResult {
  ScenarioConfig config;
  std::vector<RunLogEvent> log;
  LedgerSnapshot ledger;
  std::vector<TargetRecord> targets;  // stimulated, in send order
  CampaignReport report;

  std::vector<TweetRecord> capture;  // capture mode, pseudonymised
  std::vector<HistogramBin> histogram;

  /// Every platform handle of the run, bots included. In memory only, for
  /// leak checks.
  std::vector<std::string> handles;
  std::uint64_t organic_posts = 0;
};

CampaignResult run_campaign(const ScenarioConfig& config);

/// Artifact file names a run of this mode writes.
std::vector<std::string> artifact_names(RunMode mode);

/// Creates `out_dir` if needed and writes every artifact plus config.yaml.
void write_artifacts(const CampaignResult& result, const std::filesystem::path& out_dir);

/// Short human-readable summary for the terminal.
std::string summary_text(const CampaignResult& result);

}  // namespace phishsim

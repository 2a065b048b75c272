#pragma once

// Scenario configuration: YAML schema, overrides, validation with
// field-path diagnostics, presets and the provenance snapshot.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phishsim/bot_agent.hpp"
#include "phishsim/core.hpp"
#include "phishsim/detection.hpp"
#include "phishsim/sim_core.hpp"
#include "phishsim/victim_model.hpp"

namespace phishsim {

enum class RunMode : std::uint8_t { campaign, capture };
enum class Transport : std::uint8_t { in_process, http };

struct OrganicConfig {
  std::map<Theme, double> tweets_per_hour;
  /// Chance that an organic tweet carries one of its theme's keywords.
  double keyword_probability = 0.8;
};

struct BotConfig {
  Theme theme = Theme::politics;
  BotPolicy policy;
  /// Attack tweets after which the bot stops attacking; nullopt attacks
  /// every sampled target until the run ends.
  std::optional<std::size_t> quota;
};

struct ScenarioConfig {
  std::string name = "custom";
  RunMode mode = RunMode::campaign;
  std::uint64_t seed = 1;
  /// Attacks start at start_day * 86400.
  std::int64_t start_day = 3650;
  double duration_hours = 24.0;
  double warmup_minutes = 60.0;
  SimTime bot_tick_seconds = 60;
  std::size_t buffer_capacity = 1000;

  std::map<Theme, std::filesystem::path> keyword_files;
  std::filesystem::path headlines_file;
  std::filesystem::path benign_file;
  std::filesystem::path project_document;

  Transport transport = Transport::in_process;
  std::string landing_base_url = "https://landing.example";

  PopulationSpec population;
  OrganicConfig organic;
  std::size_t bands = 5;
  DetectionConfig detection;
  SusceptibilityParams victim = SusceptibilityParams::defaults();
  std::vector<BotConfig> bots;
  std::size_t histogram_bins = 10;

  SimTime attack_start() const { return start_day * kSecondsPerDay; }
  SimTime duration_seconds() const;
  SimTime warmup_seconds() const;
};

struct Diagnostic {
  std::string path;  // dotted field path, e.g. "bots.1.quota"
  std::string message;
};

std::string to_string(const Diagnostic& d);

class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Data directory: PHISHSIM_DATA_DIR when set, else the build-time default.
std::filesystem::path default_data_dir();
/// <data_dir>/presets/<name>.yaml; unknown names throw InvalidArgument.
std::filesystem::path preset_path(std::string_view name, const std::filesystem::path& data_dir);
inline constexpr std::array<std::string_view, 4> kPresetNames = {"exp1", "exp2", "exp3", "exp4"};

/// Schema and cross-field checks; reads referenced files but writes
/// nothing. Empty result means the config is valid.
std::vector<Diagnostic> validate_config(const std::filesystem::path& path,
                                        std::span<const std::string> overrides = {});

/// Throws ConfigError carrying every diagnostic.
ScenarioConfig load_config(const std::filesystem::path& path,
                           std::span<const std::string> overrides = {});

/// Keyword lists, one keyword per line.
std::map<Theme, std::vector<std::string>> load_keywords(const ScenarioConfig& cfg);

/// Fully resolved configuration as YAML, loadable by load_config.
std::string to_yaml(const ScenarioConfig& cfg);

}  // namespace phishsim

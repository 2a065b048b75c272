#pragma once

// Generative model of how a stimulated account responds to a bait.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "phishsim/core.hpp"
#include "phishsim/target_sampler.hpp"

namespace phishsim {

inline constexpr std::size_t kFeatureCount = 8;

/// Column order shared by the victim model and the profiler. Sports is the
/// reference theme.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "intercept",       "theme_politics",  "theme_entertainment", "log1p_followers",
    "log1p_following", "log1p_posts",     "age_years",           "follower_rank"};

using FeatureRow = std::array<double, kFeatureCount>;

/// Rejects negative counts or age.
FeatureRow features(const TargetRecord& target);

double logistic(double z);

struct SusceptibilityParams {
  FeatureRow beta{};
  double register_given_visit = 0.005;
  /// Visitors who do not register press "access without registration"
  /// with this probability.
  double plain_access_given_visit = 0.011;
  double doc_click_given_visit = 0.001;
  double complaint_prob = 0.001;
  /// Mean of the exponential delay between the bait and the response.
  double mean_response_delay_s = 1800.0;

  /// Politics +0.8 and age -0.3, every other coefficient 0.
  static SusceptibilityParams defaults();
  void validate() const;
};

nlohmann::json to_json(const SusceptibilityParams& params);
/// Missing fields keep their defaults; beta may be an object keyed by
/// feature name or an array in column order.
SusceptibilityParams params_from_json(const nlohmann::json& j);
SusceptibilityParams load_params(const std::filesystem::path& path);

double visit_probability(const TargetRecord& target, const SusceptibilityParams& params);

enum class Outcome : std::uint8_t { ignore, visit, visit_register, complain };

std::string_view to_string(Outcome outcome);

struct BehaviorOutcome {
  Outcome kind = Outcome::ignore;
  bool plain_access = false;  // visit only: pressed the no-registration button
  bool doc_download = false;  // visit or visit_register
  SimTime delay = 0;          // seconds after the bait

  bool visited() const { return kind == Outcome::visit || kind == Outcome::visit_register; }
};

/// Deterministic in (target.pseudonym, params, seed).
BehaviorOutcome decide_response(const TargetRecord& target, const SusceptibilityParams& params,
                                std::uint64_t seed);
/// Same draw with a precomputed visit probability.
BehaviorOutcome decide_response(std::string_view pseudonym, double p_visit,
                                const SusceptibilityParams& params, std::uint64_t seed);

}  // namespace phishsim

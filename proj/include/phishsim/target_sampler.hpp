#pragma once

// FollowerRank, rank banding, keyed pseudonyms and target sampling from a
// flow buffer.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "phishsim/core.hpp"
#include "phishsim/sim_core.hpp"

namespace phishsim {

/// followers / (followers + following); 0.0 when both are 0. Negative
/// counts throw InvalidArgument.
double follower_rank(std::int64_t followers, std::int64_t following);

/// Element-wise follower_rank over parallel arrays, bit-identical to the
/// scalar function. Runs on the active SIMD kernel.
void follower_rank_batch(std::span<const std::int64_t> followers,
                         std::span<const std::int64_t> following, std::span<double> out);

struct RankBanding {
  /// Ascending, first 0.0, last 1.0. Band i is [b_i, b_{i+1}); the last band
  /// also contains 1.0.
  std::vector<double> boundaries = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

  static RankBanding equal_width(std::size_t bands);
  std::size_t band_count() const { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  void validate() const;
};

std::size_t assign_band(double rank, const RankBanding& banding);

struct TargetRecord {
  std::string pseudonym;
  double follower_rank = 0.0;
  std::size_t band = 0;
  Theme theme = Theme::politics;
  std::int64_t followers_count = 0;
  std::int64_t following_count = 0;
  std::int64_t post_count = 0;
  double age_days = 0.0;
  std::optional<std::string> location_tag;
  std::optional<SimTime> stimulated_at;

  bool operator==(const TargetRecord&) const = default;
};

/// Run-scoped handle -> pseudonym map. Pseudonyms are a BLAKE2b keyed hash
/// of the handle, 32 lowercase hex characters. The mapping lives only in
/// memory and has no export path.
class PseudonymRegistry {
 public:
  static constexpr std::size_t kPseudonymLength = 32;
  static constexpr const char* kSecretEnv = "PHISHSIM_RUN_SECRET";

  explicit PseudonymRegistry(std::string_view secret);

  /// Secret from PHISHSIM_RUN_SECRET when set, else derived from the seed.
  static std::string run_secret(std::uint64_t seed);

  /// Pure keyed hash, no registration.
  std::string compute(std::string_view handle) const;
  /// Registers and returns the pseudonym of `handle`.
  const std::string& pseudonymize(std::string_view handle);
  bool is_issued(std::string_view pseudonym) const;
  std::optional<std::string> pseudonym_of(std::string_view handle) const;
  std::size_t size() const { return by_handle_.size(); }

 private:
  std::array<unsigned char, 32> key_{};
  std::unordered_map<std::string, std::string> by_handle_;
  std::unordered_set<std::string> issued_;
};

struct SamplingPolicy {
  /// Fraction of otherwise eligible candidates discarded.
  double skip_fraction = 0.0;
  RankBanding banding;
  /// Instant against which account age is measured.
  SimTime reference_time = 0;

  void validate() const;
};

/// A selected account: the in-platform handle (never exported) and its
/// exported record.
struct SampledTarget {
  std::string handle;
  TargetRecord record;
};

/// Builds the exported attribute set of one account.
TargetRecord make_target_record(const AccountProfile& account, std::string pseudonym,
                                const RankBanding& banding, SimTime reference_time);

/// Stateful sampler: an account is considered at most once, whether it was
/// selected or skipped. Bot accounts are never candidates. Samplers given
/// the same `shared_seen` set deduplicate across each other.
class TargetSampler {
 public:
  TargetSampler(const Platform& platform, PseudonymRegistry& registry, SamplingPolicy policy,
                std::uint64_t seed, std::unordered_set<std::string>* shared_seen = nullptr);

  /// Drains `buffer` and returns the newly selected targets in buffer
  /// order.
  std::vector<SampledTarget> sample(FlowBuffer& buffer);

  std::uint64_t considered() const { return considered_; }
  std::uint64_t skipped() const { return skipped_; }
  const SamplingPolicy& policy() const { return policy_; }

 private:
  const Platform& platform_;
  PseudonymRegistry& registry_;
  SamplingPolicy policy_;
  Rng rng_;
  std::unordered_set<std::string> own_seen_;
  std::unordered_set<std::string>* seen_;
  std::uint64_t considered_ = 0;
  std::uint64_t skipped_ = 0;
};

/// One-shot form of TargetSampler::sample.
std::vector<TargetRecord> sample_targets(FlowBuffer& buffer, const Platform& platform,
                                         PseudonymRegistry& registry,
                                         const SamplingPolicy& policy, std::uint64_t seed);

/// CSV with header
/// pseudonym,follower_rank,band,theme,followers,following,posts,age_days,location
void write_targets_csv(std::ostream& out, std::span<const TargetRecord> targets);
std::vector<TargetRecord> read_targets_csv(std::istream& in);

}  // namespace phishsim

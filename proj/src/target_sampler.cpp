#include "phishsim/target_sampler.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "phishsim/io.hpp"
#include "phishsim/kernels.hpp"

namespace phishsim {

double follower_rank(std::int64_t followers, std::int64_t following) {
  if (followers < 0 || following < 0)
    throw InvalidArgument("follower_rank: counts must be non-negative");
  const double f = static_cast<double>(followers);
  const double total = f + static_cast<double>(following);
  return total == 0.0 ? 0.0 : f / total;
}

void follower_rank_batch(std::span<const std::int64_t> followers,
                         std::span<const std::int64_t> following, std::span<double> out) {
  if (followers.size() != following.size() || followers.size() != out.size())
    throw InvalidArgument("follower_rank_batch: length mismatch");
  std::vector<double> f(followers.size());
  std::vector<double> o(following.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (followers[i] < 0 || following[i] < 0)
      throw InvalidArgument("follower_rank: counts must be non-negative");
    f[i] = static_cast<double>(followers[i]);
    o[i] = static_cast<double>(following[i]);
  }
  kernels::share(f, o, out);
}

RankBanding RankBanding::equal_width(std::size_t bands) {
  if (bands == 0) throw InvalidArgument("banding: band count must be positive");
  RankBanding b;
  b.boundaries.resize(bands + 1);
  for (std::size_t i = 0; i <= bands; ++i)
    b.boundaries[i] = static_cast<double>(i) / static_cast<double>(bands);
  b.boundaries.back() = 1.0;
  return b;
}

void RankBanding::validate() const {
  if (boundaries.size() < 2) throw InvalidArgument("banding.boundaries: need at least two entries");
  if (boundaries.front() != 0.0) throw InvalidArgument("banding.boundaries: must start at 0");
  if (boundaries.back() != 1.0) throw InvalidArgument("banding.boundaries: must end at 1");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i] > boundaries[i - 1]))
      throw InvalidArgument("banding.boundaries: must be strictly ascending");
}

std::size_t assign_band(double rank, const RankBanding& banding) {
  if (!(rank >= 0.0 && rank <= 1.0)) throw InvalidArgument("assign_band: rank outside [0,1]");
  const auto& b = banding.boundaries;
  const std::size_t n = banding.band_count();
  if (n == 0) throw InvalidArgument("assign_band: empty banding");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (rank < b[i + 1]) return i;
  return n - 1;
}

PseudonymRegistry::PseudonymRegistry(std::string_view secret) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  if (secret.empty()) throw InvalidArgument("pseudonym secret must not be empty");
  crypto_generichash(key_.data(), key_.size(), reinterpret_cast<const unsigned char*>(secret.data()),
                     secret.size(), nullptr, 0);
}

std::string PseudonymRegistry::run_secret(std::uint64_t seed) {
  if (const char* env = std::getenv(kSecretEnv); env != nullptr && *env != '\0') return env;
  std::string s = "phishsim-run-secret:";
  std::uint64_t x = derive_seed(seed, "pseudonym-secret");
  for (int i = 0; i < 4; ++i) {
    x = splitmix64(x);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    s += buf;
  }
  return s;
}

std::string PseudonymRegistry::compute(std::string_view handle) const {
  unsigned char digest[kPseudonymLength / 2];
  crypto_generichash(digest, sizeof digest, reinterpret_cast<const unsigned char*>(handle.data()),
                     handle.size(), key_.data(), key_.size());
  char hex[kPseudonymLength + 1];
  sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
  return std::string(hex, kPseudonymLength);
}

const std::string& PseudonymRegistry::pseudonymize(std::string_view handle) {
  std::string key(handle);
  if (auto it = by_handle_.find(key); it != by_handle_.end()) return it->second;
  std::string p = compute(handle);
  if (p == key || !issued_.insert(p).second)
    throw ContractViolation("pseudonym collision");
  return by_handle_.emplace(std::move(key), std::move(p)).first->second;
}

bool PseudonymRegistry::is_issued(std::string_view pseudonym) const {
  return issued_.count(std::string(pseudonym)) != 0;
}

std::optional<std::string> PseudonymRegistry::pseudonym_of(std::string_view handle) const {
  auto it = by_handle_.find(std::string(handle));
  if (it == by_handle_.end()) return std::nullopt;
  return it->second;
}

void SamplingPolicy::validate() const {
  if (!(skip_fraction >= 0.0 && skip_fraction <= 1.0))
    throw InvalidArgument("sampling.skip_fraction: must be in [0,1]");
  banding.validate();
}

TargetRecord make_target_record(const AccountProfile& account, std::string pseudonym,
                                const RankBanding& banding, SimTime reference_time) {
  TargetRecord r;
  r.pseudonym = std::move(pseudonym);
  r.follower_rank = follower_rank(account.followers_count, account.following_count);
  r.band = assign_band(r.follower_rank, banding);
  r.theme = account.theme_affinity;
  r.followers_count = account.followers_count;
  r.following_count = account.following_count;
  r.post_count = account.post_count;
  r.age_days = std::max(0.0, static_cast<double>(reference_time - account.created_at) /
                                 static_cast<double>(kSecondsPerDay));
  r.location_tag = account.location_tag;
  return r;
}

TargetSampler::TargetSampler(const Platform& platform, PseudonymRegistry& registry,
                             SamplingPolicy policy, std::uint64_t seed,
                             std::unordered_set<std::string>* shared_seen)
    : platform_(platform),
      registry_(registry),
      policy_(std::move(policy)),
      rng_(make_rng(seed, "target-sampler")),
      seen_(shared_seen != nullptr ? shared_seen : &own_seen_) {
  policy_.validate();
}

std::vector<SampledTarget> TargetSampler::sample(FlowBuffer& buffer) {
  std::vector<SampledTarget> out;
  for (const TweetRecord& tweet : buffer.drain()) {
    if (!platform_.has_account(tweet.author)) continue;
    const AccountProfile& acct = platform_.account(tweet.author);
    if (acct.is_bot) continue;
    if (!seen_->insert(acct.handle).second) continue;
    ++considered_;
    if (policy_.skip_fraction > 0.0 && uniform01(rng_) < policy_.skip_fraction) {
      ++skipped_;
      continue;
    }
    out.push_back({acct.handle, make_target_record(acct, registry_.pseudonymize(acct.handle),
                                                   policy_.banding, policy_.reference_time)});
  }
  return out;
}

std::vector<TargetRecord> sample_targets(FlowBuffer& buffer, const Platform& platform,
                                         PseudonymRegistry& registry,
                                         const SamplingPolicy& policy, std::uint64_t seed) {
  TargetSampler sampler(platform, registry, policy, seed);
  std::vector<TargetRecord> out;
  for (auto& s : sampler.sample(buffer)) out.push_back(std::move(s.record));
  return out;
}

namespace {
constexpr const char* kTargetsHeader =
    "pseudonym,follower_rank,band,theme,followers,following,posts,age_days,location";
}

void write_targets_csv(std::ostream& out, std::span<const TargetRecord> targets) {
  out << kTargetsHeader << '\n';
  for (const TargetRecord& t : targets) {
    out << io::csv_field(t.pseudonym) << ',' << io::format_double(t.follower_rank) << ','
        << t.band << ',' << to_string(t.theme) << ',' << t.followers_count << ','
        << t.following_count << ',' << t.post_count << ',' << io::format_double(t.age_days)
        << ',' << io::csv_field(t.location_tag.value_or("")) << '\n';
  }
}

std::vector<TargetRecord> read_targets_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("targets csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTargetsHeader) throw InvalidArgument("targets csv: unexpected header");
  std::vector<TargetRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto f = io::csv_split(line);
    const std::string where = "targets csv row " + std::to_string(row);
    if (f.size() != 9) throw InvalidArgument(where + ": expected 9 fields");
    TargetRecord t;
    t.pseudonym = f[0];
    t.follower_rank = io::parse_double(f[1], where + " follower_rank");
    t.band = static_cast<std::size_t>(io::parse_int(f[2], where + " band"));
    t.theme = parse_theme(f[3]);
    t.followers_count = io::parse_int(f[4], where + " followers");
    t.following_count = io::parse_int(f[5], where + " following");
    t.post_count = io::parse_int(f[6], where + " posts");
    t.age_days = io::parse_double(f[7], where + " age_days");
    if (!f[8].empty()) t.location_tag = f[8];
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace phishsim

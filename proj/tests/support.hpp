#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "phishsim/profiler.hpp"
#include "phishsim/scenario.hpp"
#include "phishsim/target_sampler.hpp"

namespace phishsim::testing {

inline std::filesystem::path data_dir() { return default_data_dir(); }

inline TargetRecord target(std::string pseudonym, Theme theme, std::int64_t followers = 100,
                           std::int64_t following = 100, std::int64_t posts = 1000,
                           double age_days = 365.25) {
  TargetRecord t;
  t.pseudonym = std::move(pseudonym);
  t.theme = theme;
  t.followers_count = followers;
  t.following_count = following;
  t.post_count = posts;
  t.age_days = age_days;
  t.follower_rank = follower_rank(followers, following);
  t.band = assign_band(t.follower_rank, RankBanding{});
  return t;
}

/// x compared with the rational num/den (den > 0, both below 2^62), exact.
/// Returns -1, 0 or +1.
inline int compare_with_ratio(double x, std::uint64_t num, std::uint64_t den) {
  if (x < 0.0) return -1;
  if (num == 0) return x > 0.0 ? 1 : 0;
  if (x == 0.0) return -1;
  int e = 0;
  const double frac = std::frexp(x, &e);  // x = frac * 2^e, frac in [0.5, 1)
  const auto m = static_cast<unsigned __int128>(std::ldexp(frac, 53));
  const int shift = 53 - e;  // x = m / 2^shift
  // m / 2^shift  vs  num / den   <=>   m * den  vs  num * 2^shift
  if (shift < 0) return 1;  // x >= 2^53 exceeds any ratio we test
  // m * den < 2^115, so a right-hand side of 2^127 or more is larger.
  if (std::bit_width(num) + static_cast<unsigned>(shift) >= 127) return -1;
  const unsigned __int128 lhs = m * den;
  const unsigned __int128 rhs = static_cast<unsigned __int128>(num) << shift;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

/// True when x lies within one ulp of followers / (followers + following).
inline bool follower_rank_within_ulp(double x, std::uint64_t followers, std::uint64_t following) {
  const std::uint64_t total = followers + following;
  if (total == 0) return x == 0.0;
  const double lo = std::nextafter(x, -1.0);
  const double hi = std::nextafter(x, 2.0);
  return compare_with_ratio(lo, followers, total) <= 0 && compare_with_ratio(hi, followers, total) >= 0;
}

/// Labelled targets whose visits are drawn by the victim model. Counts
/// spread over several orders of magnitude so that follower_rank is not
/// close to collinear with the log counts.
inline std::vector<LabeledTarget> synthetic_targets(std::size_t n, const SusceptibilityParams& params,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> counts(1.0, 2.5);
  std::uniform_real_distribution<double> age(30.0, 3650.0);
  std::vector<LabeledTarget> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Theme th = kAllThemes[rng() % 3];
    const auto followers = static_cast<std::int64_t>(counts(rng));
    const auto following = static_cast<std::int64_t>(counts(rng));
    const auto posts = static_cast<std::int64_t>(counts(rng));
    auto t = target("t" + std::to_string(i), th, followers, following, posts, age(rng));
    const bool visited = decide_response(t, params, seed).visited();
    out.push_back({std::move(t), visited});
  }
  return out;
}

/// Scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("phishsim-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace phishsim::testing

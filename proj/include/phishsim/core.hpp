#pragma once

// Shared vocabulary types for the simulator: themes, simulated time,
// error types and seeded random streams.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace phishsim {

/// Simulated seconds since the platform epoch.
using SimTime = std::int64_t;

inline constexpr SimTime kSecondsPerMinute = 60;
inline constexpr SimTime kSecondsPerHour = 3600;
inline constexpr SimTime kSecondsPerDay = 86400;
inline constexpr double kSecondsPerYear = 31557600.0;  // Julian year

enum class Theme : std::uint8_t { politics = 0, sports = 1, entertainment = 2 };

inline constexpr std::array<Theme, 3> kAllThemes = {Theme::politics, Theme::sports,
                                                   Theme::entertainment};

std::string_view to_string(Theme theme);
/// Throws InvalidArgument for anything other than the three theme names.
Theme parse_theme(std::string_view name);
std::optional<Theme> try_parse_theme(std::string_view name);

/// Hour of day (0..23) of a simulated instant. Day boundaries sit on
/// multiples of 86400 s.
inline int hour_of_day(SimTime t) {
  SimTime s = t % kSecondsPerDay;
  if (s < 0) s += kSecondsPerDay;
  return static_cast<int>(s / kSecondsPerHour);
}

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AccountBanned : public std::runtime_error {
 public:
  explicit AccountBanned(const std::string& handle)
      : std::runtime_error("account banned"), handle_(handle) {}
  const std::string& handle() const { return handle_; }

 private:
  std::string handle_;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Deterministic seed derivation. Every random stream in a run is derived
// from the run seed and a stream label so that adding a stream does not
// perturb the others.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace phishsim

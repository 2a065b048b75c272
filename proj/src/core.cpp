#include "phishsim/core.hpp"

namespace phishsim {

std::string_view to_string(Theme theme) {
  switch (theme) {
    case Theme::politics:
      return "politics";
    case Theme::sports:
      return "sports";
    case Theme::entertainment:
      return "entertainment";
  }
  return "unknown";
}

std::optional<Theme> try_parse_theme(std::string_view name) {
  for (Theme t : kAllThemes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

Theme parse_theme(std::string_view name) {
  if (auto t = try_parse_theme(name)) return *t;
  throw InvalidArgument("unknown theme '" + std::string(name) + "'");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return splitmix64(splitmix64(seed) ^ fnv1a64(stream));
}

}  // namespace phishsim

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phishsim::text {

/// Full Unicode simple lowercasing of a UTF-8 string. Invalid byte
/// sequences are replaced by U+FFFD.
std::string to_lower(std::string_view utf8);

/// Lowercased word tokens: maximal runs of Unicode letters and digits.
/// Everything else, including '@', '#', punctuation and whitespace,
/// separates tokens.
std::vector<std::string> tokenize(std::string_view utf8);

/// A keyword list normalized for whole-token matching. Keywords that
/// tokenize to several tokens match as a contiguous token sequence.
class KeywordSet {
 public:
  KeywordSet() = default;
  explicit KeywordSet(std::span<const std::string> keywords);

  /// Keywords (as configured) that occur in `tokens`, in configuration
  /// order, each at most once.
  std::vector<std::string> match(std::span<const std::string> tokens) const;
  bool matches_any(std::span<const std::string> tokens) const;

  const std::vector<std::string>& keywords() const { return keywords_; }
  bool empty() const { return keywords_.empty(); }

 private:
  std::vector<std::string> keywords_;
  std::vector<std::vector<std::string>> normalized_;
  std::unordered_map<std::string, std::vector<size_t>> by_first_;

  template <typename F>
  void scan(std::span<const std::string> tokens, F&& on_match) const;
};

}  // namespace phishsim::text

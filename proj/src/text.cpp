#include "phishsim/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>

namespace phishsim::text {
namespace {

void append_utf8(std::string& out, UChar32 cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(reinterpret_cast<uint8_t*>(buf), len, cp);
  out.append(buf, static_cast<size_t>(len));
}

template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 cp;
    U8_NEXT(bytes, i, n, cp);
    fn(cp < 0 ? UChar32{0xFFFD} : cp);
  }
}

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return (c & 0x80) == 0; });
}

}  // namespace

std::string to_lower(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  if (is_ascii(utf8)) {
    for (char c : utf8) out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c);
    return out;
  }
  for_each_code_point(utf8, [&](UChar32 cp) { append_utf8(out, u_tolower(cp)); });
  return out;
}

std::vector<std::string> tokenize(std::string_view utf8) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  if (is_ascii(utf8)) {
    for (char c : utf8) {
      if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
        current.push_back(c);
      } else if (c >= 'A' && c <= 'Z') {
        current.push_back(static_cast<char>(c + 32));
      } else {
        flush();
      }
    }
    flush();
    return tokens;
  }
  for_each_code_point(utf8, [&](UChar32 cp) {
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
        current.push_back(c);
      } else if (c >= 'A' && c <= 'Z') {
        current.push_back(static_cast<char>(c + 32));
      } else {
        flush();
      }
    } else if (u_isalnum(cp)) {
      append_utf8(current, u_tolower(cp));
    } else {
      flush();
    }
  });
  flush();
  return tokens;
}

KeywordSet::KeywordSet(std::span<const std::string> keywords) {
  for (const auto& kw : keywords) {
    auto toks = tokenize(kw);
    if (toks.empty()) continue;
    by_first_[toks.front()].push_back(keywords_.size());
    keywords_.push_back(kw);
    normalized_.push_back(std::move(toks));
  }
}

template <typename F>
void KeywordSet::scan(std::span<const std::string> tokens, F&& on_match) const {
  for (size_t i = 0; i < tokens.size(); ++i) {
    auto it = by_first_.find(tokens[i]);
    if (it == by_first_.end()) continue;
    for (size_t k : it->second) {
      const auto& needle = normalized_[k];
      if (needle.size() > tokens.size() - i) continue;
      if (std::equal(needle.begin() + 1, needle.end(),
                     tokens.begin() + static_cast<std::ptrdiff_t>(i + 1))) {
        if (on_match(k)) return;
      }
    }
  }
}

std::vector<std::string> KeywordSet::match(std::span<const std::string> tokens) const {
  std::vector<size_t> hits;
  scan(tokens, [&](size_t k) {
    hits.push_back(k);
    return false;
  });
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  std::vector<std::string> out;
  out.reserve(hits.size());
  for (size_t k : hits) out.push_back(keywords_[k]);
  return out;
}

bool KeywordSet::matches_any(std::span<const std::string> tokens) const {
  bool found = false;
  scan(tokens, [&](size_t) { return found = true; });
  return found;
}

}  // namespace phishsim::text

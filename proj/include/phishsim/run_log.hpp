#pragma once

// JSON Lines formats: the run log and the tweet capture.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phishsim/core.hpp"
#include "phishsim/sim_core.hpp"

namespace phishsim {

/// {t, actor, event, payload}
struct RunLogEvent {
  SimTime t = 0;
  std::string actor;
  std::string event;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const RunLogEvent&) const = default;
};

nlohmann::json to_json(const RunLogEvent& e);
RunLogEvent run_log_event_from_json(const nlohmann::json& j);

void write_run_log(std::ostream& out, std::span<const RunLogEvent> events);
std::vector<RunLogEvent> read_run_log(std::istream& in);

/// {author, text, mentions, link, matched_keywords, posted_at, theme}
nlohmann::json to_json(const TweetRecord& t);
TweetRecord tweet_from_json(const nlohmann::json& j);

void write_capture(std::ostream& out, std::span<const TweetRecord> tweets);
std::vector<TweetRecord> read_capture(std::istream& in);

}  // namespace phishsim

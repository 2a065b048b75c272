#include "phishsim/run_log.hpp"

#include <istream>
#include <ostream>

namespace phishsim {

nlohmann::json to_json(const RunLogEvent& e) {
  return {{"t", e.t}, {"actor", e.actor}, {"event", e.event}, {"payload", e.payload}};
}

RunLogEvent run_log_event_from_json(const nlohmann::json& j) {
  RunLogEvent e;
  e.t = j.at("t").get<SimTime>();
  e.actor = j.at("actor").get<std::string>();
  e.event = j.at("event").get<std::string>();
  e.payload = j.value("payload", nlohmann::json::object());
  return e;
}

namespace {

template <typename T, typename Parse>
std::vector<T> read_jsonl(std::istream& in, const char* what, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string(what) + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void write_run_log(std::ostream& out, std::span<const RunLogEvent> events) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

std::vector<RunLogEvent> read_run_log(std::istream& in) {
  return read_jsonl<RunLogEvent>(in, "run log", run_log_event_from_json);
}

nlohmann::json to_json(const TweetRecord& t) {
  return {{"author", t.author},
          {"text", t.text},
          {"mentions", t.mentions},
          {"link", t.link ? nlohmann::json(*t.link) : nlohmann::json(nullptr)},
          {"matched_keywords", t.matched_keywords},
          {"posted_at", t.posted_at},
          {"theme", std::string(to_string(t.theme))}};
}

TweetRecord tweet_from_json(const nlohmann::json& j) {
  TweetRecord t;
  t.author = j.at("author").get<std::string>();
  t.text = j.at("text").get<std::string>();
  t.mentions = j.value("mentions", std::vector<std::string>{});
  if (j.contains("link") && !j["link"].is_null()) t.link = j["link"].get<std::string>();
  t.matched_keywords = j.value("matched_keywords", std::vector<std::string>{});
  t.posted_at = j.at("posted_at").get<SimTime>();
  t.theme = parse_theme(j.at("theme").get<std::string>());
  return t;
}

void write_capture(std::ostream& out, std::span<const TweetRecord> tweets) {
  for (const auto& t : tweets) out << to_json(t).dump() << '\n';
}

std::vector<TweetRecord> read_capture(std::istream& in) {
  return read_jsonl<TweetRecord>(in, "capture", tweet_from_json);
}

}  // namespace phishsim

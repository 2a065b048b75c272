#pragma once

// Instrumented bait landing service. The handler is transport-agnostic;
// LandingHttpServer exposes it over loopback HTTP and the two clients let
// the simulation talk to it in process or over the wire.
//
// Endpoints:
//   GET  /bait?id=<pseudonym>      form page, counts a visit
//   POST /register                 fields id, name, email, phone; redirect to news
//   GET  /access?id=<pseudonym>    redirect to news without registering
//   GET  /project[?id=<pseudonym>] research project document
//   GET  /news/<theme>             static news page, not counted
//
// Form fields other than `id` are validated and dropped; nothing derived
// from them is stored, logged or echoed.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "phishsim/core.hpp"

namespace phishsim {

enum class VisitKind : std::uint8_t { page_view, register_access, plain_access, project_doc };

std::string_view to_string(VisitKind kind);

inline constexpr const char* kUnattributed = "unattributed";
/// Header carrying the simulated request time over HTTP.
inline constexpr const char* kSimTimeHeader = "X-Sim-Time";

struct PseudonymHits {
  std::optional<Theme> theme;
  std::optional<SimTime> first_visit_at;
  std::uint64_t visit_count = 0;
  std::uint64_t registered_access = 0;
  std::uint64_t unregistered_access = 0;
  std::uint64_t project_downloads = 0;

  /// Every request attributed to this bucket.
  std::uint64_t hits() const {
    return visit_count + registered_access + unregistered_access + project_downloads;
  }
  bool operator==(const PseudonymHits&) const = default;
};

struct LedgerSnapshot {
  std::uint64_t unique_visitors = 0;
  std::uint64_t total_visits = 0;
  std::uint64_t registered_access = 0;
  std::uint64_t unregistered_access = 0;
  std::uint64_t news_visits = 0;
  std::uint64_t project_downloads = 0;
  std::map<std::string, PseudonymHits> per_pseudonym;
  PseudonymHits unattributed;

  /// Empty when every conservation invariant holds, else the first broken one.
  std::string invariant_violation() const;
  bool invariants_hold() const { return invariant_violation().empty(); }
  bool operator==(const LedgerSnapshot&) const = default;
};

nlohmann::json to_json(const LedgerSnapshot& ledger);
LedgerSnapshot ledger_from_json(const nlohmann::json& j);

struct LandingRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;  // query string and form body
  SimTime at = 0;
};

struct LandingResponse {
  int status = 200;
  std::string content_type = "text/html; charset=utf-8";
  std::string body;
  std::string location;  // set on redirects
};

/// One line of the service access log. Never contains form content.
struct AccessLogEntry {
  SimTime at = 0;
  std::string method;
  std::string path;  // without query string
  std::optional<VisitKind> kind;
  std::string pseudonym;  // issued pseudonym, kUnattributed or empty
  int status = 0;
};

nlohmann::json to_json(const AccessLogEntry& entry);

struct LandingContent {
  std::string project_document;
  std::map<Theme, std::string> news_pages;

  /// Reads <data_dir>/landing/project.txt and builds the news pages.
  static LandingContent load(const std::filesystem::path& data_dir);
  static LandingContent from_document(const std::filesystem::path& project_document);
};

/// Thread-safe: any number of threads may call handle() and snapshot()
/// concurrently.
class LandingService {
 public:
  using AccessLog = std::function<void(const AccessLogEntry&)>;

  explicit LandingService(LandingContent content);

  /// Makes `pseudonym` attributable; requests naming anything else are
  /// booked under the unattributed bucket.
  void register_pseudonym(const std::string& pseudonym, Theme theme);
  bool is_registered(std::string_view pseudonym) const;
  void set_access_log(AccessLog log);

  LandingResponse handle(const LandingRequest& request);

  LedgerSnapshot snapshot() const;
  std::uint64_t requests_served() const { return requests_.load(); }

 private:
  LandingResponse bait(const LandingRequest& req, std::string& who, std::optional<VisitKind>& kind);
  LandingResponse news_redirect(const LandingRequest& req, bool registered, std::string& who,
                                std::optional<VisitKind>& kind);
  LandingResponse project(const LandingRequest& req, std::string& who,
                          std::optional<VisitKind>& kind);
  LandingResponse news_page(std::string_view theme_name) const;

  /// Bucket for the request's id; sets `who`. Caller holds mu_.
  PseudonymHits& bucket_for(const LandingRequest& req, std::string& who);
  /// Books a page view on `b`. Caller holds mu_.
  void count_page_view(PseudonymHits& b, bool attributed, SimTime at);
  std::string news_location(const PseudonymHits& b) const;

  LandingContent content_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, PseudonymHits> buckets_;
  PseudonymHits unattributed_;
  LedgerSnapshot totals_;
  AccessLog access_log_;
  std::atomic<std::uint64_t> requests_{0};
};

/// Minimal client interface the simulation uses to reach the service.
class LandingClient {
 public:
  virtual ~LandingClient() = default;
  virtual LandingResponse send(const LandingRequest& request) = 0;

  LandingResponse visit(const std::string& pseudonym, SimTime at);
  LandingResponse register_access(const std::string& pseudonym, const std::string& name,
                                  const std::string& email, const std::string& phone, SimTime at);
  LandingResponse plain_access(const std::string& pseudonym, SimTime at);
  LandingResponse project_doc(const std::string& pseudonym, SimTime at);
};

class InProcessLandingClient : public LandingClient {
 public:
  explicit InProcessLandingClient(LandingService& service) : service_(service) {}
  LandingResponse send(const LandingRequest& request) override;

 private:
  LandingService& service_;
};

/// Serves a LandingService on 127.0.0.1 from a background thread.
class LandingHttpServer {
 public:
  explicit LandingHttpServer(LandingService& service);
  ~LandingHttpServer();

  LandingHttpServer(const LandingHttpServer&) = delete;
  LandingHttpServer& operator=(const LandingHttpServer&) = delete;

  /// Binds (port 0 picks a free port) and starts serving. Returns the port.
  int start(int port = 0);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = -1;
};

/// Talks to a LandingHttpServer over loopback. One instance per thread.
class HttpLandingClient : public LandingClient {
 public:
  HttpLandingClient(std::string host, int port);
  ~HttpLandingClient() override;
  LandingResponse send(const LandingRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace phishsim

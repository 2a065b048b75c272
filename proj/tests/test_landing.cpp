#include <doctest.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "phishsim/io.hpp"
#include "phishsim/landing.hpp"
#include "support.hpp"

using namespace phishsim;

namespace {

LandingService make_service() { return LandingService(LandingContent::load(phishsim::testing::data_dir())); }

std::string sentinel(std::mt19937_64& rng, const char* field) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "SENTINEL-%s-%016llx", field, static_cast<unsigned long long>(rng()));
  return buf;
}

bool contains_any(const std::string& hay, const std::vector<std::string>& needles) {
  for (const auto& n : needles)
    if (hay.find(n) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("first and repeat visits") {
  auto svc = make_service();
  svc.register_pseudonym("P", Theme::sports);
  InProcessLandingClient c(svc);
  auto r = c.visit("P", 10);
  CHECK(r.status == 200);
  CHECK(r.body.find("To see the project") != std::string::npos);
  auto s = svc.snapshot();
  CHECK(s.unique_visitors == 1);
  CHECK(s.total_visits == 1);
  c.visit("P", 20);
  s = svc.snapshot();
  CHECK(s.unique_visitors == 1);
  CHECK(s.total_visits == 2);
  CHECK(s.per_pseudonym.at("P").first_visit_at == 10);
  CHECK(s.per_pseudonym.at("P").visit_count == 2);
}

TEST_CASE("1287 distinct pseudonyms visiting once each") {
  auto svc = make_service();
  InProcessLandingClient c(svc);
  for (int i = 0; i < 1287; ++i) {
    const std::string p = "p" + std::to_string(i);
    svc.register_pseudonym(p, Theme::politics);
    c.visit(p, i);
  }
  const auto s = svc.snapshot();
  CHECK(s.unique_visitors == 1287);
  CHECK(s.total_visits == 1287);
  CHECK(s.invariants_hold());
}

TEST_CASE("register validates every field and redirects to the theme's news") {
  auto svc = make_service();
  svc.register_pseudonym("P", Theme::entertainment);
  InProcessLandingClient c(svc);
  c.visit("P", 0);
  auto r = c.register_access("P", "Ana", "ana@example.invalid", "123", 1);
  CHECK(r.status == 303);
  CHECK(r.location == "/news/entertainment");
  auto s = svc.snapshot();
  CHECK(s.registered_access == 1);
  CHECK(s.news_visits == 1);

  const auto before = svc.snapshot();
  r = c.register_access("P", "Ana", "  ", "123", 2);
  CHECK(r.status >= 400);
  CHECK(r.status < 500);
  CHECK(svc.snapshot() == before);
}

TEST_CASE("plain access and the news-visit sum rule") {
  auto svc = make_service();
  svc.register_pseudonym("P", Theme::sports);
  InProcessLandingClient c(svc);
  for (int i = 0; i < 5; ++i) c.visit("P", i);
  const auto r = c.plain_access("P", 5);
  CHECK(r.status == 303);
  CHECK(svc.snapshot().unregistered_access == 1);
  CHECK(svc.snapshot().news_visits == 1);
  for (int i = 0; i < 3; ++i) c.register_access("P", "n", "e", "p", 6);
  c.plain_access("P", 7);
  const auto s = svc.snapshot();
  CHECK(s.news_visits == 5);
  CHECK(s.registered_access == 3);
  CHECK(s.unregistered_access == 2);
  CHECK(s.invariants_hold());
}

TEST_CASE("a click without a page view books the implied view") {
  auto svc = make_service();
  svc.register_pseudonym("P", Theme::sports);
  InProcessLandingClient c(svc);
  c.plain_access("P", 0);
  c.project_doc("P", 0);
  const auto s = svc.snapshot();
  CHECK(s.total_visits == 1);
  CHECK(s.unique_visitors == 1);
  CHECK(s.invariants_hold());
}

TEST_CASE("full-scale replay: 955 views, 15 news visits, 1 download") {
  auto svc = make_service();
  InProcessLandingClient c(svc);
  for (int i = 0; i < 955; ++i) {
    const std::string p = "p" + std::to_string(i);
    svc.register_pseudonym(p, Theme::politics);
    c.visit(p, i);
    if (i < 3) c.register_access(p, "n", "e", "f", i);
    else if (i < 15) c.plain_access(p, i);
    if (i == 100) c.project_doc(p, i);
  }
  const auto s = svc.snapshot();
  CHECK(s.total_visits == 955);
  CHECK(s.unique_visitors == 955);
  CHECK(s.news_visits == 15);
  CHECK(s.project_downloads == 1);
  CHECK(s.invariants_hold());
}

TEST_CASE("project document download") {
  auto svc = make_service();
  CHECK(svc.snapshot().project_downloads == 0);
  InProcessLandingClient c(svc);
  const auto r = c.project_doc("", 0);
  CHECK(r.status == 200);
  CHECK(r.body == io::read_file(phishsim::testing::data_dir() / "landing" / "project.txt"));
  CHECK(svc.snapshot().project_downloads == 1);
}

TEST_CASE("unknown ids land in the unattributed bucket and are not echoed") {
  auto svc = make_service();
  InProcessLandingClient c(svc);
  const auto r = c.visit("NOT-ISSUED-xyz", 0);
  CHECK(r.status == 200);
  CHECK(r.body.find("NOT-ISSUED-xyz") == std::string::npos);
  const auto s = svc.snapshot();
  CHECK(s.per_pseudonym.empty());
  CHECK(s.unattributed.visit_count == 1);
  CHECK(s.unique_visitors == 0);
  CHECK(s.total_visits == 1);
}

TEST_CASE("news pages are static and not counted; bad routes fail") {
  auto svc = make_service();
  LandingRequest req;
  req.path = "/news/sports";
  CHECK(svc.handle(req).status == 200);
  req.path = "/news/cooking";
  CHECK(svc.handle(req).status == 404);
  req.path = "/admin";
  CHECK(svc.handle(req).status == 404);
  req.path = "/register";
  CHECK(svc.handle(req).status == 405);
  const auto s = svc.snapshot();
  CHECK(s.total_visits == 0);
  CHECK(s.news_visits == 0);
}

TEST_CASE("ledger json round-trips") {
  auto svc = make_service();
  svc.register_pseudonym("A", Theme::sports);
  InProcessLandingClient c(svc);
  c.visit("A", 3);
  c.plain_access("A", 4);
  c.visit("zzz", 5);
  const auto s = svc.snapshot();
  const auto j = to_json(s);
  for (const char* k : {"unique_visitors", "total_visits", "registered_access", "unregistered_access",
                        "news_visits", "project_downloads", "per_pseudonym"})
    CHECK(j.contains(k));
  CHECK(ledger_from_json(j) == s);
}

TEST_CASE("invariant checker reports broken ledgers") {
  LedgerSnapshot s;
  s.unique_visitors = 2;
  s.total_visits = 1;
  CHECK_FALSE(s.invariants_hold());
  s = {};
  s.news_visits = 1;
  CHECK_FALSE(s.invariants_hold());
  s = {};
  s.project_downloads = 1;
  CHECK_FALSE(s.invariants_hold());
}

TEST_CASE("concurrent downloads over HTTP are counted exactly") {
  auto svc = make_service();
  LandingHttpServer server(svc);
  const int port = server.start();
  const int threads = 8, per_thread = 50;
  std::atomic<int> ok{0};
  std::atomic<bool> broken{false};
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done) {
      if (!svc.snapshot().invariants_hold()) broken = true;
      std::this_thread::yield();
    }
  });
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      HttpLandingClient client("127.0.0.1", port);
      for (int i = 0; i < per_thread; ++i) {
        if (client.project_doc("", t * 1000 + i).status == 200) ++ok;
      }
    });
  }
  for (auto& th : pool) th.join();
  done = true;
  watcher.join();
  server.stop();
  CHECK(ok == threads * per_thread);
  const auto s = svc.snapshot();
  CHECK(s.project_downloads == static_cast<std::uint64_t>(threads * per_thread));
  CHECK(svc.requests_served() == static_cast<std::uint64_t>(threads * per_thread));
  CHECK_FALSE(broken);
}

TEST_CASE("concurrent mixed traffic keeps the ledger consistent") {
  auto svc = make_service();
  for (int i = 0; i < 40; ++i) svc.register_pseudonym("p" + std::to_string(i), Theme::sports);
  std::vector<std::thread> pool;
  std::atomic<std::uint64_t> issued{0};
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      InProcessLandingClient c(svc);
      std::mt19937_64 rng(static_cast<std::uint64_t>(t));
      for (int i = 0; i < 2000; ++i) {
        const std::string p = "p" + std::to_string(rng() % 40);
        switch (rng() % 4) {
          case 0: c.visit(p, i); break;
          case 1: c.plain_access(p, i); break;
          case 2: c.register_access(p, "a", "b", "c", i); break;
          default: c.project_doc(p, i); break;
        }
        ++issued;
        if (i % 97 == 0) CHECK(svc.snapshot().invariants_hold());
      }
    });
  }
  for (auto& th : pool) th.join();
  const auto s = svc.snapshot();
  CHECK(s.invariants_hold());
  std::uint64_t bucket_hits = 0;
  for (const auto& [p, h] : s.per_pseudonym) bucket_hits += h.registered_access + h.unregistered_access + h.project_downloads;
  CHECK(bucket_hits == s.registered_access + s.unregistered_access + s.project_downloads);
  CHECK(svc.requests_served() == issued.load());
}

TEST_CASE("form fields never reach any output of the service") {
  phishsim::testing::TempDir dir("sentinel");
  auto svc = make_service();
  std::ofstream log_file(dir.path() / "access.jsonl");
  std::mutex log_mu;
  svc.set_access_log([&](const AccessLogEntry& e) {
    std::lock_guard lock(log_mu);
    log_file << to_json(e).dump() << '\n';
  });
  LandingHttpServer server(svc);
  const int port = server.start();
  HttpLandingClient client("127.0.0.1", port);
  std::mt19937_64 rng(1234);
  std::vector<std::string> planted;
  std::string responses;
  for (int i = 0; i < 200; ++i) {
    const std::string p = "p" + std::to_string(i);
    svc.register_pseudonym(p, Theme::politics);
    const auto name = sentinel(rng, "name"), email = sentinel(rng, "email"), phone = sentinel(rng, "phone");
    planted.insert(planted.end(), {name, email, phone});
    const auto r = client.register_access(p, name, email, phone, i);
    CHECK(r.status == 303);
    responses += r.body + r.location;
  }
  server.stop();
  log_file.close();
  io::write_file(dir.path() / "ledger.json", to_json(svc.snapshot()).dump(2));
  CHECK(svc.snapshot().registered_access == 200);
  CHECK_FALSE(contains_any(responses, planted));
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
    const std::string content = io::read_file(entry.path());
    CHECK_FALSE(content.empty());
    CHECK_MESSAGE(!contains_any(content, planted), entry.path().string());
  }
}

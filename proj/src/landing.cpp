#include "phishsim/landing.hpp"

#include <algorithm>
#include <cctype>

#include "phishsim/io.hpp"

namespace phishsim {

std::string_view to_string(VisitKind kind) {
  switch (kind) {
    case VisitKind::page_view: return "page_view";
    case VisitKind::register_access: return "register_access";
    case VisitKind::plain_access: return "plain_access";
    case VisitKind::project_doc: return "project_doc";
  }
  return "?";
}

std::string LedgerSnapshot::invariant_violation() const {
  if (unique_visitors > total_visits) return "unique_visitors > total_visits";
  if (registered_access + unregistered_access > total_visits)
    return "registered_access + unregistered_access > total_visits";
  if (news_visits != registered_access + unregistered_access)
    return "news_visits != registered_access + unregistered_access";
  if (project_downloads > total_visits) return "project_downloads > total_visits";
  std::uint64_t visits = unattributed.visit_count, reg = unattributed.registered_access,
                plain = unattributed.unregistered_access, docs = unattributed.project_downloads,
                uniq = 0;
  for (const auto& [p, h] : per_pseudonym) {
    visits += h.visit_count;
    reg += h.registered_access;
    plain += h.unregistered_access;
    docs += h.project_downloads;
    if (h.visit_count > 0) ++uniq;
    if (h.registered_access + h.unregistered_access > h.visit_count)
      return "bucket " + p + ": news clicks exceed visits";
  }
  if (visits != total_visits || reg != registered_access || plain != unregistered_access ||
      docs != project_downloads)
    return "per-pseudonym buckets do not sum to the global counters";
  if (uniq != unique_visitors) return "unique_visitors differs from visited buckets";
  return {};
}

namespace {

nlohmann::json hits_json(const PseudonymHits& h) {
  nlohmann::json j = {{"visit_count", h.visit_count},
                      {"registered_access", h.registered_access},
                      {"unregistered_access", h.unregistered_access},
                      {"project_downloads", h.project_downloads}};
  j["theme"] = h.theme ? nlohmann::json(std::string(to_string(*h.theme))) : nlohmann::json(nullptr);
  j["first_visit_at"] = h.first_visit_at ? nlohmann::json(*h.first_visit_at) : nlohmann::json(nullptr);
  return j;
}

PseudonymHits hits_from_json(const nlohmann::json& j) {
  PseudonymHits h;
  h.visit_count = j.at("visit_count").get<std::uint64_t>();
  h.registered_access = j.at("registered_access").get<std::uint64_t>();
  h.unregistered_access = j.at("unregistered_access").get<std::uint64_t>();
  h.project_downloads = j.at("project_downloads").get<std::uint64_t>();
  if (j.contains("theme") && !j["theme"].is_null()) h.theme = parse_theme(j["theme"].get<std::string>());
  if (j.contains("first_visit_at") && !j["first_visit_at"].is_null())
    h.first_visit_at = j["first_visit_at"].get<SimTime>();
  return h;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

const char* kFormPage = R"(<!doctype html>
<html lang="pt-BR">
<head><meta charset="utf-8"><title>Noticias</title></head>
<body>
<h1>Leia a noticia completa</h1>
<form method="post" action="/register">
  <input type="hidden" name="id" value="{ID}">
  <label>Nome <input name="name" required></label>
  <label>E-mail <input name="email" required></label>
  <label>Telefone <input name="phone" required></label>
  <button type="submit">Register and access</button>
</form>
<p><a href="/access?id={ID}">Access without registration</a></p>
<p><a href="/project?id={ID}">To see the project of this scientific research click here</a></p>
</body>
</html>
)";

std::string form_page(std::string_view id) {
  std::string page = kFormPage;
  for (std::size_t pos; (pos = page.find("{ID}")) != std::string::npos;)
    page.replace(pos, 4, id);
  return page;
}

}  // namespace

nlohmann::json to_json(const LedgerSnapshot& l) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& [p, h] : l.per_pseudonym) {
    nlohmann::json row = hits_json(h);
    row["pseudonym"] = p;
    per.push_back(std::move(row));
  }
  return {{"unique_visitors", l.unique_visitors},
          {"total_visits", l.total_visits},
          {"registered_access", l.registered_access},
          {"unregistered_access", l.unregistered_access},
          {"news_visits", l.news_visits},
          {"project_downloads", l.project_downloads},
          {"per_pseudonym", per},
          {"unattributed", hits_json(l.unattributed)}};
}

LedgerSnapshot ledger_from_json(const nlohmann::json& j) {
  LedgerSnapshot l;
  l.unique_visitors = j.at("unique_visitors").get<std::uint64_t>();
  l.total_visits = j.at("total_visits").get<std::uint64_t>();
  l.registered_access = j.at("registered_access").get<std::uint64_t>();
  l.unregistered_access = j.at("unregistered_access").get<std::uint64_t>();
  l.news_visits = j.at("news_visits").get<std::uint64_t>();
  l.project_downloads = j.at("project_downloads").get<std::uint64_t>();
  for (const auto& row : j.at("per_pseudonym"))
    l.per_pseudonym[row.at("pseudonym").get<std::string>()] = hits_from_json(row);
  if (j.contains("unattributed")) l.unattributed = hits_from_json(j["unattributed"]);
  return l;
}

nlohmann::json to_json(const AccessLogEntry& e) {
  return {{"at", e.at},
          {"method", e.method},
          {"path", e.path},
          {"kind", e.kind ? nlohmann::json(std::string(to_string(*e.kind))) : nlohmann::json(nullptr)},
          {"pseudonym", e.pseudonym},
          {"status", e.status}};
}

LandingContent LandingContent::load(const std::filesystem::path& data_dir) {
  return from_document(data_dir / "landing" / "project.txt");
}

LandingContent LandingContent::from_document(const std::filesystem::path& project_document) {
  LandingContent c;
  c.project_document = io::read_file(project_document);
  for (Theme t : kAllThemes) {
    const std::string name(to_string(t));
    c.news_pages[t] = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>" + name +
                      "</title></head>\n<body><h1>Noticias: " + name +
                      "</h1><p>Pagina de noticias local.</p></body></html>\n";
  }
  return c;
}

LandingService::LandingService(LandingContent content) : content_(std::move(content)) {}

void LandingService::register_pseudonym(const std::string& pseudonym, Theme theme) {
  std::lock_guard lock(mu_);
  auto& b = buckets_[pseudonym];
  b.theme = theme;
}

bool LandingService::is_registered(std::string_view pseudonym) const {
  std::lock_guard lock(mu_);
  return buckets_.count(std::string(pseudonym)) != 0;
}

void LandingService::set_access_log(AccessLog log) {
  std::lock_guard lock(mu_);
  access_log_ = std::move(log);
}

PseudonymHits& LandingService::bucket_for(const LandingRequest& req, std::string& who) {
  auto it = req.params.find("id");
  if (it != req.params.end()) {
    auto b = buckets_.find(it->second);
    if (b != buckets_.end()) {
      who = it->second;
      return b->second;
    }
  }
  who = kUnattributed;
  return unattributed_;
}

void LandingService::count_page_view(PseudonymHits& b, bool attributed, SimTime at) {
  ++b.visit_count;
  ++totals_.total_visits;
  if (attributed && !b.first_visit_at) {
    b.first_visit_at = at;
    ++totals_.unique_visitors;
  }
}

std::string LandingService::news_location(const PseudonymHits& b) const {
  return "/news/" + std::string(to_string(b.theme.value_or(Theme::politics)));
}

LandingResponse LandingService::bait(const LandingRequest& req, std::string& who,
                                     std::optional<VisitKind>& kind) {
  PseudonymHits& b = bucket_for(req, who);
  count_page_view(b, who != kUnattributed, req.at);
  kind = VisitKind::page_view;
  LandingResponse r;
  r.body = form_page(who != kUnattributed ? who : "");
  return r;
}

LandingResponse LandingService::news_redirect(const LandingRequest& req, bool registered,
                                              std::string& who, std::optional<VisitKind>& kind) {
  if (registered) {
    // Read for validation only.
    for (const char* field : {"name", "email", "phone"}) {
      auto it = req.params.find(field);
      if (it == req.params.end() || trim(it->second).empty()) {
        who.clear();
        LandingResponse r;
        r.status = 400;
        r.content_type = "text/plain; charset=utf-8";
        r.body = "all fields are required\n";
        return r;
      }
    }
  }
  PseudonymHits& b = bucket_for(req, who);
  const bool attributed = who != kUnattributed;
  // A click on either button implies the form page was seen.
  if (b.registered_access + b.unregistered_access + 1 > b.visit_count)
    count_page_view(b, attributed, req.at);
  if (registered) {
    ++b.registered_access;
    ++totals_.registered_access;
    kind = VisitKind::register_access;
  } else {
    ++b.unregistered_access;
    ++totals_.unregistered_access;
    kind = VisitKind::plain_access;
  }
  ++totals_.news_visits;
  LandingResponse r;
  r.status = 303;
  r.location = news_location(b);
  r.content_type = "text/plain; charset=utf-8";
  r.body = "see " + r.location + "\n";
  return r;
}

LandingResponse LandingService::project(const LandingRequest& req, std::string& who,
                                        std::optional<VisitKind>& kind) {
  PseudonymHits& b = bucket_for(req, who);
  if (b.project_downloads + 1 > b.visit_count) count_page_view(b, who != kUnattributed, req.at);
  ++b.project_downloads;
  ++totals_.project_downloads;
  kind = VisitKind::project_doc;
  LandingResponse r;
  r.content_type = "text/plain; charset=utf-8";
  r.body = content_.project_document;
  return r;
}

LandingResponse LandingService::news_page(std::string_view theme_name) const {
  LandingResponse r;
  auto theme = try_parse_theme(theme_name);
  if (!theme) {
    r.status = 404;
    r.content_type = "text/plain; charset=utf-8";
    r.body = "not found\n";
    return r;
  }
  auto it = content_.news_pages.find(*theme);
  r.body = it != content_.news_pages.end() ? it->second : std::string();
  return r;
}

LandingResponse LandingService::handle(const LandingRequest& req) {
  ++requests_;
  std::lock_guard lock(mu_);
  std::string who;
  std::optional<VisitKind> kind;
  LandingResponse resp;
  const std::string& path = req.path;
  if (req.method == "GET" && path == "/bait") {
    resp = bait(req, who, kind);
  } else if (req.method == "POST" && path == "/register") {
    resp = news_redirect(req, true, who, kind);
  } else if (req.method == "GET" && path == "/access") {
    resp = news_redirect(req, false, who, kind);
  } else if (req.method == "GET" && path == "/project") {
    resp = project(req, who, kind);
  } else if (req.method == "GET" && path.rfind("/news/", 0) == 0) {
    resp = news_page(std::string_view(path).substr(6));
  } else {
    resp.status = (path == "/bait" || path == "/register" || path == "/access" ||
                   path == "/project")
                      ? 405
                      : 404;
    resp.content_type = "text/plain; charset=utf-8";
    resp.body = resp.status == 405 ? "method not allowed\n" : "not found\n";
  }
  if (access_log_) {
    AccessLogEntry e;
    e.at = req.at;
    e.method = req.method;
    e.path = path;
    e.kind = kind;
    e.pseudonym = who;
    e.status = resp.status;
    access_log_(e);
  }
  return resp;
}

LedgerSnapshot LandingService::snapshot() const {
  std::lock_guard lock(mu_);
  LedgerSnapshot s = totals_;
  for (const auto& [p, h] : buckets_)
    if (h.hits() > 0) s.per_pseudonym.emplace(p, h);
  s.unattributed = unattributed_;
  return s;
}

namespace {

LandingRequest make_request(std::string method, std::string path, const std::string& pseudonym,
                            SimTime at) {
  LandingRequest r;
  r.method = std::move(method);
  r.path = std::move(path);
  r.params["id"] = pseudonym;
  r.at = at;
  return r;
}

}  // namespace

LandingResponse LandingClient::visit(const std::string& pseudonym, SimTime at) {
  return send(make_request("GET", "/bait", pseudonym, at));
}

LandingResponse LandingClient::register_access(const std::string& pseudonym,
                                               const std::string& name, const std::string& email,
                                               const std::string& phone, SimTime at) {
  LandingRequest r = make_request("POST", "/register", pseudonym, at);
  r.params["name"] = name;
  r.params["email"] = email;
  r.params["phone"] = phone;
  return send(r);
}

LandingResponse LandingClient::plain_access(const std::string& pseudonym, SimTime at) {
  return send(make_request("GET", "/access", pseudonym, at));
}

LandingResponse LandingClient::project_doc(const std::string& pseudonym, SimTime at) {
  return send(make_request("GET", "/project", pseudonym, at));
}

LandingResponse InProcessLandingClient::send(const LandingRequest& request) {
  return service_.handle(request);
}

}  // namespace phishsim

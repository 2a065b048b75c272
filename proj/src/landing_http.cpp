#include <httplib.h>

#include <charconv>

#include "phishsim/landing.hpp"

namespace phishsim {

namespace {

SimTime header_time(const httplib::Request& req) {
  const std::string v = req.get_header_value(kSimTimeHeader);
  SimTime t = 0;
  if (!v.empty()) std::from_chars(v.data(), v.data() + v.size(), t);
  return t;
}

LandingRequest from_http(const httplib::Request& req) {
  LandingRequest r;
  r.method = req.method;
  r.path = req.path;
  for (const auto& [k, v] : req.params) r.params.emplace(k, v);
  r.at = header_time(req);
  return r;
}

void to_http(const LandingResponse& resp, httplib::Response& res) {
  res.status = resp.status;
  if (!resp.location.empty()) res.set_header("Location", resp.location);
  res.set_content(resp.body, resp.content_type);
}

}  // namespace

struct LandingHttpServer::Impl {
  httplib::Server server;
};

LandingHttpServer::LandingHttpServer(LandingService& service) : impl_(std::make_unique<Impl>()) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    to_http(service.handle(from_http(req)), res);
  };
  impl_->server.set_tcp_nodelay(true);
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
}

LandingHttpServer::~LandingHttpServer() { stop(); }

int LandingHttpServer::start(int port) {
  if (thread_.joinable()) throw ContractViolation("landing server already started");
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    port_ = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ < 0) throw std::runtime_error("landing server: cannot bind loopback port");
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void LandingHttpServer::stop() {
  if (!thread_.joinable()) return;
  impl_->server.stop();
  thread_.join();
}

struct HttpLandingClient::Impl {
  explicit Impl(const std::string& host, int port) : client(host, port) {}
  httplib::Client client;
};

HttpLandingClient::HttpLandingClient(std::string host, int port)
    : impl_(std::make_unique<Impl>(host, port)) {
  impl_->client.set_keep_alive(true);
  impl_->client.set_tcp_nodelay(true);
}

HttpLandingClient::~HttpLandingClient() = default;

LandingResponse HttpLandingClient::send(const LandingRequest& request) {
  httplib::Headers headers = {{kSimTimeHeader, std::to_string(request.at)}};
  httplib::Params params(request.params.begin(), request.params.end());
  httplib::Result result;
  if (request.method == "GET") {
    result = impl_->client.Get(request.path, params, headers);
  } else if (request.method == "POST") {
    result = impl_->client.Post(request.path, headers, params);
  } else {
    throw InvalidArgument("http client: unsupported method " + request.method);
  }
  if (!result) throw std::runtime_error("landing request failed: " + httplib::to_string(result.error()));
  LandingResponse r;
  r.status = result->status;
  r.body = result->body;
  r.content_type = result->get_header_value("Content-Type");
  r.location = result->get_header_value("Location");
  return r;
}

}  // namespace phishsim

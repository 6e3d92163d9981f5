#include "ivos/http_server.hpp"

#include <cstdio>

#include "httplib.h"
#include "ivos/error.hpp"
#include "ivos/wire.hpp"

namespace ivos {

using nlohmann::json;

struct HttpServer::Impl {
  EvaluationService& service;
  LogSink log;
  httplib::Server server;

  explicit Impl(EvaluationService& s, LogSink l) : service(s), log(std::move(l)) {}
};

namespace {

std::string token_of(const httplib::Request& req) {
  if (req.has_header("X-Ivos-Token")) return req.get_header_value("X-Ivos-Token");
  const std::string auth = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  if (auth.rfind(prefix, 0) == 0) return auth.substr(prefix.size());
  return {};
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::format, std::string("request body is not JSON: ") + e.what());
  }
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

// Runs the handler and converts any failure into the wire error shape.
template <typename F>
void guarded(httplib::Response& res, F&& handler) {
  try {
    handler();
  } catch (const Error& e) {
    send_json(res, http_status(e.code()), error_json(e.code(), e.what()).dump());
  } catch (const std::exception& e) {
    send_json(res, 500, error_json(ErrorCode::io, e.what()).dump());
  }
}

}  // namespace

HttpServer::HttpServer(EvaluationService& service, LogSink log)
    : impl_(std::make_unique<Impl>(service, std::move(log))) {
  auto& srv = impl_->server;
  Impl* impl = impl_.get();

  srv.Get("/health", [impl](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, impl->service.health().dump());
  });
  srv.Post("/session", [impl](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, impl->service.start(token_of(req), parse_body(req)).dump()); });
  });
  srv.Post(R"(/session/([A-Za-z0-9_-]+)/prediction)", [impl](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      send_json(res, 200, impl->service.submit(token_of(req), req.matches[1], parse_body(req)).dump());
    });
  });
  srv.Get(R"(/session/([A-Za-z0-9_-]+)/report)", [impl](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, impl->service.report(token_of(req), req.matches[1])); });
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const ErrorCode code = res.status == 404 ? ErrorCode::not_found : ErrorCode::invalid_argument;
      res.set_content(error_json(code, "no such endpoint").dump(), "application/json");
    }
  });
  srv.set_logger([impl](const httplib::Request& req, const httplib::Response& res) {
    if (!impl->log) return;
    char line[512];
    std::snprintf(line, sizeof line, "%s %s -> %d (%zu bytes)", req.method.c_str(), req.path.c_str(), res.status,
                  res.body.size());
    impl->log(line);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int p = srv.bind_to_any_port(host);
    if (p < 0) throw Error(ErrorCode::io, "cannot bind " + host);
    return p;
  }
  if (!srv.bind_to_port(host, port)) {
    throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  return port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace ivos

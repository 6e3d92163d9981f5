#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ivos/service.hpp"

namespace ivos {

/// Wire protocol over HTTP/1.1. The participant token travels in the
/// X-Ivos-Token header (or "Authorization: Bearer <token>").
///   POST /session                   {sequence | split}
///   POST /session/<id>/prediction   {masks | labels}
///   GET  /session/<id>/report
///   GET  /health
/// Errors answer with {code, message} and a matching HTTP status.
class HttpServer {
 public:
  using LogSink = std::function<void(const std::string&)>;

  explicit HttpServer(EvaluationService& service, LogSink log = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, throws on failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void serve();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ivos

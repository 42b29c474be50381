// SPDX-License-Identifier: Apache-2.0
#include "dmgr/service/http_server.hpp"

#include "httplib.h"

namespace dmgr::service {

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(SessionService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto out = service.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  auto& s = impl_->server;
  if (!static_dir.empty()) {
    if (!s.set_mount_point("/", static_dir.string())) {
      throw ConfigError("static directory not found: " + static_dir.string());
    }
  }
  s.Get("/api/.*", forward);
  s.Post("/api/.*", forward);
  s.Put("/api/.*", forward);
  s.Delete("/api/.*", forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace dmgr::service

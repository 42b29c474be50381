// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "dmgr/service/session.hpp"

namespace dmgr::service {

/// Serves a SessionService over HTTP/1.1; everything under /api goes to the
/// service, other GETs to `static_dir` when one is given.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service, std::filesystem::path static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Returns the bound port (an ephemeral one when `port` is 0).
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dmgr::service

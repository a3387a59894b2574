/* Copyright 2026 The PASAM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "pasam/segment/builtin.hpp"

namespace pasam::app {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  /// Backend for ?backend=remote, e.g. "http://127.0.0.1:8090".
  std::optional<std::string> remote_endpoint;
  segment::BuiltinParams builtin;
  /// Concurrent reconstruction jobs.
  int max_jobs = 2;
  double queue_timeout_s = 30.0;
  double job_timeout_s = 300.0;
  std::size_t max_sessions = 256;
  std::size_t max_body_bytes = 512u << 20;
};

/// HTTP API v1:
///   POST /v1/images                     PAZ image or PNG upload
///   GET  /v1/images/{id}/render         8-bit PNG, ?window=lo,hi
///   POST /v1/images/{id}/prompts        {prompts, mode: append|replace}
///   POST /v1/images/{id}/segment        ?backend=builtin|remote&mode=...
///   POST /v1/pipeline/skinband
///   POST /v1/pipeline/dualsos
///   POST /v1/pipeline/vessels
///   GET  /v1/healthz
/// Errors are {error: {code, message}} with a non-2xx status.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the configured address; returns the bound port.
  int bind();
  /// Serves until stop(); call after bind().
  void serve();
  /// Cancels running jobs and stops serving. Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pasam::app

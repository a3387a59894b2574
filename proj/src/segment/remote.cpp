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

#include "pasam/segment/remote.hpp"

#include <chrono>

#include <httplib.h>

#include "pasam/core/error.hpp"

namespace pasam::segment {
namespace {

using nlohmann::json;

std::string backend_error_message(const json& body) {
  const json& err = body.at("error");
  return err.at("code").get<std::string>() + ": " + err.at("message").get<std::string>();
}

bool is_error_body(const json& body) {
  if (!body.is_object() || !body.contains("error")) return false;
  const json& err = body["error"];
  return err.is_object() && err.contains("code") && err["code"].is_string() &&
         err.contains("message") && err["message"].is_string();
}

}  // namespace

SegmentResult remote_segment(const std::string& endpoint, const SegmentRequest& request,
                             const RemoteOptions& options) {
  request.validate();
  const std::string payload = encode_request(request, options.image_encoding).dump();

  httplib::Client client(endpoint);
  if (!client.is_valid()) {
    throw Error(ErrorCode::kTransport, "invalid backend endpoint '" + endpoint + "'");
  }
  const auto to_duration = [](double s) {
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(s));
  };
  client.set_connection_timeout(to_duration(options.connect_timeout_s));
  client.set_read_timeout(to_duration(options.read_timeout_s));
  client.set_write_timeout(to_duration(options.read_timeout_s));

  const auto start = std::chrono::steady_clock::now();
  const httplib::Result res = client.Post("/v1/segment", payload, "application/json");
  const auto stop = std::chrono::steady_clock::now();
  if (!res) {
    throw Error(ErrorCode::kTransport, "request to " + endpoint +
                                           "/v1/segment failed: " + httplib::to_string(res.error()));
  }

  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedResponse,
                "backend returned HTTP " + std::to_string(res->status) + " with a non-JSON body");
  }
  if (res->status < 200 || res->status >= 300) {
    if (is_error_body(body)) throw Error(ErrorCode::kBackendError, backend_error_message(body));
    throw Error(ErrorCode::kMalformedResponse,
                "backend returned HTTP " + std::to_string(res->status) + " without an error object");
  }
  if (is_error_body(body)) throw Error(ErrorCode::kMalformedResponse, "error object in a success response");

  const SegmentResponse decoded = decode_response(body);
  SegmentResult out{to_label_mask(decoded.mask, request.image.grid(), request.mode),
                    decoded.elapsed_ms,
                    std::chrono::duration<double, std::milli>(stop - start).count(),
                    decoded.backend};
  return out;
}

}  // namespace pasam::segment

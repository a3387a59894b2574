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

#include <string>

#include "pasam/core/types.hpp"
#include "pasam/segment/builtin.hpp"
#include "pasam/segment/protocol.hpp"

namespace pasam::segment {

struct RemoteOptions {
  ImageEncoding image_encoding = ImageEncoding::kF32leBase64;
  double connect_timeout_s = 5.0;
  double read_timeout_s = 60.0;
};

struct SegmentResult {
  LabelMask mask;
  double backend_elapsed_ms = 0.0;  // as reported by the backend
  double round_trip_ms = 0.0;       // measured by the client
  std::string backend;
};

/// POSTs the request to `<endpoint>/v1/segment`, e.g. endpoint
/// "http://127.0.0.1:8090". Errors:
///   kTransport          connection or IO failure
///   kMalformedResponse  body does not follow the response schema
///   kDimensionMismatch  mask size differs from the request image
///   kBackendError       backend returned {error}; message kept verbatim
SegmentResult remote_segment(const std::string& endpoint, const SegmentRequest& request,
                             const RemoteOptions& options = {});

}  // namespace pasam::segment

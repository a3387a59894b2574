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

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "pasam/core/types.hpp"
#include "pasam/segment/protocol.hpp"

namespace pasam::testing {

enum class StubMode {
  kCheckerboard,    // (x + y) % 2 mask of the request size
  kWrongDims,       // checkerboard one column too wide
  kError,           // HTTP 500 with an error object
  kErrorNoObject,   // HTTP 500 with an unrelated JSON body
  kMalformed,       // HTTP 200, mask object missing
  kNonJson,         // HTTP 200, plain text
  kErrorInSuccess,  // HTTP 200 carrying an error object
  kBadLabels,       // binary request answered with label 2
  kBuiltin,         // runs the built-in segmenter on the request
};

/// Checkerboard used by the stub, for building expected fixtures.
LabelMask checkerboard(const ImageGrid& grid);

/// Segmentation backend speaking wire protocol v1 on 127.0.0.1, any port.
class StubBackend {
 public:
  explicit StubBackend(StubMode mode,
                       segment::MaskEncoding encoding = segment::MaskEncoding::kU8leBase64);
  ~StubBackend();
  StubBackend(const StubBackend&) = delete;
  StubBackend& operator=(const StubBackend&) = delete;

  std::string endpoint() const;
  void set_mode(StubMode mode);
  /// Body of the most recent request, or null.
  nlohmann::json last_request() const;
  int request_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pasam::testing

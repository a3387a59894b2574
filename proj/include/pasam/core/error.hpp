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

#include <stdexcept>
#include <string>
#include <string_view>

namespace pasam {

enum class ErrorCode {
  kInvalidArgument,
  kBadMagic,
  kTruncated,
  kLengthMismatch,
  kNonFinite,
  kInvalidHeader,
  kIo,
  kGridMismatch,
  kChannelMismatch,
  kRecordTooShort,
  kSourceOutsideGrid,
  kTooFewPixels,
  kDegenerateMask,
  kDegenerateImage,
  kNoForegroundPrompt,
  kTransport,
  kMalformedResponse,
  kDimensionMismatch,
  kBackendError,
  kConfig,
  kCancelled,
  kNotFound,
  kBusy,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (CLI, service, tests) can branch on the kind without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pasam

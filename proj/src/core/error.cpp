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

#include "pasam/core/error.hpp"

namespace pasam {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kInvalidHeader: return "invalid_header";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kGridMismatch: return "grid_mismatch";
    case ErrorCode::kChannelMismatch: return "channel_mismatch";
    case ErrorCode::kRecordTooShort: return "record_too_short";
    case ErrorCode::kSourceOutsideGrid: return "source_outside_grid";
    case ErrorCode::kTooFewPixels: return "too_few_pixels";
    case ErrorCode::kDegenerateMask: return "degenerate_mask";
    case ErrorCode::kDegenerateImage: return "degenerate_image";
    case ErrorCode::kNoForegroundPrompt: return "no_foreground_prompt";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kMalformedResponse: return "malformed_response";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kBackendError: return "backend_error";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kCancelled: return "cancelled";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kBusy: return "busy";
  }
  return "unknown";
}

}  // namespace pasam

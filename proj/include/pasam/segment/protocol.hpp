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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pasam/core/error.hpp"
#include "pasam/core/types.hpp"
#include "pasam/segment/builtin.hpp"

namespace pasam::segment {

// Segmentation wire protocol v1. Rasters are row-major with a top-left
// origin; base64 uses the standard alphabet with padding.

enum class ImageEncoding { kF32leBase64, kPngBase64 };
enum class MaskEncoding { kU8leBase64, kPngBase64 };

const char* image_encoding_name(ImageEncoding e);
const char* mask_encoding_name(MaskEncoding e);
const char* mode_name(SegmentMode m);
SegmentMode parse_mode(const std::string& name);

/// |v| min-max rescaled to [0, 1]; a constant image maps to all zeros.
std::vector<float> normalize_for_transport(const Image2D& image);

nlohmann::json encode_image_raster(const Image2D& image, ImageEncoding encoding);
nlohmann::json encode_mask_raster(const LabelMask& mask, MaskEncoding encoding);

/// f32le-base64 with the image values unchanged (no transport
/// normalization), for exact result transfer.
nlohmann::json encode_raw_image_raster(const Image2D& image);

struct ImageRaster {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // f32le: as sent; PNG: integer samples
  int png_bit_depth = 0;      // 0 for f32le
};

/// Decodes a {width, height, encoding, data} image object.
ImageRaster decode_image_raster(const nlohmann::json& raster,
                                ErrorCode error_code = ErrorCode::kInvalidArgument);

struct MaskRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> labels;
};

/// Decodes a {width, height, encoding, data} mask object.
/// Shape or payload problems throw `error_code`.
MaskRaster decode_mask_raster(const nlohmann::json& raster,
                              ErrorCode error_code = ErrorCode::kMalformedResponse);

nlohmann::json encode_prompts(std::span<const PromptPoint> prompts);
/// Compact one-line serialization of a prompt list.
std::string serialize_prompts(std::span<const PromptPoint> prompts);
std::vector<PromptPoint> decode_prompts(const nlohmann::json& prompts);

/// The transported image is normalized; the request itself is not modified.
nlohmann::json encode_request(const SegmentRequest& request,
                              ImageEncoding encoding = ImageEncoding::kF32leBase64);

/// Decodes a request body. The image is placed on `grid` when given
/// (dimensions must match), otherwise on a zero-origin 0.1 mm grid.
/// Schema problems throw kInvalidArgument.
SegmentRequest decode_request(const nlohmann::json& body,
                              const std::optional<ImageGrid>& grid = std::nullopt);

nlohmann::json encode_response(const LabelMask& mask, double elapsed_ms,
                               const std::string& backend,
                               MaskEncoding encoding = MaskEncoding::kU8leBase64);

struct SegmentResponse {
  MaskRaster mask;
  double elapsed_ms = 0.0;
  std::string backend;
};

/// Schema problems throw kMalformedResponse.
SegmentResponse decode_response(const nlohmann::json& body);

nlohmann::json encode_error(const std::string& code, const std::string& message);

/// Builds a LabelMask on `grid` from decoded labels. Binary masks must hold
/// only {0, 1}; multilabel masks must be densely labelled.
LabelMask to_label_mask(const MaskRaster& raster, const ImageGrid& grid, SegmentMode mode);

}  // namespace pasam::segment

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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pasam/core/types.hpp"

namespace pasam {

struct GrayPng {
  int width = 0;
  int height = 0;
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> pixels;  // row-major
};

/// Encodes 8- or 16-bit grayscale; 8-bit requires every pixel <= 255.
std::string encode_gray_png(const GrayPng& image);
/// Accepts 8/16-bit grayscale (sub-byte depths are expanded to 8 bits).
GrayPng decode_gray_png(std::string_view bytes);

/// 8-bit when the mask has at most 255 labels, 16-bit otherwise.
std::string encode_mask_png(const LabelMask& mask);

/// Writes `path` plus a `<path>.json` sidecar carrying the grid and kind.
void write_mask_png(const LabelMask& mask, const std::filesystem::path& path);
LabelMask read_mask_png(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& png_path);

/// Heuristic by magic bytes.
bool looks_like_png(std::string_view bytes);

}  // namespace pasam

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
#include <vector>

#include "pasam/core/types.hpp"

namespace pasam::maskops {

/// Per column, the smallest foreground row, or nullopt for an empty column.
std::vector<std::optional<int>> upper_boundary(const LabelMask& mask);

/// Band from `offset_mm` to `offset_mm + depth_mm` below each column's upper
/// boundary (inclusive), clamped to the grid.
LabelMask skin_band_mask(const LabelMask& mask, double depth_mm = 10.0,
                         double offset_mm = 0.0);

enum class MaskMode { kKeep, kRemove };

/// keep: image * mask; remove: image * (1 - mask). Exact per pixel.
Image2D apply_mask(const Image2D& image, const LabelMask& mask, MaskMode mode);

Volume3D stack_volume(std::vector<Image2D> slices, double step_mm);

enum class MipAxis {
  kSliceNormal,  // across slices: one value per slice pixel
  kDepth,        // along rows: width x slice-count en-face view
};

/// Pixelwise max |value| along the chosen axis.
///
/// kDepth output rows index slices; its grid keeps the slice pitch with
/// origin_y_mm = 0, so row r sits r * step_mm from the first slice only when
/// step_mm equals the pitch.
Image2D mip(const Volume3D& volume, MipAxis axis);

struct ComponentLabels {
  std::vector<std::uint32_t> labels;  // 0 = background, 1..count
  std::uint32_t count = 0;
};

/// Component labelling over a raw foreground flag raster, without the 16-bit
/// label limit of LabelMask. Same ordering rule as connected_components.
ComponentLabels label_components(std::span<const std::uint8_t> foreground, int width,
                                 int height, int connectivity = 8);

/// Labels 1..K in raster order of each component's first pixel. Any nonzero
/// input label counts as foreground. Connectivity is 4 or 8.
LabelMask connected_components(const LabelMask& mask, int connectivity = 8);

/// Background regions not connected to the image border become foreground.
LabelMask fill_holes(const LabelMask& mask);

/// One entry per label 1..K of a multilabel mask; mean of |image|.
std::vector<RegionStats> region_stats(const LabelMask& labels, const Image2D& image);

struct VesselCriteria {
  double area_min_mm2 = 0.05;
  double area_max_mm2 = 20.0;
  /// Minimum region mean |value| as a fraction of the image's max |value|.
  double intensity_rel_min = 0.15;

  void validate() const;
};

/// Keeps regions inside the area band and above the intensity floor, then
/// relabels the survivors densely in their original order.
LabelMask refine_vessels(const LabelMask& labels, const Image2D& image,
                         const VesselCriteria& criteria);

}  // namespace pasam::maskops

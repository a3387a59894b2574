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

#include <vector>

#include "pasam/core/types.hpp"

namespace pasam::segment {

enum class SegmentMode { kBinary, kMultilabel };

struct SegmentRequest {
  Image2D image;
  std::vector<PromptPoint> prompts;
  SegmentMode mode = SegmentMode::kBinary;

  /// At least one foreground prompt, every prompt inside the image.
  void validate() const;
};

enum class ThresholdMode { kOtsu, kPercentile };

struct BuiltinParams {
  double smooth_sigma_px = 1.5;
  ThresholdMode threshold_mode = ThresholdMode::kOtsu;
  double percentile = 90.0;  // used by kPercentile, in (0, 100)
  /// Hysteresis growth: pixels above threshold - tolerance * range that touch
  /// an above-threshold region join it. 0 disables growth.
  double grow_tolerance = 0.0;
  /// Fill enclosed background before prompt selection.
  bool fill_holes = true;

  void validate() const;
};

/// Classical prompt-driven segmentation:
///   |image| -> Gaussian smoothing -> global threshold -> optional hole fill
///   -> each foreground prompt collects the connected region of its own
///      class (8-connected foreground, 4-connected background)
///   -> any region holding a background prompt is dropped.
/// Binary mode returns the union; multilabel mode labels every
/// above-threshold component plus prompt-selected regions, densely in raster
/// order.
LabelMask builtin_segment(const SegmentRequest& request,
                          const BuiltinParams& params = {});

/// Separable Gaussian blur with replicated borders (exposed for tests).
std::vector<double> gaussian_smooth(std::span<const double> values, int width,
                                    int height, double sigma_px);

/// Otsu threshold over the given values (256 bins spanning [min, max]).
double otsu_threshold(std::span<const double> values);

}  // namespace pasam::segment

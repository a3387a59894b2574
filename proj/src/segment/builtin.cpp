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

#include "pasam/segment/builtin.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pasam/core/error.hpp"
#include "pasam/maskops/maskops.hpp"

namespace pasam::segment {
namespace {

constexpr int kBins = 256;

std::size_t prompt_index(const PromptPoint& p, int width) {
  return static_cast<std::size_t>(std::floor(p.y_px)) * width +
         static_cast<std::size_t>(std::floor(p.x_px));
}

// Regions above a lowered threshold that touch an above-threshold pixel.
std::vector<std::uint16_t> grow_regions(const std::vector<double>& smooth,
                                        const std::vector<std::uint16_t>& seed,
                                        double low, const ImageGrid& grid) {
  std::vector<std::uint8_t> relaxed(smooth.size());
  for (std::size_t i = 0; i < smooth.size(); ++i) relaxed[i] = smooth[i] > low ? 1 : 0;
  const maskops::ComponentLabels cc =
      maskops::label_components(relaxed, grid.width_px, grid.height_px, 8);
  std::vector<char> seeded(static_cast<std::size_t>(cc.count) + 1, 0);
  for (std::size_t i = 0; i < seed.size(); ++i) {
    if (seed[i]) seeded[cc.labels[i]] = 1;
  }
  std::vector<std::uint16_t> out(smooth.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto l = cc.labels[i];
    out[i] = l != 0 && seeded[l] ? 1 : 0;
  }
  return out;
}

}  // namespace

void SegmentRequest::validate() const {
  bool has_foreground = false;
  for (const PromptPoint& p : prompts) {
    validate_prompt(p, image.grid());
    has_foreground = has_foreground || p.label == 1;
  }
  if (!has_foreground) {
    throw Error(ErrorCode::kNoForegroundPrompt,
                "segmentation needs at least one foreground prompt");
  }
}

void BuiltinParams::validate() const {
  if (!(smooth_sigma_px >= 0.0) || !std::isfinite(smooth_sigma_px)) {
    throw Error(ErrorCode::kInvalidArgument, "smooth_sigma_px must be >= 0");
  }
  if (threshold_mode == ThresholdMode::kPercentile &&
      !(percentile > 0.0 && percentile < 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "percentile must lie in (0, 100)");
  }
  if (!(grow_tolerance >= 0.0) || !std::isfinite(grow_tolerance)) {
    throw Error(ErrorCode::kInvalidArgument, "grow_tolerance must be >= 0");
  }
}

std::vector<double> gaussian_smooth(std::span<const double> values, int width,
                                    int height, double sigma_px) {
  std::vector<double> out(values.begin(), values.end());
  if (sigma_px <= 0.0) return out;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
  std::vector<double> kernel(2 * radius + 1);
  double norm = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma_px * sigma_px));
    norm += kernel[k + radius];
  }
  for (double& k : kernel) k /= norm;

  std::vector<double> tmp(out.size());
  for (int y = 0; y < height; ++y) {
    const double* row = out.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * row[std::clamp(x + k, 0, width - 1)];
      }
      tmp[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] *
               tmp[static_cast<std::size_t>(std::clamp(y + k, 0, height - 1)) * width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

double otsu_threshold(std::span<const double> values) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    throw Error(ErrorCode::kDegenerateImage,
                "image has zero variance; threshold is undefined");
  }
  std::array<double, kBins> hist{};
  const double scale = kBins / (hi - lo);
  for (double v : values) {
    hist[std::min(kBins - 1, static_cast<int>((v - lo) * scale))] += 1.0;
  }
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int b = 0; b < kBins; ++b) sum_all += b * hist[b];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_bin = 0;
  for (int b = 0; b < kBins - 1; ++b) {
    w0 += hist[b];
    sum0 += b * hist[b];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = b;
    }
  }
  // Upper edge of the last background bin.
  return lo + (best_bin + 1) / scale;
}

LabelMask builtin_segment(const SegmentRequest& request, const BuiltinParams& params) {
  request.validate();
  params.validate();
  const ImageGrid& grid = request.image.grid();
  const int w = grid.width_px;
  const int h = grid.height_px;

  std::vector<double> magnitude(grid.pixel_count());
  const auto data = request.image.data();
  for (std::size_t i = 0; i < magnitude.size(); ++i) magnitude[i] = std::fabs(data[i]);
  const std::vector<double> smooth = gaussian_smooth(magnitude, w, h, params.smooth_sigma_px);

  const auto [img_lo, img_hi] = std::minmax_element(smooth.begin(), smooth.end());
  if (!(*img_hi > *img_lo)) {
    throw Error(ErrorCode::kDegenerateImage,
                "image has zero variance; threshold is undefined");
  }
  std::vector<double> nonzero;
  nonzero.reserve(smooth.size());
  for (double v : smooth) {
    if (v != 0.0) nonzero.push_back(v);
  }
  const auto [lo_it, hi_it] = std::minmax_element(nonzero.begin(), nonzero.end());
  const double range = *hi_it - *lo_it;
  double threshold = 0.0;
  if (!(range > 0.0)) {
    // Nonzero pixels share one value: the image is already two-class.
    threshold = 0.0;
  } else if (params.threshold_mode == ThresholdMode::kOtsu) {
    threshold = otsu_threshold(nonzero);
  } else {
    auto nth = nonzero.begin() +
               static_cast<std::ptrdiff_t>(params.percentile / 100.0 * (nonzero.size() - 1));
    std::nth_element(nonzero.begin(), nth, nonzero.end());
    threshold = *nth;
  }

  std::vector<std::uint16_t> fg(smooth.size());
  for (std::size_t i = 0; i < smooth.size(); ++i) fg[i] = smooth[i] > threshold ? 1 : 0;
  if (params.grow_tolerance > 0.0) {
    fg = grow_regions(smooth, fg, threshold - params.grow_tolerance * range, grid);
  }
  LabelMask classes(grid, std::move(fg), MaskKind::kBinary);
  if (params.fill_holes) classes = maskops::fill_holes(classes);

  // Region ids: foreground components keep their labels 1..Kf, background
  // components are shifted past them.
  std::vector<std::uint8_t> fg_flags(classes.labels().size());
  std::vector<std::uint8_t> bg_flags(classes.labels().size());
  for (std::size_t i = 0; i < fg_flags.size(); ++i) {
    fg_flags[i] = classes.labels()[i] != 0;
    bg_flags[i] = !fg_flags[i];
  }
  const maskops::ComponentLabels fg_cc = maskops::label_components(fg_flags, w, h, 8);
  const maskops::ComponentLabels bg_cc = maskops::label_components(bg_flags, w, h, 4);
  const auto kf = static_cast<std::size_t>(fg_cc.count);
  auto region_of = [&](std::size_t i) -> std::size_t {
    return fg_cc.labels[i] != 0 ? fg_cc.labels[i] : kf + bg_cc.labels[i];
  };
  const std::size_t n_regions = kf + bg_cc.count;

  std::vector<char> selected(n_regions + 1, 0);
  std::vector<char> removed(n_regions + 1, 0);
  if (request.mode == SegmentMode::kMultilabel) {
    for (std::size_t r = 1; r <= kf; ++r) selected[r] = 1;
  }
  for (const PromptPoint& p : request.prompts) {
    const std::size_t r = region_of(prompt_index(p, w));
    (p.label == 1 ? selected : removed)[r] = 1;
  }

  std::vector<std::uint16_t> out(grid.pixel_count(), 0);
  if (request.mode == SegmentMode::kBinary) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t r = region_of(i);
      out[i] = selected[r] && !removed[r] ? 1 : 0;
    }
    return LabelMask(grid, std::move(out), MaskKind::kBinary);
  }
  std::vector<std::uint16_t> dense(n_regions + 1, 0);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t r = region_of(i);
    if (!selected[r] || removed[r]) continue;
    if (dense[r] == 0) {
      if (next == 0xFFFF) {
        throw Error(ErrorCode::kDegenerateImage,
                    "segmentation produced more than 65535 regions");
      }
      dense[r] = static_cast<std::uint16_t>(++next);
    }
    out[i] = dense[r];
  }
  return LabelMask(grid, std::move(out), MaskKind::kMultilabel);
}

}  // namespace pasam::segment

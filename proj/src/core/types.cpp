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

#include "pasam/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pasam/core/error.hpp"

namespace pasam {
namespace {

void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

void require_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite,
                  std::string(what) + " contains a non-finite value");
    }
  }
}

}  // namespace

void ImageGrid::validate() const {
  require(std::isfinite(pitch_mm) && pitch_mm > 0.0,
          ErrorCode::kInvalidArgument, "grid pitch_mm must be > 0");
  require(std::isfinite(origin_x_mm) && std::isfinite(origin_y_mm),
          ErrorCode::kInvalidArgument, "grid origin must be finite");
  require(width_px >= 1 && height_px >= 1, ErrorCode::kInvalidArgument,
          "grid dimensions must be >= 1");
}

bool ImageGrid::contains_world(Point2 p) const {
  // Pixel footprints extend half a pitch around each center.
  const PixelCoord c = world_to_pixel(p, *this);
  return c.x >= -0.5 && c.x <= width_px - 0.5 && c.y >= -0.5 &&
         c.y <= height_px - 0.5;
}

Point2 pixel_to_world(double ix, double iy, const ImageGrid& grid) {
  return {grid.origin_x_mm + ix * grid.pitch_mm,
          grid.origin_y_mm + iy * grid.pitch_mm};
}

PixelCoord world_to_pixel(Point2 p, const ImageGrid& grid) {
  return {(p.x - grid.origin_x_mm) / grid.pitch_mm,
          (p.y - grid.origin_y_mm) / grid.pitch_mm};
}

Image2D::Image2D(const ImageGrid& grid)
    : grid_(grid), data_((grid.validate(), grid.pixel_count()), 0.0f) {}

Image2D::Image2D(const ImageGrid& grid, std::vector<float> data)
    : grid_(grid), data_(std::move(data)) {
  grid_.validate();
  require(data_.size() == grid_.pixel_count(), ErrorCode::kLengthMismatch,
          "image data length does not match grid dimensions");
  require_finite(data_, "image");
}

float Image2D::max_abs() const {
  float m = 0.0f;
  for (float v : data_) m = std::max(m, std::fabs(v));
  return m;
}

Volume3D::Volume3D(std::vector<Image2D> slices, double step_mm)
    : slices_(std::move(slices)), step_mm_(step_mm) {
  require(!slices_.empty(), ErrorCode::kInvalidArgument,
          "volume needs at least one slice");
  require(std::isfinite(step_mm_) && step_mm_ > 0.0,
          ErrorCode::kInvalidArgument, "volume step_mm must be > 0");
  for (std::size_t i = 1; i < slices_.size(); ++i) {
    if (!(slices_[i].grid() == slices_.front().grid())) {
      throw Error(ErrorCode::kGridMismatch,
                  "slice " + std::to_string(i) +
                      " grid differs from slice 0 grid");
    }
  }
}

LabelMask::LabelMask(const ImageGrid& grid, MaskKind kind)
    : grid_(grid), labels_((grid.validate(), grid.pixel_count()), 0),
      kind_(kind) {}

LabelMask::LabelMask(const ImageGrid& grid, std::vector<std::uint16_t> labels,
                     MaskKind kind)
    : grid_(grid), labels_(std::move(labels)), kind_(kind) {
  grid_.validate();
  require(labels_.size() == grid_.pixel_count(), ErrorCode::kLengthMismatch,
          "mask label length does not match grid dimensions");
  const std::uint16_t max_label =
      labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
  if (kind_ == MaskKind::kBinary) {
    require(max_label <= 1, ErrorCode::kInvalidArgument,
            "binary mask holds a label other than 0/1");
  } else {
    std::vector<bool> present(static_cast<std::size_t>(max_label) + 1, false);
    for (std::uint16_t v : labels_) present[v] = true;
    for (std::size_t k = 1; k < present.size(); ++k) {
      if (!present[k]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "multilabel mask is not dense: label " +
                        std::to_string(k) + " missing below max label " +
                        std::to_string(max_label));
      }
    }
  }
  num_labels_ = max_label;
}

std::size_t LabelMask::foreground_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels_.begin(), labels_.end(),
                    [](std::uint16_t v) { return v != 0; }));
}

ChannelData::ChannelData(int n_channels, int n_samples, double fs_hz,
                         double t0_s, std::vector<float> samples)
    : n_channels_(n_channels), n_samples_(n_samples), fs_hz_(fs_hz),
      t0_s_(t0_s), samples_(std::move(samples)) {
  require(n_channels_ >= 1 && n_samples_ >= 1, ErrorCode::kInvalidArgument,
          "channel data dimensions must be >= 1");
  require(std::isfinite(fs_hz_) && fs_hz_ > 0.0, ErrorCode::kInvalidArgument,
          "fs_hz must be > 0");
  require(std::isfinite(t0_s_), ErrorCode::kInvalidArgument,
          "t0_s must be finite");
  require(samples_.size() == static_cast<std::size_t>(n_channels_) *
                                 static_cast<std::size_t>(n_samples_),
          ErrorCode::kLengthMismatch,
          "sample count does not match n_channels x n_samples");
  require_finite(samples_, "channel data");
}

ChannelData::ChannelData(int n_channels, int n_samples, double fs_hz,
                         double t0_s)
    : ChannelData(n_channels, n_samples, fs_hz, t0_s,
                  std::vector<float>(static_cast<std::size_t>(
                                         std::max(n_channels, 0)) *
                                         static_cast<std::size_t>(
                                             std::max(n_samples, 0)),
                                     0.0f)) {}

ArrayGeometry::ArrayGeometry(std::vector<Point2> elements,
                             std::string descriptor)
    : elements_(std::move(elements)), descriptor_(std::move(descriptor)) {
  require(!elements_.empty(), ErrorCode::kInvalidArgument,
          "array geometry needs at least one element");
  for (const Point2& e : elements_) {
    require(std::isfinite(e.x) && std::isfinite(e.y),
            ErrorCode::kInvalidArgument, "element position must be finite");
  }
}

void validate_prompt(const PromptPoint& prompt, const ImageGrid& grid) {
  if (!(prompt.label == 0 || prompt.label == 1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "prompt label must be 0 (background) or 1 (foreground)");
  }
  if (!(prompt.x_px >= 0.0 && prompt.x_px < grid.width_px &&
        prompt.y_px >= 0.0 && prompt.y_px < grid.height_px)) {
    std::ostringstream os;
    os << "prompt (" << prompt.x_px << ", " << prompt.y_px
       << ") lies outside the " << grid.width_px << "x" << grid.height_px
       << " image";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

void Ellipse::validate() const {
  require(std::isfinite(cx_mm) && std::isfinite(cy_mm) &&
              std::isfinite(a_mm) && std::isfinite(b_mm) &&
              std::isfinite(theta_rad),
          ErrorCode::kInvalidArgument, "ellipse parameters must be finite");
  require(b_mm > 0.0 && a_mm >= b_mm, ErrorCode::kInvalidArgument,
          "ellipse requires a_mm >= b_mm > 0");
  require(theta_rad > -std::numbers::pi / 2 &&
              theta_rad <= std::numbers::pi / 2,
          ErrorCode::kInvalidArgument,
          "ellipse theta_rad must lie in (-pi/2, pi/2]");
}

bool Ellipse::contains(Point2 p) const {
  const double c = std::cos(theta_rad);
  const double s = std::sin(theta_rad);
  const double dx = p.x - cx_mm;
  const double dy = p.y - cy_mm;
  const double u = (c * dx + s * dy) / a_mm;
  const double v = (-s * dx + c * dy) / b_mm;
  return u * u + v * v <= 1.0;
}

double fold_axis_angle(double theta_rad) {
  constexpr double kPi = std::numbers::pi;
  double t = std::fmod(theta_rad, kPi);
  if (t <= -kPi / 2) t += kPi;
  if (t > kPi / 2) t -= kPi;
  return t;
}

Ellipse make_ellipse(double cx_mm, double cy_mm, double axis1_mm,
                     double axis2_mm, double theta_rad) {
  Ellipse e{cx_mm, cy_mm, axis1_mm, axis2_mm, theta_rad};
  if (e.b_mm > e.a_mm) {
    std::swap(e.a_mm, e.b_mm);
    e.theta_rad += std::numbers::pi / 2;
  }
  e.theta_rad = fold_axis_angle(e.theta_rad);
  e.validate();
  return e;
}

bool same_grid(const ImageGrid& a, const ImageGrid& b) { return a == b; }

}  // namespace pasam

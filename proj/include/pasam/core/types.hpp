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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pasam {

/// A point in world millimeters.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Fractional pixel coordinates: x = column, y = row (increasing with depth).
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

/// World registration of a square-pixel raster. Pixel (0,0) center sits at
/// (origin_x_mm, origin_y_mm); columns grow along +x, rows grow along +y.
struct ImageGrid {
  double origin_x_mm = 0.0;
  double origin_y_mm = 0.0;
  double pitch_mm = 0.1;
  int width_px = 1;
  int height_px = 1;

  void validate() const;
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_px) * static_cast<std::size_t>(height_px);
  }
  bool contains_world(Point2 p) const;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

Point2 pixel_to_world(double ix, double iy, const ImageGrid& grid);
PixelCoord world_to_pixel(Point2 p, const ImageGrid& grid);

class Image2D {
 public:
  /// Zero-filled image.
  explicit Image2D(const ImageGrid& grid);
  Image2D(const ImageGrid& grid, std::vector<float> data);

  const ImageGrid& grid() const { return grid_; }
  int width() const { return grid_.width_px; }
  int height() const { return grid_.height_px; }
  std::span<const float> data() const { return data_; }
  float at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * grid_.width_px + x];
  }
  /// Largest |value|, 0 for an all-zero image.
  float max_abs() const;

  friend bool operator==(const Image2D&, const Image2D&) = default;

 private:
  ImageGrid grid_;
  std::vector<float> data_;
};

class Volume3D {
 public:
  Volume3D(std::vector<Image2D> slices, double step_mm);

  const std::vector<Image2D>& slices() const { return slices_; }
  const ImageGrid& grid() const { return slices_.front().grid(); }
  std::size_t depth() const { return slices_.size(); }
  double step_mm() const { return step_mm_; }
  /// Distance between the first and last slice.
  double extent_mm() const {
    return static_cast<double>(slices_.size() - 1) * step_mm_;
  }

 private:
  std::vector<Image2D> slices_;
  double step_mm_;
};

enum class MaskKind { kBinary, kMultilabel };

class LabelMask {
 public:
  /// All-background mask.
  LabelMask(const ImageGrid& grid, MaskKind kind);
  /// Validates the binary / dense-multilabel invariant; never relabels.
  LabelMask(const ImageGrid& grid, std::vector<std::uint16_t> labels,
            MaskKind kind);

  const ImageGrid& grid() const { return grid_; }
  int width() const { return grid_.width_px; }
  int height() const { return grid_.height_px; }
  MaskKind kind() const { return kind_; }
  std::span<const std::uint16_t> labels() const { return labels_; }
  std::uint16_t at(int x, int y) const {
    return labels_[static_cast<std::size_t>(y) * grid_.width_px + x];
  }
  /// K: the highest label present (binary masks: 0 or 1).
  int num_labels() const { return num_labels_; }
  std::size_t foreground_count() const;

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  ImageGrid grid_;
  std::vector<std::uint16_t> labels_;
  MaskKind kind_;
  int num_labels_ = 0;
};

/// Per-element time series. Row i pairs with ArrayGeometry element i.
class ChannelData {
 public:
  ChannelData(int n_channels, int n_samples, double fs_hz, double t0_s,
              std::vector<float> samples);
  /// Zero-filled record.
  ChannelData(int n_channels, int n_samples, double fs_hz, double t0_s = 0.0);

  int n_channels() const { return n_channels_; }
  int n_samples() const { return n_samples_; }
  double fs_hz() const { return fs_hz_; }
  double t0_s() const { return t0_s_; }
  std::span<const float> samples() const { return samples_; }
  std::span<const float> row(int channel) const {
    return std::span<const float>(samples_).subspan(
        static_cast<std::size_t>(channel) * n_samples_, n_samples_);
  }

  /// Optional free-form geometry descriptor carried through the container.
  const std::string& geometry_descriptor() const { return geometry_; }
  void set_geometry_descriptor(std::string descriptor) {
    geometry_ = std::move(descriptor);
  }

  friend bool operator==(const ChannelData&, const ChannelData&) = default;

 private:
  int n_channels_;
  int n_samples_;
  double fs_hz_;
  double t0_s_;
  std::vector<float> samples_;
  std::string geometry_;
};

class ArrayGeometry {
 public:
  ArrayGeometry(std::vector<Point2> elements, std::string descriptor);

  std::span<const Point2> elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  const Point2& operator[](std::size_t i) const { return elements_[i]; }
  const std::string& descriptor() const { return descriptor_; }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;

 private:
  std::vector<Point2> elements_;
  std::string descriptor_;
};

/// A click on the image: pixel coordinates with top-left origin.
struct PromptPoint {
  double x_px = 0.0;
  double y_px = 0.0;
  int label = 1;  // 1 = foreground, 0 = background

  friend bool operator==(const PromptPoint&, const PromptPoint&) = default;
};

void validate_prompt(const PromptPoint& prompt, const ImageGrid& grid);

/// Ellipse with a_mm >= b_mm > 0 and theta_rad in (-pi/2, pi/2], the angle
/// of the a-axis measured from +x toward +y.
struct Ellipse {
  double cx_mm = 0.0;
  double cy_mm = 0.0;
  double a_mm = 1.0;
  double b_mm = 1.0;
  double theta_rad = 0.0;

  void validate() const;
  bool contains(Point2 p) const;

  friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

/// Builds a canonical Ellipse from any (semi-axis, semi-axis, angle) triple:
/// swaps axes when needed and folds the angle.
Ellipse make_ellipse(double cx_mm, double cy_mm, double axis1_mm,
                     double axis2_mm, double theta_rad);

/// Folds an axis angle into (-pi/2, pi/2].
double fold_axis_angle(double theta_rad);

struct RegionStats {
  int label = 0;
  std::size_t area_px = 0;
  double area_mm2 = 0.0;
  double mean_intensity = 0.0;
  PixelCoord centroid_px;
};

bool same_grid(const ImageGrid& a, const ImageGrid& b);

}  // namespace pasam

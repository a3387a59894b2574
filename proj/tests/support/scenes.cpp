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

#include "scenes.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace pasam::testing {

ImageGrid centered_grid(double cx_mm, double cy_mm, int width, int height, double pitch_mm) {
  return ImageGrid{cx_mm - 0.5 * (width - 1) * pitch_mm, cy_mm - 0.5 * (height - 1) * pitch_mm,
                   pitch_mm, width, height};
}

LabelMask rasterize_ellipse(const ImageGrid& grid, double cx, double cy, double a, double b,
                            double theta) {
  std::vector<std::uint16_t> labels(grid.pixel_count(), 0);
  const double c = std::cos(theta), s = std::sin(theta);
  for (int iy = 0; iy < grid.height_px; ++iy) {
    for (int ix = 0; ix < grid.width_px; ++ix) {
      const double x = grid.origin_x_mm + ix * grid.pitch_mm - cx;
      const double y = grid.origin_y_mm + iy * grid.pitch_mm - cy;
      const double u = (c * x + s * y) / a;
      const double v = (-s * x + c * y) / b;
      labels[static_cast<std::size_t>(iy) * grid.width_px + ix] = u * u + v * v <= 1.0;
    }
  }
  return LabelMask(grid, std::move(labels), MaskKind::kBinary);
}

LabelMask disk_mask(const ImageGrid& grid, double cx_px, double cy_px, double r_px) {
  std::vector<std::uint16_t> labels(grid.pixel_count(), 0);
  for (int iy = 0; iy < grid.height_px; ++iy) {
    for (int ix = 0; ix < grid.width_px; ++ix) {
      const double dx = ix - cx_px, dy = iy - cy_px;
      labels[static_cast<std::size_t>(iy) * grid.width_px + ix] = dx * dx + dy * dy <= r_px * r_px;
    }
  }
  return LabelMask(grid, std::move(labels), MaskKind::kBinary);
}

Peak peak_near(const Image2D& image, Point2 center_mm, double radius_mm) {
  const ImageGrid& g = image.grid();
  Peak best{-1, -1, -std::numeric_limits<double>::infinity()};
  for (int iy = 0; iy < g.height_px; ++iy) {
    for (int ix = 0; ix < g.width_px; ++ix) {
      const double dx = g.origin_x_mm + ix * g.pitch_mm - center_mm.x;
      const double dy = g.origin_y_mm + iy * g.pitch_mm - center_mm.y;
      if (dx * dx + dy * dy > radius_mm * radius_mm) continue;
      const double v = std::fabs(image.at(ix, iy));
      if (v > best.value) best = {ix, iy, v};
    }
  }
  return best;
}

double peak_error_px(const Image2D& image, const Peak& peak, Point2 truth_mm) {
  const ImageGrid& g = image.grid();
  const double tx = (truth_mm.x - g.origin_x_mm) / g.pitch_mm;
  const double ty = (truth_mm.y - g.origin_y_mm) / g.pitch_mm;
  return std::hypot(peak.ix - tx, peak.iy - ty);
}

double iou(const LabelMask& a, const LabelMask& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.labels().size(); ++i) {
    const bool pa = a.labels()[i] != 0, pb = b.labels()[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::uint32_t> flood_fill_labels(const std::vector<std::uint8_t>& fg, int width,
                                             int height, int connectivity) {
  std::vector<std::uint32_t> out(fg.size(), 0);
  std::uint32_t next = 0;
  std::deque<int> queue;
  for (int start = 0; start < width * height; ++start) {
    if (!fg[start] || out[start] != 0) continue;
    out[start] = ++next;
    queue.push_back(start);
    while (!queue.empty()) {
      const int p = queue.front();
      queue.pop_front();
      const int px = p % width, py = p / width;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (connectivity == 4 && dx != 0 && dy != 0) continue;
          const int nx = px + dx, ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const int q = ny * width + nx;
          if (fg[q] && out[q] == 0) {
            out[q] = next;
            queue.push_back(q);
          }
        }
      }
    }
  }
  return out;
}

double sampled_inside_length(Point2 p0, Point2 p1, double cx, double cy, double a, double b,
                             double theta, int n) {
  const double c = std::cos(theta), s = std::sin(theta);
  long inside = 0;
  for (int j = 0; j < n; ++j) {
    const double t = (j + 0.5) / n;
    const double x = p0.x + t * (p1.x - p0.x) - cx;
    const double y = p0.y + t * (p1.y - p0.y) - cy;
    const double u = (c * x + s * y) / a;
    const double v = (-s * x + c * y) / b;
    inside += u * u + v * v <= 1.0;
  }
  return static_cast<double>(inside) / n * std::hypot(p1.x - p0.x, p1.y - p0.y);
}

LabelMask random_blob_mask(const ImageGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0, grid.width_px), uy(0, grid.height_px);
  std::uniform_real_distribution<double> ur(0.5, 6.0);
  std::vector<std::uint16_t> labels(grid.pixel_count(), 0);
  const int blobs = 1 + static_cast<int>(rng() % 12);
  for (int k = 0; k < blobs; ++k) {
    const double cx = ux(rng), cy = uy(rng), r = ur(rng);
    for (int iy = 0; iy < grid.height_px; ++iy) {
      for (int ix = 0; ix < grid.width_px; ++ix) {
        if ((ix - cx) * (ix - cx) + (iy - cy) * (iy - cy) <= r * r) {
          labels[static_cast<std::size_t>(iy) * grid.width_px + ix] = 1;
        }
      }
    }
  }
  const int specks = static_cast<int>(rng() % 40);
  for (int k = 0; k < specks; ++k) labels[rng() % labels.size()] = 1;
  return LabelMask(grid, std::move(labels), MaskKind::kBinary);
}

VesselScene vessel_scene() {
  const ImageGrid grid{0, 0, 0.1, 200, 200};
  std::vector<float> img(grid.pixel_count(), 0.0f);
  std::vector<std::uint8_t> fg(grid.pixel_count(), 0);
  std::vector<std::vector<std::size_t>> disks;
  auto paint = [&](std::size_t i, float v) {
    img[i] = v;
    fg[i] = 1;
  };
  // Vessel cross-sections, radius 1 mm: area about 3.1 mm^2.
  const double centers[3][2] = {{40, 40}, {140, 50}, {90, 150}};
  for (const auto& c : centers) {
    std::vector<std::size_t> px;
    for (int iy = 0; iy < grid.height_px; ++iy) {
      for (int ix = 0; ix < grid.width_px; ++ix) {
        if ((ix - c[0]) * (ix - c[0]) + (iy - c[1]) * (iy - c[1]) <= 100.0) {
          const auto i = static_cast<std::size_t>(iy) * grid.width_px + ix;
          paint(i, 1.0f);
          px.push_back(i);
        }
      }
    }
    disks.push_back(std::move(px));
  }
  // Speck: bright but a single pixel (0.01 mm^2).
  paint(static_cast<std::size_t>(100) * grid.width_px + 20, -5.0f);
  // Smear: 4 x 1.2 mm band of weak signal, inside the area band but dim.
  for (int iy = 120; iy < 132; ++iy) {
    for (int ix = 150; ix < 190; ++ix) paint(static_cast<std::size_t>(iy) * grid.width_px + ix, 0.1f);
  }
  const auto flat = flood_fill_labels(fg, grid.width_px, grid.height_px, 8);
  std::vector<std::uint16_t> labels(flat.begin(), flat.end());
  return {Image2D(grid, std::move(img)), LabelMask(grid, std::move(labels), MaskKind::kMultilabel),
          std::move(disks)};
}

Image2D noisy_disk_image(const ImageGrid& grid, double cx_px, double cy_px, double r_px,
                         double snr, std::uint64_t seed) {
  const LabelMask disk = disk_mask(grid, cx_px, cy_px, r_px);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, snr > 0 ? 1.0 / snr : 1.0);
  std::vector<float> v(grid.pixel_count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(disk.labels()[i] + (snr > 0 ? noise(rng) : 0.0));
  }
  return Image2D(grid, std::move(v));
}

Image2D random_scene(const ImageGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0, grid.width_px), uy(0, grid.height_px);
  std::uniform_real_distribution<double> ur(2.0, 12.0), ua(0.3, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<float> v(grid.pixel_count());
  for (float& x : v) x = static_cast<float>(noise(rng));
  const int blobs = 2 + static_cast<int>(rng() % 5);
  for (int k = 0; k < blobs; ++k) {
    const double cx = ux(rng), cy = uy(rng), r = ur(rng), a = ua(rng);
    for (int iy = 0; iy < grid.height_px; ++iy) {
      for (int ix = 0; ix < grid.width_px; ++ix) {
        if ((ix - cx) * (ix - cx) + (iy - cy) * (iy - cy) <= r * r) {
          v[static_cast<std::size_t>(iy) * grid.width_px + ix] += static_cast<float>(a);
        }
      }
    }
  }
  return Image2D(grid, std::move(v));
}

}  // namespace pasam::testing

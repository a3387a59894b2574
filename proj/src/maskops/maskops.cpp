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

#include "pasam/maskops/maskops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pasam/core/error.hpp"

namespace pasam::maskops {
namespace {

void require_same_grid(const ImageGrid& a, const ImageGrid& b, const char* what) {
  if (!(a == b)) {
    throw Error(ErrorCode::kGridMismatch, std::string(what) + ": grids differ");
  }
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  std::uint32_t find(std::uint32_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

std::vector<std::optional<int>> upper_boundary(const LabelMask& mask) {
  std::vector<std::optional<int>> boundary(static_cast<std::size_t>(mask.width()));
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      if (mask.at(x, y) != 0) {
        boundary[x] = y;
        break;
      }
    }
  }
  return boundary;
}

LabelMask skin_band_mask(const LabelMask& mask, double depth_mm, double offset_mm) {
  if (!(depth_mm > 0.0) || !std::isfinite(depth_mm)) {
    throw Error(ErrorCode::kInvalidArgument, "band depth_mm must be > 0");
  }
  if (!(offset_mm >= 0.0) || !std::isfinite(offset_mm)) {
    throw Error(ErrorCode::kInvalidArgument, "band offset_mm must be >= 0");
  }
  const ImageGrid& g = mask.grid();
  // Row offsets; the epsilon absorbs decimal pitch round-off (10 / 0.1).
  constexpr double kEps = 1e-9;
  const auto lo_rows = static_cast<long>(std::ceil(offset_mm / g.pitch_mm - kEps));
  const auto hi_rows =
      static_cast<long>(std::floor((offset_mm + depth_mm) / g.pitch_mm + kEps));

  std::vector<std::uint16_t> band(g.pixel_count(), 0);
  const auto boundary = upper_boundary(mask);
  for (int x = 0; x < g.width_px; ++x) {
    if (!boundary[x]) continue;
    const long lo = std::max<long>(0, *boundary[x] + lo_rows);
    const long hi = std::min<long>(g.height_px - 1, *boundary[x] + hi_rows);
    for (long y = lo; y <= hi; ++y) {
      band[static_cast<std::size_t>(y) * g.width_px + x] = 1;
    }
  }
  return LabelMask(g, std::move(band), MaskKind::kBinary);
}

Image2D apply_mask(const Image2D& image, const LabelMask& mask, MaskMode mode) {
  require_same_grid(image.grid(), mask.grid(), "apply_mask");
  const auto data = image.data();
  const auto labels = mask.labels();
  std::vector<float> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool inside = labels[i] != 0;
    out[i] = (mode == MaskMode::kKeep) == inside ? data[i] : 0.0f;
  }
  return Image2D(image.grid(), std::move(out));
}

Volume3D stack_volume(std::vector<Image2D> slices, double step_mm) {
  return Volume3D(std::move(slices), step_mm);
}

Image2D mip(const Volume3D& volume, MipAxis axis) {
  const ImageGrid& g = volume.grid();
  if (axis == MipAxis::kSliceNormal) {
    std::vector<float> out(g.pixel_count(), 0.0f);
    for (const Image2D& slice : volume.slices()) {
      const auto d = slice.data();
      for (std::size_t i = 0; i < d.size(); ++i) out[i] = std::max(out[i], std::fabs(d[i]));
    }
    return Image2D(g, std::move(out));
  }
  ImageGrid en_face = g;
  en_face.height_px = static_cast<int>(volume.depth());
  en_face.origin_y_mm = 0.0;
  std::vector<float> out(en_face.pixel_count(), 0.0f);
  for (std::size_t s = 0; s < volume.depth(); ++s) {
    const Image2D& slice = volume.slices()[s];
    for (int y = 0; y < g.height_px; ++y) {
      for (int x = 0; x < g.width_px; ++x) {
        float& o = out[s * static_cast<std::size_t>(g.width_px) + x];
        o = std::max(o, std::fabs(slice.at(x, y)));
      }
    }
  }
  return Image2D(en_face, std::move(out));
}

ComponentLabels label_components(std::span<const std::uint8_t> in, int w, int h,
                                 int connectivity) {
  if (connectivity != 4 && connectivity != 8) {
    throw Error(ErrorCode::kInvalidArgument, "connectivity must be 4 or 8");
  }
  if (in.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
    throw Error(ErrorCode::kLengthMismatch, "foreground raster size mismatch");
  }
  DisjointSet sets(in.size());
  auto idx = [w](int x, int y) { return static_cast<std::uint32_t>(y * w + x); };

  // First pass: union with the already-visited neighbours.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (in[idx(x, y)] == 0) continue;
      if (x > 0 && in[idx(x - 1, y)] != 0) sets.unite(idx(x, y), idx(x - 1, y));
      if (y > 0 && in[idx(x, y - 1)] != 0) sets.unite(idx(x, y), idx(x, y - 1));
      if (connectivity == 8 && y > 0) {
        if (x > 0 && in[idx(x - 1, y - 1)] != 0) sets.unite(idx(x, y), idx(x - 1, y - 1));
        if (x + 1 < w && in[idx(x + 1, y - 1)] != 0) sets.unite(idx(x, y), idx(x + 1, y - 1));
      }
    }
  }
  // Second pass: dense labels in raster order of first appearance.
  ComponentLabels result;
  result.labels.assign(in.size(), 0);
  std::vector<std::uint32_t> root_label(in.size(), 0);
  for (std::uint32_t i = 0; i < in.size(); ++i) {
    if (in[i] == 0) continue;
    const std::uint32_t r = sets.find(i);
    if (root_label[r] == 0) root_label[r] = ++result.count;
    result.labels[i] = root_label[r];
  }
  return result;
}

LabelMask connected_components(const LabelMask& mask, int connectivity) {
  std::vector<std::uint8_t> fg(mask.labels().size());
  for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = mask.labels()[i] != 0;
  const ComponentLabels cc = label_components(fg, mask.width(), mask.height(), connectivity);
  if (cc.count > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument,
                "mask has " + std::to_string(cc.count) + " components, above the 65535 label limit");
  }
  std::vector<std::uint16_t> out(cc.labels.begin(), cc.labels.end());
  return LabelMask(mask.grid(), std::move(out), MaskKind::kMultilabel);
}

LabelMask fill_holes(const LabelMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const auto in = mask.labels();
  // Flood the background from the border (4-connected, the dual of 8-connected
  // foreground).
  std::vector<char> outside(in.size(), 0);
  std::vector<std::uint32_t> stack;
  auto push = [&](int x, int y) {
    const auto i = static_cast<std::uint32_t>(y * w + x);
    if (in[i] == 0 && !outside[i]) {
      outside[i] = 1;
      stack.push_back(i);
    }
  };
  for (int x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    if (x > 0) push(x - 1, y);
    if (x + 1 < w) push(x + 1, y);
    if (y > 0) push(x, y - 1);
    if (y + 1 < h) push(x, y + 1);
  }
  std::vector<std::uint16_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = outside[i] ? 0 : 1;
  return LabelMask(mask.grid(), std::move(out), MaskKind::kBinary);
}

std::vector<RegionStats> region_stats(const LabelMask& labels, const Image2D& image) {
  require_same_grid(labels.grid(), image.grid(), "region_stats");
  const int k = labels.num_labels();
  std::vector<double> sum(k + 1, 0.0), sx(k + 1, 0.0), sy(k + 1, 0.0);
  std::vector<std::size_t> count(k + 1, 0);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const int l = labels.at(x, y);
      if (l == 0) continue;
      ++count[l];
      sum[l] += std::fabs(image.at(x, y));
      sx[l] += x;
      sy[l] += y;
    }
  }
  const double px_area = labels.grid().pitch_mm * labels.grid().pitch_mm;
  std::vector<RegionStats> stats;
  stats.reserve(k);
  for (int l = 1; l <= k; ++l) {
    const auto n = static_cast<double>(count[l]);
    stats.push_back({l, count[l], n * px_area, sum[l] / n, {sx[l] / n, sy[l] / n}});
  }
  return stats;
}

void VesselCriteria::validate() const {
  if (!(area_min_mm2 >= 0.0) || !(area_max_mm2 >= area_min_mm2)) {
    throw Error(ErrorCode::kInvalidArgument, "vessel area band needs 0 <= min <= max");
  }
  if (!(intensity_rel_min >= 0.0 && intensity_rel_min <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "intensity_rel_min must lie in [0, 1]");
  }
}

LabelMask refine_vessels(const LabelMask& labels, const Image2D& image,
                         const VesselCriteria& criteria) {
  criteria.validate();
  // A binary mask is read as a single region.
  const LabelMask regions =
      labels.kind() == MaskKind::kMultilabel
          ? labels
          : LabelMask(labels.grid(),
                      std::vector<std::uint16_t>(labels.labels().begin(),
                                                 labels.labels().end()),
                      MaskKind::kMultilabel);
  const auto stats = region_stats(regions, image);
  const double floor_value = criteria.intensity_rel_min * image.max_abs();

  std::vector<std::uint16_t> remap(stats.size() + 1, 0);
  std::uint16_t next = 0;
  for (const RegionStats& s : stats) {
    const bool keep = s.area_mm2 >= criteria.area_min_mm2 &&
                      s.area_mm2 <= criteria.area_max_mm2 &&
                      s.mean_intensity >= floor_value;
    if (keep) remap[s.label] = ++next;
  }
  std::vector<std::uint16_t> out(regions.labels().size());
  const auto in = regions.labels();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = remap[in[i]];
  return LabelMask(regions.grid(), std::move(out), MaskKind::kMultilabel);
}

}  // namespace pasam::maskops

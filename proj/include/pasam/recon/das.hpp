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

#include <cmath>
#include <span>
#include <stop_token>
#include <utility>

#include "pasam/core/types.hpp"

namespace pasam::recon {

struct DasOptions {
  /// Worker threads for the pixel loop; 0 lets the runtime decide.
  int threads = 0;
  /// Checked once per image row; a stop request aborts with kCancelled.
  std::stop_token stop;
};

/// Linear interpolation of a channel at flight time tau_s. Times before the
/// first sample or past the last one read as 0.
inline double sample_channel(std::span<const float> row, double tau_s,
                             double fs_hz, double t0_s) {
  const double u = (tau_s - t0_s) * fs_hz;
  const double last = static_cast<double>(row.size()) - 1.0;
  if (!(u >= 0.0 && u <= last)) return 0.0;
  const double base = std::floor(u);
  const auto k = static_cast<std::size_t>(base);
  const double frac = u - base;
  if (frac == 0.0) return row[k];
  return (1.0 - frac) * row[k] + frac * row[k + 1];
}

/// Per-pixel delay provider for das_with_model.
class FlightTimeModel {
 public:
  virtual ~FlightTimeModel() = default;
  /// Called once per pixel; fills `out[i]` with the delay to element i.
  virtual void delays(Point2 pixel, std::span<double> out) const = 0;
};

/// Delay-and-sum with unit weights and no apodization. Channels are
/// accumulated in index order per pixel, so the output is bit-identical for
/// any thread count.
Image2D das_with_model(const ChannelData& data, std::size_t n_elements,
                       const ImageGrid& grid, const FlightTimeModel& model,
                       const DasOptions& options = {});

/// I(p) = sum_i sample_channel(row_i, |p - e_i| / c).
Image2D das_reconstruct(const ChannelData& data, const ArrayGeometry& geometry,
                        const ImageGrid& grid, double c_m_s,
                        const DasOptions& options = {});

/// Sparse-to-dense duplication: new rows 2k and 2k+1 are copies of old row
/// k. The dense geometry must have exactly twice as many elements.
std::pair<ChannelData, ArrayGeometry> expand_sparse_channels(
    const ChannelData& data, const ArrayGeometry& dense_geometry);

}  // namespace pasam::recon

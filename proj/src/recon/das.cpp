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

#include "pasam/recon/das.hpp"

#include <atomic>
#include <vector>

#include "pasam/core/acoustics.hpp"
#include "pasam/core/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pasam::recon {
namespace {

class UniformSpeed final : public FlightTimeModel {
 public:
  UniformSpeed(const ArrayGeometry& geometry, double c_m_s)
      : elements_(geometry.elements()), c_(c_m_s) {}

  void delays(Point2 pixel, std::span<double> out) const override {
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      out[i] = flight_time_s(distance_mm(pixel, elements_[i]), c_);
    }
  }

 private:
  std::span<const Point2> elements_;
  double c_;
};

}  // namespace

Image2D das_with_model(const ChannelData& data, std::size_t n_elements,
                       const ImageGrid& grid, const FlightTimeModel& model,
                       const DasOptions& options) {
  grid.validate();
  if (static_cast<std::size_t>(data.n_channels()) != n_elements) {
    throw Error(ErrorCode::kChannelMismatch,
                "channel data has " + std::to_string(data.n_channels()) +
                    " channels but geometry has " + std::to_string(n_elements) +
                    " elements");
  }
  const int width = grid.width_px;
  const int height = grid.height_px;
  const auto n_ch = static_cast<std::size_t>(data.n_channels());
  const double fs = data.fs_hz();
  const double t0 = data.t0_s();
  std::vector<float> out(grid.pixel_count(), 0.0f);
  std::atomic<bool> cancelled{false};
#ifdef _OPENMP
  const int n_threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#endif

#pragma omp parallel num_threads(n_threads)
  {
    std::vector<double> tau(n_ch);
#pragma omp for schedule(dynamic, 4)
    for (int y = 0; y < height; ++y) {
      if (cancelled.load(std::memory_order_relaxed)) continue;
      if (options.stop.stop_requested()) {
        cancelled.store(true, std::memory_order_relaxed);
        continue;
      }
      for (int x = 0; x < width; ++x) {
        model.delays(pixel_to_world(x, y, grid), tau);
        double sum = 0.0;
        for (std::size_t i = 0; i < n_ch; ++i) {
          sum += sample_channel(data.row(static_cast<int>(i)), tau[i], fs, t0);
        }
        out[static_cast<std::size_t>(y) * width + x] = static_cast<float>(sum);
      }
    }
  }
  if (cancelled.load()) {
    throw Error(ErrorCode::kCancelled, "reconstruction cancelled");
  }
  return Image2D(grid, std::move(out));
}

Image2D das_reconstruct(const ChannelData& data, const ArrayGeometry& geometry,
                        const ImageGrid& grid, double c_m_s,
                        const DasOptions& options) {
  if (!(c_m_s > 0.0) || !std::isfinite(c_m_s)) {
    throw Error(ErrorCode::kInvalidArgument, "speed of sound must be > 0");
  }
  const UniformSpeed model(geometry, c_m_s);
  return das_with_model(data, geometry.size(), grid, model, options);
}

std::pair<ChannelData, ArrayGeometry> expand_sparse_channels(
    const ChannelData& data, const ArrayGeometry& dense_geometry) {
  const auto n = static_cast<std::size_t>(data.n_channels());
  if (dense_geometry.size() != 2 * n) {
    throw Error(ErrorCode::kChannelMismatch,
                "dense geometry has " + std::to_string(dense_geometry.size()) +
                    " elements, expected 2 x " + std::to_string(n));
  }
  const auto ns = static_cast<std::size_t>(data.n_samples());
  std::vector<float> samples(2 * n * ns);
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = data.row(static_cast<int>(k));
    std::copy(row.begin(), row.end(), samples.begin() + (2 * k) * ns);
    std::copy(row.begin(), row.end(), samples.begin() + (2 * k + 1) * ns);
  }
  ChannelData dense(static_cast<int>(2 * n), data.n_samples(), data.fs_hz(),
                    data.t0_s(), std::move(samples));
  dense.set_geometry_descriptor(dense_geometry.descriptor());
  return {std::move(dense), dense_geometry};
}

}  // namespace pasam::recon

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
#include <utility>
#include <vector>

#include "pasam/core/types.hpp"

namespace pasam::forward {

struct Source {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double amplitude = 1.0;
};

struct Phantom {
  std::vector<Source> sources;

  void validate() const;
};

/// Appends point sources spaced roughly `spacing_mm` apart along the
/// ellipse outline; a stand-in for the skin layer of an imaged body.
void add_ellipse_shell(Phantom& phantom, const Ellipse& outline,
                       double spacing_mm, double amplitude);

enum class MediumMode { kUniform, kDual };

struct MediumModel {
  MediumMode mode = MediumMode::kUniform;
  double c_out_m_s = 1500.0;
  double c_in_m_s = 1500.0;
  std::optional<Ellipse> boundary;

  static MediumModel uniform(double c_m_s);
  static MediumModel dual(double c_in_m_s, double c_out_m_s, const Ellipse& boundary);

  void validate() const;
  /// Straight-ray flight time from p to q in this medium.
  double flight_time(Point2 p, Point2 q) const;
};

/// Width of the derivative-of-Gaussian pulse, 1 / (2 pi fc).
double wavelet_sigma(double fc_hz);

/// Bipolar pulse -(t/sigma) exp(-t^2 / 2 sigma^2) sqrt(e), peak |w| = 1 at
/// t = -/+ sigma, odd in t.
double wavelet(double t_s, double fc_hz);

struct SimulateOptions {
  double fc_hz = 5e6;
  double t0_s = 0.0;
  /// 1/sqrt(distance_mm) spreading; off keeps peak-location oracles exact.
  bool distance_decay = false;
  /// When set, every source must fall inside this grid's extent.
  std::optional<ImageGrid> extent;
  int threads = 0;
};

/// samples[i][k] = sum_s A_s * wavelet(t0 + k/fs - tau(s, e_i)).
ChannelData simulate(const Phantom& phantom, const ArrayGeometry& geometry,
                     const MediumModel& medium, double fs_hz, int n_samples,
                     const SimulateOptions& options = {});

/// Keeps the listed channels (strictly increasing) and their elements.
std::pair<ChannelData, ArrayGeometry> subset_channels(
    const ChannelData& data, const ArrayGeometry& geometry,
    std::span<const std::size_t> indices);

/// Indices first, first+step, ... below n.
std::vector<std::size_t> strided_indices(std::size_t n, std::size_t step,
                                         std::size_t first = 0);

/// Additive white Gaussian noise with std = max|signal| / snr.
ChannelData add_gaussian_noise(const ChannelData& data, double snr,
                               std::uint64_t seed);

}  // namespace pasam::forward

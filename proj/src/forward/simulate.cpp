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

#include "pasam/forward/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pasam/core/acoustics.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/geometry.hpp"
#include "pasam/dualsos/tof.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pasam::forward {
namespace {

// Beyond 8 sigma the pulse is below 1e-12 of its peak.
constexpr double kSupportSigmas = 8.0;
constexpr double kRecordSigmas = 6.0;

void check_speed(double c, const char* name) {
  if (!(c >= 1000.0 && c <= 2000.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must lie in [1000, 2000] m/s");
  }
}

}  // namespace

void Phantom::validate() const {
  if (sources.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "phantom needs at least one source");
  }
  for (const Source& s : sources) {
    if (!std::isfinite(s.x_mm) || !std::isfinite(s.y_mm) ||
        !std::isfinite(s.amplitude) || !(s.amplitude > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "phantom sources need finite positions and positive amplitudes");
    }
  }
}

void add_ellipse_shell(Phantom& phantom, const Ellipse& outline,
                       double spacing_mm, double amplitude) {
  outline.validate();
  if (!(spacing_mm > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "shell spacing must be > 0");
  }
  // Ramanujan's perimeter approximation sets the point count.
  const double a = outline.a_mm, b = outline.b_mm;
  const double h = (a - b) * (a - b) / ((a + b) * (a + b));
  const double perimeter =
      std::numbers::pi * (a + b) * (1.0 + 3.0 * h / (10.0 + std::sqrt(4.0 - 3.0 * h)));
  const int n = std::max(8, static_cast<int>(std::ceil(perimeter / spacing_mm)));
  const double c = std::cos(outline.theta_rad), s = std::sin(outline.theta_rad);
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    const double u = a * std::cos(phi), v = b * std::sin(phi);
    phantom.sources.push_back(
        {outline.cx_mm + c * u - s * v, outline.cy_mm + s * u + c * v, amplitude});
  }
}

MediumModel MediumModel::uniform(double c_m_s) {
  MediumModel m;
  m.mode = MediumMode::kUniform;
  m.c_out_m_s = c_m_s;
  m.c_in_m_s = c_m_s;
  return m;
}

MediumModel MediumModel::dual(double c_in_m_s, double c_out_m_s,
                              const Ellipse& boundary) {
  MediumModel m;
  m.mode = MediumMode::kDual;
  m.c_in_m_s = c_in_m_s;
  m.c_out_m_s = c_out_m_s;
  m.boundary = boundary;
  return m;
}

void MediumModel::validate() const {
  check_speed(c_out_m_s, "c_out_m_s");
  if (mode == MediumMode::kDual) {
    check_speed(c_in_m_s, "c_in_m_s");
    if (!boundary) {
      throw Error(ErrorCode::kInvalidArgument, "dual medium requires a boundary ellipse");
    }
    boundary->validate();
  }
}

double MediumModel::flight_time(Point2 p, Point2 q) const {
  if (mode == MediumMode::kUniform) {
    return flight_time_s(distance_mm(p, q), c_out_m_s);
  }
  return dualsos::tof_dual(p, q, *boundary, c_in_m_s, c_out_m_s);
}

double wavelet_sigma(double fc_hz) { return 1.0 / (2.0 * std::numbers::pi * fc_hz); }

double wavelet(double t_s, double fc_hz) {
  const double sigma = wavelet_sigma(fc_hz);
  const double r = t_s / sigma;
  return -r * std::exp(0.5 - 0.5 * r * r);
}

ChannelData simulate(const Phantom& phantom, const ArrayGeometry& geometry,
                     const MediumModel& medium, double fs_hz, int n_samples,
                     const SimulateOptions& options) {
  phantom.validate();
  medium.validate();
  if (!(fs_hz > 0.0) || n_samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need fs_hz > 0 and n_samples >= 1");
  }
  if (!(options.fc_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "center frequency must be > 0");
  }
  if (options.extent) {
    for (const Source& s : phantom.sources) {
      if (!options.extent->contains_world({s.x_mm, s.y_mm})) {
        std::ostringstream os;
        os << "source (" << s.x_mm << ", " << s.y_mm
           << ") mm lies outside the reconstruction grid";
        throw Error(ErrorCode::kSourceOutsideGrid, os.str());
      }
    }
  }

  const std::size_t n_ch = geometry.size();
  const std::size_t n_src = phantom.sources.size();
  const double sigma = wavelet_sigma(options.fc_hz);
  const double t_last = options.t0_s + (n_samples - 1) / fs_hz;

  // Flight times first: also used for the record-length check.
  std::vector<double> tau(n_ch * n_src);
  for (std::size_t i = 0; i < n_ch; ++i) {
    for (std::size_t s = 0; s < n_src; ++s) {
      const Source& src = phantom.sources[s];
      tau[i * n_src + s] = medium.flight_time({src.x_mm, src.y_mm}, geometry[i]);
    }
  }
  const double tau_max = *std::max_element(tau.begin(), tau.end());
  if (tau_max + kRecordSigmas * sigma > t_last) {
    std::ostringstream os;
    os << "record too short: farthest arrival " << tau_max * 1e6 << " us plus pulse "
       << "tail needs " << std::ceil((tau_max + kRecordSigmas * sigma - options.t0_s) * fs_hz) + 1
       << " samples, have " << n_samples;
    throw Error(ErrorCode::kRecordTooShort, os.str());
  }

  std::vector<float> samples(n_ch * static_cast<std::size_t>(n_samples));
#ifdef _OPENMP
  const int n_threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#endif
#pragma omp parallel num_threads(n_threads)
  {
    std::vector<double> acc(static_cast<std::size_t>(n_samples));
#pragma omp for schedule(static)
    for (long li = 0; li < static_cast<long>(n_ch); ++li) {
      const auto i = static_cast<std::size_t>(li);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t s = 0; s < n_src; ++s) {
        const Source& src = phantom.sources[s];
        const double t = tau[i * n_src + s];
        double amp = src.amplitude;
        if (options.distance_decay) {
          amp /= std::sqrt(std::max(distance_mm({src.x_mm, src.y_mm}, geometry[i]), 1e-6));
        }
        const double k_lo = std::ceil((t - kSupportSigmas * sigma - options.t0_s) * fs_hz);
        const double k_hi = std::floor((t + kSupportSigmas * sigma - options.t0_s) * fs_hz);
        const long first = std::max(0L, static_cast<long>(k_lo));
        const long last = std::min<long>(n_samples - 1, static_cast<long>(k_hi));
        for (long k = first; k <= last; ++k) {
          acc[static_cast<std::size_t>(k)] +=
              amp * wavelet(options.t0_s + k / fs_hz - t, options.fc_hz);
        }
      }
      float* row = samples.data() + i * static_cast<std::size_t>(n_samples);
      for (int k = 0; k < n_samples; ++k) row[k] = static_cast<float>(acc[k]);
    }
  }
  ChannelData data(static_cast<int>(n_ch), n_samples, fs_hz, options.t0_s,
                   std::move(samples));
  data.set_geometry_descriptor(geometry.descriptor());
  return data;
}

std::pair<ChannelData, ArrayGeometry> subset_channels(
    const ChannelData& data, const ArrayGeometry& geometry,
    std::span<const std::size_t> indices) {
  if (static_cast<std::size_t>(data.n_channels()) != geometry.size()) {
    throw Error(ErrorCode::kChannelMismatch,
                "channel data and geometry disagree on channel count");
  }
  if (indices.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "subset needs at least one index");
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= geometry.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "subset index " + std::to_string(indices[k]) + " out of range");
    }
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "subset indices must be strictly increasing");
    }
  }
  const auto ns = static_cast<std::size_t>(data.n_samples());
  std::vector<float> samples;
  samples.reserve(indices.size() * ns);
  std::vector<Point2> elements;
  elements.reserve(indices.size());
  for (std::size_t idx : indices) {
    const auto row = data.row(static_cast<int>(idx));
    samples.insert(samples.end(), row.begin(), row.end());
    elements.push_back(geometry[idx]);
  }
  ArrayGeometry sub(std::move(elements), subset_descriptor(geometry.descriptor(), indices));
  ChannelData out(static_cast<int>(indices.size()), data.n_samples(), data.fs_hz(),
                  data.t0_s(), std::move(samples));
  out.set_geometry_descriptor(sub.descriptor());
  return {std::move(out), std::move(sub)};
}

std::vector<std::size_t> strided_indices(std::size_t n, std::size_t step,
                                         std::size_t first) {
  if (step == 0) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  std::vector<std::size_t> out;
  for (std::size_t i = first; i < n; i += step) out.push_back(i);
  return out;
}

ChannelData add_gaussian_noise(const ChannelData& data, double snr,
                               std::uint64_t seed) {
  if (!(snr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "SNR must be > 0");
  float peak = 0.0f;
  for (float v : data.samples()) peak = std::max(peak, std::fabs(v));
  const double std_dev = peak / snr;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std_dev > 0.0 ? std_dev : 1.0);
  std::vector<float> samples(data.samples().begin(), data.samples().end());
  if (std_dev > 0.0) {
    for (float& v : samples) v = static_cast<float>(v + noise(rng));
  }
  ChannelData out(data.n_channels(), data.n_samples(), data.fs_hz(), data.t0_s(),
                  std::move(samples));
  out.set_geometry_descriptor(data.geometry_descriptor());
  return out;
}

}  // namespace pasam::forward

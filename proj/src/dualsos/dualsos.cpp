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

#include "pasam/dualsos/dualsos.hpp"

#include <cmath>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "pasam/core/container.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/text.hpp"
#include "pasam/dualsos/tof.hpp"

namespace pasam::dualsos {
namespace {

class DualSpeed final : public recon::FlightTimeModel {
 public:
  DualSpeed(const ArrayGeometry& geometry, const Ellipse& boundary, double c_in,
            double c_out)
      : elements_(geometry.elements()), frame_(boundary), c_in_(c_in), c_out_(c_out) {
    unit_elements_.reserve(elements_.size());
    for (const Point2& e : elements_) unit_elements_.push_back(frame_.to_unit(e));
  }

  void delays(Point2 pixel, std::span<double> out) const override {
    const Point2 up = frame_.to_unit(pixel);
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      out[i] = tof_dual(pixel, up, elements_[i], unit_elements_[i], c_in_, c_out_);
    }
  }

 private:
  std::span<const Point2> elements_;
  std::vector<Point2> unit_elements_;
  EllipseFrame frame_;
  double c_in_, c_out_;
};

}  // namespace

Ellipse fit_ellipse_from_mask(const LabelMask& mask) {
  if (mask.kind() != MaskKind::kBinary) {
    throw Error(ErrorCode::kInvalidArgument, "ellipse fit needs a binary mask");
  }
  // Integer moments keep the covariance exactly invariant to translation.
  __int128 n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y) == 0) continue;
      ++n;
      sx += x;
      sy += y;
      sxx += static_cast<__int128>(x) * x;
      syy += static_cast<__int128>(y) * y;
      sxy += static_cast<__int128>(x) * y;
    }
  }
  if (n < 5) {
    throw Error(ErrorCode::kTooFewPixels,
                "ellipse fit needs >= 5 foreground pixels, mask has " +
                    std::to_string(static_cast<long long>(n)));
  }
  const double nd = static_cast<double>(n);
  const double n2 = nd * nd;
  const double cxx = static_cast<double>(n * sxx - sx * sx) / n2;
  const double cyy = static_cast<double>(n * syy - sy * sy) / n2;
  const double cxy = static_cast<double>(n * sxy - sx * sy) / n2;

  const double mean = 0.5 * (cxx + cyy);
  const double half_diff = 0.5 * (cxx - cyy);
  const double radius = std::sqrt(half_diff * half_diff + cxy * cxy);
  const double l1 = mean + radius;
  const double l2 = mean - radius;
  if (!(l2 > 1e-9 * std::max(l1, 1.0))) {
    throw Error(ErrorCode::kDegenerateMask,
                "mask foreground is collinear; no ellipse fits it");
  }

  const ImageGrid& g = mask.grid();
  const Point2 center = pixel_to_world(static_cast<double>(sx) / nd,
                                       static_cast<double>(sy) / nd, g);
  const double theta = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  Ellipse e;
  e.cx_mm = center.x;
  e.cy_mm = center.y;
  e.a_mm = 2.0 * std::sqrt(l1) * g.pitch_mm;
  e.b_mm = 2.0 * std::sqrt(l2) * g.pitch_mm;
  e.theta_rad = fold_axis_angle(theta);
  e.validate();
  return e;
}

Image2D das_dual_sos(const ChannelData& data, const ArrayGeometry& geometry,
                     const ImageGrid& grid, const Ellipse& boundary,
                     double c_in_m_s, double c_out_m_s,
                     const recon::DasOptions& options) {
  boundary.validate();
  if (!(c_in_m_s > 0.0) || !(c_out_m_s > 0.0) || !std::isfinite(c_in_m_s) ||
      !std::isfinite(c_out_m_s)) {
    throw Error(ErrorCode::kInvalidArgument, "speeds of sound must be > 0");
  }
  const DualSpeed model(geometry, boundary, c_in_m_s, c_out_m_s);
  return recon::das_with_model(data, geometry.size(), grid, model, options);
}

std::string format_ellipse(const Ellipse& e) {
  return "cx: " + format_double(e.cx_mm) + "\ncy: " + format_double(e.cy_mm) +
         "\na: " + format_double(e.a_mm) + "\nb: " + format_double(e.b_mm) +
         "\ntheta: " + format_double(e.theta_rad) + "\n";
}

Ellipse parse_ellipse(const std::string& text) {
  try {
    const YAML::Node doc = YAML::Load(text);
    for (const char* key : {"cx", "cy", "a", "b", "theta"}) {
      if (!doc[key]) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string("ellipse document missing '") + key + "'");
      }
    }
    Ellipse e{parse_double(doc["cx"].Scalar()), parse_double(doc["cy"].Scalar()),
              parse_double(doc["a"].Scalar()), parse_double(doc["b"].Scalar()),
              parse_double(doc["theta"].Scalar())};
    e.validate();
    return e;
  } catch (const YAML::Exception& ex) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("bad ellipse document: ") + ex.what());
  }
}

void write_ellipse_file(const Ellipse& e, const std::filesystem::path& path) {
  write_file_bytes(path, format_ellipse(e));
}

Ellipse read_ellipse_file(const std::filesystem::path& path) {
  return parse_ellipse(read_file_bytes(path));
}

}  // namespace pasam::dualsos

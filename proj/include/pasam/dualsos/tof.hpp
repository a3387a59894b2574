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

#include "pasam/core/types.hpp"

namespace pasam::dualsos {

/// Maps world points into the unit-circle frame of an ellipse: translate by
/// -center, rotate by -theta, scale the axes by 1/a and 1/b.
class EllipseFrame {
 public:
  explicit EllipseFrame(const Ellipse& e);

  Point2 to_unit(Point2 p) const {
    const double dx = p.x - cx_;
    const double dy = p.y - cy_;
    return {(cos_ * dx + sin_ * dy) * inv_a_, (-sin_ * dx + cos_ * dy) * inv_b_};
  }

 private:
  double cx_, cy_, cos_, sin_, inv_a_, inv_b_;
};

/// Length of segment p0->p1 lying inside the ellipse, given both endpoints
/// and their unit-frame images. The endpoints are put in a canonical order
/// first, so swapping them gives a bit-identical result.
double inside_length(Point2 p0, Point2 u0, Point2 p1, Point2 u1);

double inside_length(Point2 p0, Point2 p1, const Ellipse& e);

/// Two-media straight-ray time of flight in seconds. With c_in == c_out the
/// result is exactly flight_time_s(distance_mm(p, q), c_out).
double tof_dual(Point2 p, Point2 q, const Ellipse& e, double c_in_m_s,
                double c_out_m_s);

/// Same as tof_dual with caller-supplied unit-frame images of p and q.
double tof_dual(Point2 p, Point2 up, Point2 q, Point2 uq, double c_in_m_s,
                double c_out_m_s);

}  // namespace pasam::dualsos

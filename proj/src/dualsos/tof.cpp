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

#include "pasam/dualsos/tof.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "pasam/core/acoustics.hpp"

namespace pasam::dualsos {

EllipseFrame::EllipseFrame(const Ellipse& e)
    : cx_(e.cx_mm), cy_(e.cy_mm), cos_(std::cos(e.theta_rad)),
      sin_(std::sin(e.theta_rad)), inv_a_(1.0 / e.a_mm), inv_b_(1.0 / e.b_mm) {}

double inside_length(Point2 p0, Point2 u0, Point2 p1, Point2 u1) {
  if (p1.x < p0.x || (p1.x == p0.x && p1.y < p0.y)) {
    std::swap(p0, p1);
    std::swap(u0, u1);
  }
  const double length = distance_mm(p0, p1);
  const double dx = u1.x - u0.x;
  const double dy = u1.y - u0.y;
  const double qa = dx * dx + dy * dy;
  if (!(qa > 0.0)) return 0.0;
  const double qb = 2.0 * (u0.x * dx + u0.y * dy);
  const double qc = u0.x * u0.x + u0.y * u0.y - 1.0;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (!(disc > 0.0)) return 0.0;

  // Cancellation-free roots of qa t^2 + qb t + qc = 0.
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  double t1 = q / qa;
  double t2 = qc / q;
  if (t1 > t2) std::swap(t1, t2);

  const double lo = std::max(t1, 0.0);
  const double hi = std::min(t2, 1.0);
  if (!(hi > lo)) return 0.0;
  return std::min((hi - lo) * length, length);
}

double inside_length(Point2 p0, Point2 p1, const Ellipse& e) {
  const EllipseFrame frame(e);
  return inside_length(p0, frame.to_unit(p0), p1, frame.to_unit(p1));
}

double tof_dual(Point2 p, Point2 up, Point2 q, Point2 uq, double c_in_m_s,
                double c_out_m_s) {
  const double total = distance_mm(p, q);
  if (c_in_m_s == c_out_m_s) return flight_time_s(total, c_out_m_s);
  const double inside = inside_length(p, up, q, uq);
  return flight_time_s(inside, c_in_m_s) + flight_time_s(total - inside, c_out_m_s);
}

double tof_dual(Point2 p, Point2 q, const Ellipse& e, double c_in_m_s,
                double c_out_m_s) {
  const EllipseFrame frame(e);
  return tof_dual(p, frame.to_unit(p), q, frame.to_unit(q), c_in_m_s, c_out_m_s);
}

}  // namespace pasam::dualsos

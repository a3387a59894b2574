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

#include "pasam/core/types.hpp"

namespace pasam {

/// Euclidean distance in mm. Symmetric bit-for-bit in its arguments.
inline double distance_mm(Point2 p, Point2 q) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Straight-ray travel time in seconds for a path in mm at c in m/s.
inline double flight_time_s(double length_mm, double c_m_s) {
  return length_mm * 1e-3 / c_m_s;
}

}  // namespace pasam

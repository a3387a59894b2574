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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <doctest.h>

#include "expect.hpp"
#include "pasam/core/acoustics.hpp"
#include "pasam/core/geometry.hpp"
#include "pasam/dualsos/dualsos.hpp"
#include "pasam/dualsos/tof.hpp"
#include "pasam/forward/simulate.hpp"
#include "pasam/recon/das.hpp"
#include "scenes.hpp"

using namespace pasam;
using namespace pasam::dualsos;
using pasam::testing::code_of;
using pasam::testing::rasterize_ellipse;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double axis_angle_diff(double t1, double t2) {
  double d = std::fmod(std::fabs(t1 - t2), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

Point2 rigid(Point2 p, double phi, Point2 shift) {
  return {std::cos(phi) * p.x - std::sin(phi) * p.y + shift.x,
          std::sin(phi) * p.x + std::cos(phi) * p.y + shift.y};
}

}  // namespace

TEST_CASE("inside length closed forms") {
  const Ellipse circle = make_ellipse(1, 2, 5, 5, 0);
  CHECK(inside_length({-20, 30}, {20, 30}, circle) == 0.0);
  CHECK(inside_length({-10, 2}, {10, 2}, circle) == doctest::Approx(10.0));
  CHECK(inside_length({1, -10}, {1, 10}, circle) == doctest::Approx(10.0));
  CHECK(inside_length({0, 2}, {2, 2.5}, circle) == doctest::Approx(std::hypot(2.0, 0.5)));
  // From the center to a point outside: one radius.
  CHECK(inside_length({1, 2}, {1, 40}, circle) == doctest::Approx(5.0));
  const Ellipse e = make_ellipse(0, 0, 12, 8, 0);
  CHECK(inside_length({-30, 0}, {30, 0}, e) == doctest::Approx(24.0));
  CHECK(inside_length({0, -30}, {0, 30}, e) == doctest::Approx(16.0));
}

TEST_CASE("inside length agrees with the sampling oracle") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(-30, 30), axis(2, 20), ang(-4, 4), u01(0, 1);
  constexpr int kSamples = 100000;
  for (int k = 0; k < 500; ++k) {
    const double a = axis(rng);
    const Ellipse e = make_ellipse(0.3 * pos(rng), 0.3 * pos(rng), a, a * (0.2 + 0.8 * u01(rng)), ang(rng));
    const Point2 p0{pos(rng), pos(rng)}, p1{pos(rng), pos(rng)};
    const double length = distance_mm(p0, p1);
    const double ref = testing::sampled_inside_length(p0, p1, e.cx_mm, e.cy_mm, e.a_mm, e.b_mm,
                                                      e.theta_rad, kSamples);
    const double got = inside_length(p0, p1, e);
    const double floor = std::max(1e-4, 2.0 * length / kSamples);
    CHECK(std::fabs(got - ref) <= std::max(1e-3 * ref, floor));
  }
}

TEST_CASE("inside length bounds and convexity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-25, 25);
  const Ellipse e = make_ellipse(1, -1, 14, 6, 0.6);
  for (int k = 0; k < 5000; ++k) {
    const Point2 p0{pos(rng), pos(rng)}, p1{pos(rng), pos(rng)};
    const double len = inside_length(p0, p1, e);
    const double full = distance_mm(p0, p1);
    CHECK(len >= 0.0);
    CHECK(len <= full * (1 + 1e-12));
    if (e.contains(p0) && e.contains(p1)) CHECK(len == doctest::Approx(full));
    else CHECK(len < full - 1e-9);
  }
}

TEST_CASE("inside length is invariant under joint rigid motion") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-25, 25), ang(-3, 3);
  for (int k = 0; k < 2000; ++k) {
    const Ellipse e = make_ellipse(pos(rng) * 0.2, pos(rng) * 0.2, 13, 7, ang(rng));
    const Point2 p0{pos(rng), pos(rng)}, p1{pos(rng), pos(rng)};
    const double phi = ang(rng);
    const Point2 shift{pos(rng), pos(rng)};
    const Point2 c = rigid({e.cx_mm, e.cy_mm}, phi, shift);
    const Ellipse moved = make_ellipse(c.x, c.y, e.a_mm, e.b_mm, e.theta_rad + phi);
    CHECK(std::fabs(inside_length(p0, p1, e) -
                    inside_length(rigid(p0, phi, shift), rigid(p1, phi, shift), moved)) <= 1e-9);
  }
}

TEST_CASE("dual flight time closed forms and symmetry") {
  const Ellipse circle = make_ellipse(0, 0, 10, 10, 0);
  const Point2 center{0, 0}, element{50, 0};
  CHECK(tof_dual(center, element, circle, 1560, 1500) ==
        doctest::Approx(10e-3 / 1560 + 40e-3 / 1500).epsilon(1e-12));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(-60, 60);
  const Ellipse e = make_ellipse(2, 1, 12, 8, 20 * kDeg);
  for (int k = 0; k < 10000; ++k) {
    const Point2 p{pos(rng), pos(rng)}, q{pos(rng), pos(rng)};
    CHECK(tof_dual(p, q, e, 1560, 1500) == tof_dual(q, p, e, 1560, 1500));
    CHECK(tof_dual(p, q, e, 1530, 1530) == flight_time_s(distance_mm(p, q), 1530));
  }
}

namespace {

// Distance from the ellipse center to the ray's supporting line, in the
// ellipse's unit-circle frame; near 1 the ray is close to tangent.
double unit_frame_line_distance(Point2 p, Point2 q, const Ellipse& e) {
  const EllipseFrame f(e);
  const Point2 a = f.to_unit(p), b = f.to_unit(q);
  return std::fabs(a.x * b.y - a.y * b.x) / std::hypot(b.x - a.x, b.y - a.y);
}

}  // namespace

TEST_CASE("dual flight time is Lipschitz away from tangent rays") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(-20, 20), dir(-1, 1);
  const Ellipse e = make_ellipse(0, 0, 12, 8, 0.4);
  const ArrayGeometry ring = make_ring(256, 50.0);
  int inside = 0, missing = 0, crossing = 0;
  for (int k = 0; k < 20000; ++k) {
    const Point2 p{pos(rng), pos(rng)};
    const Point2 el = ring[rng() % 256];
    const double d = 1e-3;
    const double phi = dir(rng) * std::numbers::pi;
    const Point2 p2{p.x + d * std::cos(phi), p.y + d * std::sin(phi)};
    const double h = unit_frame_line_distance(p, el, e);
    if (std::fabs(h - 1.0) < 0.1) continue;
    const double change = std::fabs(tof_dual(p, el, e, 1560, 1500) - tof_dual(p2, el, e, 1560, 1500));
    const double bound = flight_time_s(d, 1500) * (1 + 1e-6);
    if (h > 1.0) {
      ++missing;
      CHECK(change <= bound);
    } else if (e.contains(p)) {
      ++inside;
      CHECK(change <= bound);
    } else {
      // Outside the body the full outside-speed slope along the ray adds to
      // the chord's lateral change, so the slope can exceed 1 / c_out.
      ++crossing;
      CHECK(change <= 1.03 * bound);
    }
  }
  CHECK(inside > 1000);
  CHECK(missing > 1000);
  CHECK(crossing > 1000);
}

TEST_CASE("straight-ray flight time varies fastest on grazing rays") {
  // The inside chord grows like sqrt(1 - h) as a ray turns off a tangent, so a
  // small sideways step can change the delay by more than step / c_out.
  const Ellipse circle = make_ellipse(0, 0, 10, 10, 0);
  const Point2 el{-50, 10};
  const Point2 p{50, 10.0005};
  const Point2 p2{50, 9.9995};
  const double dt = std::fabs(tof_dual(p, el, circle, 1560, 1500) - tof_dual(p2, el, circle, 1560, 1500));
  CHECK(dt > flight_time_s(1e-3, 1500));
}

TEST_CASE("ellipse fit on a rasterized filled ellipse") {
  const ImageGrid grid = testing::centered_grid(1.5, -2.0, 300, 300);
  const Ellipse fit = fit_ellipse_from_mask(rasterize_ellipse(grid, 1.5, -2.0, 12, 8, 20 * kDeg));
  CHECK(fit.a_mm == doctest::Approx(12).epsilon(0.02));
  CHECK(fit.b_mm == doctest::Approx(8).epsilon(0.02));
  CHECK(std::hypot(fit.cx_mm - 1.5, fit.cy_mm + 2.0) <= 0.05);
  CHECK(axis_angle_diff(fit.theta_rad, 20 * kDeg) <= 1 * kDeg);
  CHECK(fit.theta_rad > -std::numbers::pi / 2);
  CHECK(fit.theta_rad <= std::numbers::pi / 2);
}

TEST_CASE("ellipse fit on a circle") {
  const ImageGrid grid = testing::centered_grid(0, 0, 200, 200);
  const Ellipse fit = fit_ellipse_from_mask(rasterize_ellipse(grid, 0.3, -0.2, 7, 7, 0));
  CHECK(fit.a_mm == doctest::Approx(7).epsilon(0.02));
  CHECK(fit.b_mm == doctest::Approx(7).epsilon(0.02));
  CHECK_NOTHROW(fit.validate());
}

TEST_CASE("ellipse fit is translation equivariant") {
  const ImageGrid grid{0, 0, 0.1, 260, 220};
  const LabelMask m = rasterize_ellipse(grid, 11, 10, 9, 5, 0.7);
  std::vector<std::uint16_t> shifted(grid.pixel_count(), 0);
  const int dx = 17, dy = -9;
  for (int y = 0; y < grid.height_px; ++y) {
    for (int x = 0; x < grid.width_px; ++x) {
      if (m.at(x, y)) shifted[std::size_t(y + dy) * grid.width_px + (x + dx)] = 1;
    }
  }
  const Ellipse a = fit_ellipse_from_mask(m);
  const Ellipse b = fit_ellipse_from_mask(LabelMask(grid, shifted, MaskKind::kBinary));
  CHECK(b.cx_mm - a.cx_mm == doctest::Approx(dx * 0.1).epsilon(1e-9));
  CHECK(b.cy_mm - a.cy_mm == doctest::Approx(dy * 0.1).epsilon(1e-9));
  CHECK(b.a_mm == doctest::Approx(a.a_mm).epsilon(1e-9));
  CHECK(b.b_mm == doctest::Approx(a.b_mm).epsilon(1e-9));
  CHECK(b.theta_rad == doctest::Approx(a.theta_rad).epsilon(1e-9));
}

TEST_CASE("ellipse fit is rotation consistent") {
  const ImageGrid grid = testing::centered_grid(0, 0, 300, 300);
  const Ellipse e0 = fit_ellipse_from_mask(rasterize_ellipse(grid, 0, 0, 11, 6, 0.3));
  const Ellipse e1 = fit_ellipse_from_mask(rasterize_ellipse(grid, 0, 0, 11, 6, 0.3 + std::numbers::pi / 2));
  CHECK(e1.a_mm == doctest::Approx(e0.a_mm).epsilon(0.02));
  CHECK(e1.b_mm == doctest::Approx(e0.b_mm).epsilon(0.02));
  CHECK(axis_angle_diff(e1.theta_rad, e0.theta_rad + std::numbers::pi / 2) <= 1 * kDeg);
}

TEST_CASE("ellipse fit errors") {
  const ImageGrid grid{0, 0, 0.1, 20, 20};
  std::vector<std::uint16_t> four(grid.pixel_count(), 0);
  for (int k = 0; k < 4; ++k) four[std::size_t(k) * 21] = 1;
  CHECK(code_of([&] { fit_ellipse_from_mask(LabelMask(grid, four, MaskKind::kBinary)); }) ==
        ErrorCode::kTooFewPixels);
  std::vector<std::uint16_t> line(grid.pixel_count(), 0);
  for (int k = 0; k < 15; ++k) line[std::size_t(k) * 21] = 1;
  CHECK(code_of([&] { fit_ellipse_from_mask(LabelMask(grid, line, MaskKind::kBinary)); }) ==
        ErrorCode::kDegenerateMask);
  CHECK(code_of([&] { fit_ellipse_from_mask(LabelMask(grid, line, MaskKind::kMultilabel)); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("dual reconstruction with equal speeds equals single speed") {
  const ArrayGeometry ring = make_ring(64, 50.0);
  const ChannelData d = forward::simulate(forward::Phantom{{{3, 1, 1}}}, ring,
                                          forward::MediumModel::uniform(1520), 40e6, 3000);
  const ImageGrid grid = testing::centered_grid(2, 1, 80, 60);
  const Ellipse e = make_ellipse(2, 1, 12, 8, 20 * kDeg);
  CHECK(das_dual_sos(d, ring, grid, e, 1520, 1520) == recon::das_reconstruct(d, ring, grid, 1520));
  CHECK(code_of([&] { das_dual_sos(d, make_ring(63, 50.0), grid, e, 1560, 1500); }) ==
        ErrorCode::kChannelMismatch);
  CHECK(code_of([&] { das_dual_sos(d, ring, grid, e, 0, 1500); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("dual reconstruction refocuses a source inside the body") {
  const ArrayGeometry ring = make_ring(256, 50.0);
  const Ellipse e = make_ellipse(2, 1, 12, 8, 20 * kDeg);
  // 2 mm inside the major-axis endpoint.
  const Point2 src{2 + 10 * std::cos(20 * kDeg), 1 + 10 * std::sin(20 * kDeg)};
  const ChannelData d = forward::simulate(forward::Phantom{{{src.x, src.y, 1}}}, ring,
                                          forward::MediumModel::dual(1560, 1500, e), 40e6, 4096);
  const ImageGrid grid = testing::centered_grid(src.x, src.y, 81, 81);
  const Image2D dual = das_dual_sos(d, ring, grid, e, 1560, 1500);
  const Image2D single = recon::das_reconstruct(d, ring, grid, 1500);
  const double err_dual = testing::peak_error_px(dual, testing::peak_near(dual, src, 1e9), src);
  const double err_single = testing::peak_error_px(single, testing::peak_near(single, src, 1e9), src);
  CHECK(err_dual <= 2.0);
  CHECK(err_dual < err_single);
}

TEST_CASE("ellipse document round-trips") {
  const Ellipse e = make_ellipse(1.25, -3.5, 12.0000001, 8, 0.3490658503988659);
  CHECK(parse_ellipse(format_ellipse(e)) == e);
  const auto path = std::filesystem::temp_directory_path() / "pasam_ellipse_rt.yaml";
  write_ellipse_file(e, path);
  CHECK(read_ellipse_file(path) == e);
  std::filesystem::remove(path);
  CHECK(parse_ellipse("cx: 0\ncy: 0\na: 3\nb: 2\ntheta: 0.1\n") == Ellipse{0, 0, 3, 2, 0.1});
  CHECK(code_of([] { parse_ellipse("cx: 0\ncy: 0\na: 3\nb: 2\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { parse_ellipse("cx: 0\ncy: 0\na: 2\nb: 3\ntheta: 0\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { parse_ellipse("cx: [\n"); }) == ErrorCode::kInvalidArgument);
}

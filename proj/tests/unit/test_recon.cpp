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
#include <random>
#include <stop_token>

#include <doctest.h>

#include "expect.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/geometry.hpp"
#include "pasam/forward/simulate.hpp"
#include "pasam/recon/das.hpp"
#include "scenes.hpp"

using namespace pasam;
using pasam::testing::code_of;
using namespace pasam::recon;
using pasam::testing::centered_grid;
using pasam::testing::peak_error_px;
using pasam::testing::peak_near;

namespace {

constexpr double kFs = 40e6;

ChannelData sim(const forward::Phantom& p, const ArrayGeometry& g, double c = 1500.0,
                int n = 4096) {
  return forward::simulate(p, g, forward::MediumModel::uniform(c), kFs, n);
}

// Straightforward per-pixel, per-channel reference.
std::vector<double> naive_das(const ChannelData& d, const ArrayGeometry& g, const ImageGrid& grid,
                              double c) {
  std::vector<double> out(grid.pixel_count());
  for (int y = 0; y < grid.height_px; ++y) {
    for (int x = 0; x < grid.width_px; ++x) {
      const double px = grid.origin_x_mm + x * grid.pitch_mm;
      const double py = grid.origin_y_mm + y * grid.pitch_mm;
      double acc = 0.0;
      for (int i = 0; i < d.n_channels(); ++i) {
        const double r_m = std::hypot(px - g[i].x, py - g[i].y) / 1000.0;
        const double u = (r_m / c - d.t0_s()) * d.fs_hz();
        if (u < 0 || u > d.n_samples() - 1) continue;
        const auto row = d.row(i);
        const int k = static_cast<int>(u);
        const double next = k + 1 < d.n_samples() ? row[k + 1] : row[k];
        acc += row[k] + (u - k) * (next - row[k]);
      }
      out[static_cast<std::size_t>(y) * grid.width_px + x] = acc;
    }
  }
  return out;
}

double max_abs_diff(const Image2D& a, const Image2D& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::fabs(double(a.data()[i]) - b.data()[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("channel sampling contract") {
  const std::vector<float> row = {0.0f, 1.0f, 4.0f};
  CHECK(sample_channel(row, 1.0 / kFs, kFs, 0.0) == 1.0);
  CHECK(sample_channel(row, 2.0 / kFs, kFs, 0.0) == 4.0);
  CHECK(sample_channel(row, 0.5 / kFs, kFs, 0.0) == doctest::Approx(0.5));
  CHECK(sample_channel(row, -0.1 / kFs, kFs, 0.0) == 0.0);
  CHECK(sample_channel(row, 3.0 / kFs, kFs, 0.0) == 0.0);
  CHECK(sample_channel(row, 1.5e-6 + 1.0 / kFs, kFs, 1.5e-6) == doctest::Approx(1.0));
}

TEST_CASE("delay-and-sum matches a naive reference") {
  const ArrayGeometry ring = make_ring(48, 30.0);
  forward::Phantom p{{{2, 1, 1}, {-4, 3, 0.7}}};
  const ChannelData d = sim(p, ring, 1500, 2500);
  const ImageGrid grid = centered_grid(0, 0, 60, 50, 0.2);
  const Image2D img = das_reconstruct(d, ring, grid, 1500);
  const auto ref = naive_das(d, ring, grid, 1500);
  double peak = 0.0, err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    peak = std::max(peak, std::fabs(ref[i]));
    err = std::max(err, std::fabs(ref[i] - img.data()[i]));
  }
  CHECK(peak > 1.0);
  CHECK(err <= 1e-6 * peak);
}

TEST_CASE("zero data reconstructs to zero") {
  const ArrayGeometry ring = make_ring(32, 50.0);
  const Image2D img = das_reconstruct(ChannelData(32, 2000, kFs), ring, centered_grid(0, 0, 40, 40), 1500);
  CHECK(img.max_abs() == 0.0f);
}

TEST_CASE("off-center point sources localize") {
  const ArrayGeometry ring = make_ring(256, 50.0);
  const Point2 src{6.0, -3.5};
  const ChannelData d = sim(forward::Phantom{{{src.x, src.y, 1}}}, ring);
  const Image2D img = das_reconstruct(d, ring, centered_grid(src.x, src.y, 200, 200), 1500);
  const auto pk = peak_near(img, src, 1e9);
  CHECK(peak_error_px(img, pk, src) <= 2.0);
}

TEST_CASE("a source at the exact ring center largely cancels") {
  // Element pairs at opposite angles see equal and opposite delay offsets, so
  // the odd pulse sums to near zero at and around the center.
  const ArrayGeometry ring = make_ring(256, 50.0);
  const ImageGrid grid = centered_grid(0, 0, 100, 100);
  const Image2D centered = das_reconstruct(sim(forward::Phantom{{{0, 0, 1}}}, ring), ring, grid, 1500);
  const ImageGrid grid2 = centered_grid(5, 2, 100, 100);
  const Image2D offset = das_reconstruct(sim(forward::Phantom{{{5, 2, 1}}}, ring), ring, grid2, 1500);
  CHECK(centered.max_abs() < 0.2f * offset.max_abs());
}

TEST_CASE("wrong speed of sound mislocalizes a radially offset source") {
  const ArrayGeometry ring = make_ring(256, 50.0);
  const Point2 src{10.0, 0.0};
  const ChannelData d = sim(forward::Phantom{{{src.x, src.y, 1}}}, ring);
  const ImageGrid grid = centered_grid(src.x, src.y, 160, 160);
  const Image2D right = das_reconstruct(d, ring, grid, 1500);
  const Image2D wrong = das_reconstruct(d, ring, grid, 1.05 * 1500);
  CHECK(peak_error_px(right, peak_near(right, src, 1e9), src) <= 2.0);
  CHECK(peak_error_px(wrong, peak_near(wrong, src, 1e9), src) > 2.0);
}

TEST_CASE("half-ring data keeps the main lobe on target") {
  const ArrayGeometry ring = make_ring(256, 50.0);
  std::vector<std::size_t> half(128);
  for (std::size_t i = 0; i < 128; ++i) half[i] = i;
  for (const Point2 src : {Point2{3, 8}, Point2{-6, 12}, Point2{8, 4}}) {
    const ChannelData d = sim(forward::Phantom{{{src.x, src.y, 1}}}, ring);
    const auto [hd, hg] = forward::subset_channels(d, ring, half);
    const Image2D img = das_reconstruct(hd, hg, centered_grid(src.x, src.y, 120, 120), 1500);
    CHECK(peak_error_px(img, peak_near(img, src, 1e9), src) <= 3.0);
  }
}

TEST_CASE("output is bit-identical across thread counts") {
  const ArrayGeometry ring = make_ring(128, 50.0);
  const ChannelData d = sim(forward::Phantom{{{1, 2, 1}, {-7, -3, 2}}}, ring);
  const ImageGrid grid = centered_grid(0, 0, 120, 90);
  DasOptions one, four;
  one.threads = 1;
  four.threads = 4;
  CHECK(das_reconstruct(d, ring, grid, 1500, one) == das_reconstruct(d, ring, grid, 1500, four));
}

TEST_CASE("reconstruction is linear in the channel data") {
  const ArrayGeometry ring = make_ring(64, 50.0);
  const ChannelData a = sim(forward::Phantom{{{3, 3, 1}}}, ring);
  const ChannelData b = sim(forward::Phantom{{{-5, 1, 1}}}, ring);
  std::vector<float> mix(a.samples().size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0f * a.samples()[i] - 0.5f * b.samples()[i];
  const ChannelData m(64, a.n_samples(), kFs, 0.0, mix);
  const ImageGrid grid = centered_grid(0, 2, 100, 60);
  const Image2D ia = das_reconstruct(a, ring, grid, 1500);
  const Image2D ib = das_reconstruct(b, ring, grid, 1500);
  const Image2D im = das_reconstruct(m, ring, grid, 1500);
  double err = 0.0;
  for (std::size_t i = 0; i < im.data().size(); ++i) {
    err = std::max(err, std::fabs(im.data()[i] - (2.0 * ia.data()[i] - 0.5 * ib.data()[i])));
  }
  CHECK(err <= 1e-6 * im.max_abs());
}

TEST_CASE("joint translation of phantom, array and grid leaves the image unchanged") {
  const Point2 shift{3.25, -1.5};
  const ArrayGeometry ring = make_ring(96, 50.0);
  std::vector<Point2> moved;
  for (const Point2& e : ring.elements()) moved.push_back({e.x + shift.x, e.y + shift.y});
  const ArrayGeometry ring2(moved, "custom");
  const ChannelData d1 = sim(forward::Phantom{{{4, 2, 1}}}, ring);
  const ChannelData d2 = sim(forward::Phantom{{{4 + shift.x, 2 + shift.y, 1}}}, ring2);
  const ImageGrid g1 = centered_grid(4, 2, 80, 80);
  ImageGrid g2 = g1;
  g2.origin_x_mm += shift.x;
  g2.origin_y_mm += shift.y;
  const Image2D i1 = das_reconstruct(d1, ring, g1, 1500);
  const Image2D i2 = das_reconstruct(d2, ring2, g2, 1500);
  CHECK(max_abs_diff(i1, i2) <= 1e-6 * i1.max_abs() * 10);
}

TEST_CASE("a stop request cancels reconstruction") {
  const ArrayGeometry ring = make_ring(16, 50.0);
  std::stop_source stop;
  stop.request_stop();
  DasOptions opt;
  opt.stop = stop.get_token();
  CHECK(code_of([&] { das_reconstruct(ChannelData(16, 100, kFs), ring, centered_grid(0, 0, 10, 10), 1500, opt); }) ==
        ErrorCode::kCancelled);
}

TEST_CASE("reconstruction errors") {
  const ArrayGeometry ring = make_ring(16, 50.0);
  CHECK(code_of([&] { das_reconstruct(ChannelData(15, 100, kFs), ring, centered_grid(0, 0, 10, 10), 1500); }) ==
        ErrorCode::kChannelMismatch);
  CHECK(code_of([&] { das_reconstruct(ChannelData(16, 100, kFs), ring, centered_grid(0, 0, 10, 10), 0.0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("sparse expansion duplicates each channel into two") {
  const ChannelData ab(2, 3, kFs, 1e-6, {1, 2, 3, 4, 5, 6});
  const auto [dense, geo] = expand_sparse_channels(ab, make_ring(4, 50.0));
  CHECK(dense.n_channels() == 4);
  CHECK(dense.t0_s() == 1e-6);
  const std::vector<float> expected = {1, 2, 3, 1, 2, 3, 4, 5, 6, 4, 5, 6};
  CHECK(std::equal(dense.samples().begin(), dense.samples().end(), expected.begin(), expected.end()));
  CHECK(geo == make_ring(4, 50.0));

  const ChannelData same(3, 2, kFs, 0.0, {7, 8, 7, 8, 7, 8});
  const auto [d2, g2] = expand_sparse_channels(same, make_ring(6, 50.0));
  for (int i = 1; i < 6; ++i) CHECK(std::equal(d2.row(i).begin(), d2.row(i).end(), d2.row(0).begin()));

  CHECK(code_of([&] { expand_sparse_channels(ab, make_ring(5, 50.0)); }) == ErrorCode::kChannelMismatch);
}

TEST_CASE("expansion property on random records") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<float> u(-1, 1);
  for (int n : {1, 3, 64}) {
    std::vector<float> s(static_cast<std::size_t>(n) * 17);
    for (float& v : s) v = u(rng);
    const ChannelData d(n, 17, kFs, 0.0, s);
    const auto [dense, geo] = expand_sparse_channels(d, make_ring(2 * n, 10.0));
    REQUIRE(dense.n_channels() == 2 * n);
    for (int k = 0; k < n; ++k) {
      CHECK(std::equal(dense.row(2 * k).begin(), dense.row(2 * k).end(), d.row(k).begin()));
      CHECK(std::equal(dense.row(2 * k + 1).begin(), dense.row(2 * k + 1).end(), d.row(k).begin()));
    }
  }
}

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
#include <cstring>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "pasam/core/base64.hpp"
#include "pasam/core/container.hpp"
#include "expect.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/geometry.hpp"
#include "pasam/core/png_io.hpp"
#include "pasam/core/text.hpp"
#include "pasam/core/types.hpp"
#include "scenes.hpp"

using namespace pasam;
using pasam::testing::code_of;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / ("pasam_core_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string le32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int k = 0; k < 4; ++k) s[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  return s;
}

}  // namespace

TEST_CASE("grid maps pixel centers to world coordinates") {
  const ImageGrid g{-2.5, 1.0, 0.1, 50, 40};
  const Point2 p = pixel_to_world(3, 7, g);
  CHECK(p.x == doctest::Approx(-2.2));
  CHECK(p.y == doctest::Approx(1.7));
  const PixelCoord c = world_to_pixel(p, g);
  CHECK(c.x == doctest::Approx(3.0));
  CHECK(c.y == doctest::Approx(7.0));
  CHECK(g.contains_world({-2.5, 1.0}));
  CHECK_FALSE(g.contains_world({-2.56, 1.0}));
  CHECK(code_of([] { ImageGrid{0, 0, 0.0, 10, 10}.validate(); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { ImageGrid{0, 0, 0.1, 0, 10}.validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("image and mask invariants") {
  const ImageGrid g{0, 0, 0.1, 3, 2};
  CHECK(code_of([&] { Image2D(g, std::vector<float>(5)); }) == ErrorCode::kLengthMismatch);
  CHECK(code_of([&] {
          Image2D(g, {0, 1, 2, std::numeric_limits<float>::quiet_NaN(), 4, 5});
        }) == ErrorCode::kNonFinite);
  const Image2D img(g, {0, -7, 2, 3, 4, 5});
  CHECK(img.at(1, 0) == -7.0f);
  CHECK(img.max_abs() == 7.0);

  CHECK(code_of([&] { LabelMask(g, {0, 2, 0, 0, 0, 0}, MaskKind::kBinary); }) ==
        ErrorCode::kInvalidArgument);
  // Multilabel masks must be dense: label 2 without label 1 is rejected.
  CHECK(code_of([&] { LabelMask(g, {0, 2, 0, 0, 0, 0}, MaskKind::kMultilabel); }) ==
        ErrorCode::kInvalidArgument);
  const LabelMask m(g, {0, 1, 2, 2, 0, 1}, MaskKind::kMultilabel);
  CHECK(m.num_labels() == 2);
  CHECK(m.foreground_count() == 4);
}

TEST_CASE("volume requires identical slice grids") {
  const ImageGrid a{0, 0, 0.1, 4, 4};
  ImageGrid b = a;
  b.origin_x_mm = 0.5;
  CHECK(code_of([&] { Volume3D({Image2D(a), Image2D(b)}, 0.1); }) == ErrorCode::kGridMismatch);
  const Volume3D v({Image2D(a), Image2D(a), Image2D(a)}, 0.1);
  CHECK(v.depth() == 3);
  CHECK(v.extent_mm() == doctest::Approx(0.2));
}

TEST_CASE("ellipse canonical form") {
  const Ellipse e = make_ellipse(1, 2, 3, 5, 0.25);
  CHECK(e.a_mm == 5.0);
  CHECK(e.b_mm == 3.0);
  CHECK(e.theta_rad == doctest::Approx(0.25 + std::numbers::pi / 2 - std::numbers::pi));
  CHECK(e.contains({1, 2}));
  CHECK(fold_axis_angle(std::numbers::pi) == doctest::Approx(0.0));
  CHECK(fold_axis_angle(-std::numbers::pi / 2) == doctest::Approx(std::numbers::pi / 2));
  CHECK(code_of([] { Ellipse{0, 0, 1, 2, 0}.validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("prompt validation") {
  const ImageGrid g{0, 0, 0.1, 10, 8};
  CHECK_NOTHROW(validate_prompt({9.99, 7.5, 1}, g));
  CHECK(code_of([&] { validate_prompt({10.0, 1, 1}, g); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { validate_prompt({-0.1, 1, 1}, g); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { validate_prompt({1, 1, 2}, g); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("double text round-trips exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(code_of([] { parse_double("1.5x"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { parse_long("12 "); }) == ErrorCode::kInvalidArgument);
  CHECK(parse_long("-42") == -42);
}

TEST_CASE("ring and arc geometry") {
  const ArrayGeometry ring = make_ring(256, 50.0);
  REQUIRE(ring.size() == 256);
  CHECK(ring.descriptor() == "ring:256:50");
  CHECK(ring[0].x == doctest::Approx(50.0));
  CHECK(ring[0].y == doctest::Approx(0.0));
  CHECK(ring[64].y == doctest::Approx(50.0));
  for (const Point2& p : ring.elements()) CHECK(std::hypot(p.x, p.y) == doctest::Approx(50.0));

  const ArrayGeometry parsed = parse_geometry_descriptor("ring:256:50");
  CHECK(parsed == ring);

  const ArrayGeometry arc = parse_geometry_descriptor("arc:4:10:0:180");
  REQUIRE(arc.size() == 4);
  CHECK(arc[2].x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(arc[2].y == doctest::Approx(10.0));

  CHECK(code_of([] { parse_geometry_descriptor("ring:0:50"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { parse_geometry_descriptor("grid:4:4"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { parse_geometry_descriptor("ring:8:-1"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("subset descriptors parse back to the same elements") {
  const ArrayGeometry ring = make_ring(16, 20.0);
  const std::vector<std::size_t> even = {0, 2, 4, 6, 8, 10, 12, 14};
  const std::string d = subset_descriptor(ring.descriptor(), even);
  CHECK(d == "ring:16:20@step:0:2:8");
  const ArrayGeometry sub = parse_geometry_descriptor(d);
  REQUIRE(sub.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) CHECK(sub[k] == ring[2 * k]);

  const std::vector<std::size_t> irregular = {0, 1, 5};
  const std::string d2 = subset_descriptor(ring.descriptor(), irregular);
  CHECK(d2.find("@list") != std::string::npos);
  CHECK(code_of([&] { parse_geometry_descriptor(d2); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("geometry file round-trip") {
  const fs::path dir = temp_dir();
  const ArrayGeometry arc = make_arc(7, 30.0, -45.0, 90.0);
  write_geometry_file(arc, dir / "arc.yaml");
  const ArrayGeometry back = load_geometry_file(dir / "arc.yaml");
  REQUIRE(back.size() == arc.size());
  for (std::size_t i = 0; i < arc.size(); ++i) CHECK(back[i] == arc[i]);
  CHECK(resolve_geometry((dir / "arc.yaml").string()).size() == 7);
  CHECK(resolve_geometry("ring:8:5").size() == 8);
}

TEST_CASE("base64 standard test vectors") {
  const std::pair<const char*, const char*> vectors[] = {
      {"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},        {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, encoded] : vectors) {
    CHECK(base64_encode(plain) == encoded);
    CHECK(base64_decode(encoded) == plain);
  }
  CHECK(base64_encode(std::string("\xfb\xff", 2)) == "+/8=");
  CHECK(code_of([] { base64_decode("Zg"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { base64_decode("Zm9v!"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { base64_decode("-_8="); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("container decodes a hand-assembled image") {
  const std::string header =
      R"({"kind":"image","dtype":"f32","dims":[2,3],"grid":{"origin_x_mm":1.5,"origin_y_mm":-2,"pitch_mm":0.25}})";
  std::string bytes = "PAZ1" + le32(static_cast<std::uint32_t>(header.size())) + header;
  const float values[6] = {0.0f, 1.0f, -2.5f, 3.0f, 1e-3f, 7.0f};
  for (float v : values) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    bytes += le32(u);
  }
  const ContainerObject obj = decode_container(bytes);
  REQUIRE(std::holds_alternative<Image2D>(obj));
  const Image2D& img = std::get<Image2D>(obj);
  CHECK(img.width() == 3);
  CHECK(img.height() == 2);
  CHECK(img.grid().origin_x_mm == 1.5);
  CHECK(img.grid().pitch_mm == 0.25);
  CHECK(img.at(2, 0) == -2.5f);
  CHECK(img.at(1, 1) == 1e-3f);
  // The encoder emits the same payload bytes.
  const std::string again = encode_container(img);
  CHECK(again.substr(again.size() - 24) == bytes.substr(bytes.size() - 24));
}

TEST_CASE("container round-trips every kind") {
  std::mt19937 rng(11);
  std::normal_distribution<float> n(0.0f, 3.0f);
  std::vector<float> s(5 * 17);
  for (float& v : s) v = n(rng);
  ChannelData ch(5, 17, 40e6, 1.25e-6, s);
  ch.set_geometry_descriptor("ring:5:10");
  const Image2D img(ImageGrid{-1, -2, 0.1, 4, 3}, std::vector<float>(s.begin(), s.begin() + 12));
  const LabelMask mask(ImageGrid{0, 0, 0.2, 4, 2}, {0, 1, 1, 2, 3, 0, 0, 3}, MaskKind::kMultilabel);

  const fs::path dir = temp_dir();
  write_container(ch, dir / "c.paz");
  write_container(img, dir / "i.paz");
  write_container(mask, dir / "m.paz");
  CHECK(read_channels(dir / "c.paz") == ch);
  CHECK(read_image(dir / "i.paz") == img);
  CHECK(read_mask(dir / "m.paz") == mask);
  CHECK(code_of([&] { read_image(dir / "m.paz"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { read_image(dir / "missing.paz"); }) == ErrorCode::kIo);
}

TEST_CASE("container error paths") {
  const Image2D img(ImageGrid{0, 0, 0.1, 4, 4});
  const std::string good = encode_container(img);
  CHECK(code_of([&] { decode_container(good.substr(0, 3)); }) == ErrorCode::kTruncated);
  CHECK(code_of([&] { decode_container("PAZ2" + good.substr(4)); }) == ErrorCode::kBadMagic);
  CHECK(code_of([&] { decode_container(good.substr(0, 6)); }) == ErrorCode::kTruncated);
  CHECK(code_of([&] { decode_container(good.substr(0, 20)); }) == ErrorCode::kTruncated);
  CHECK(code_of([&] { decode_container(good.substr(0, good.size() - 1)); }) == ErrorCode::kTruncated);
  CHECK(code_of([&] { decode_container(good + "xxxx"); }) == ErrorCode::kLengthMismatch);

  const std::string junk = "{not json";
  CHECK(code_of([&] { decode_container("PAZ1" + le32(junk.size()) + junk); }) ==
        ErrorCode::kInvalidHeader);
  const std::string no_kind = R"({"dtype":"f32","dims":[1,1]})";
  CHECK(code_of([&] { decode_container("PAZ1" + le32(no_kind.size()) + no_kind + le32(0)); }) ==
        ErrorCode::kInvalidHeader);

  const std::string header = R"({"kind":"image","dtype":"f32","dims":[1,1],"grid":{"origin_x_mm":0,"origin_y_mm":0,"pitch_mm":0.1}})";
  CHECK(code_of([&] { decode_container("PAZ1" + le32(header.size()) + header + le32(0x7fc00000u)); }) ==
        ErrorCode::kNonFinite);
}

TEST_CASE("gray PNG round-trips at 8 and 16 bits") {
  GrayPng p8{5, 3, 8, {0, 1, 2, 3, 4, 255, 128, 7, 9, 10, 11, 12, 13, 14, 15}};
  const GrayPng back8 = decode_gray_png(encode_gray_png(p8));
  CHECK(back8.bit_depth == 8);
  CHECK(back8.pixels == p8.pixels);
  GrayPng p16{2, 2, 16, {0, 65535, 300, 4095}};
  const std::string bytes = encode_gray_png(p16);
  CHECK(looks_like_png(bytes));
  CHECK(bytes.substr(1, 3) == "PNG");
  CHECK(decode_gray_png(bytes).pixels == p16.pixels);
  CHECK(code_of([] { decode_gray_png("not a png at all"); }) == ErrorCode::kBadMagic);
}

TEST_CASE("mask PNG with sidecar round-trips") {
  const fs::path dir = temp_dir();
  const LabelMask m(ImageGrid{3.5, -1.0, 0.05, 3, 2}, {1, 0, 1, 1, 1, 0}, MaskKind::kBinary);
  write_mask_png(m, dir / "m.png");
  CHECK(fs::exists(sidecar_path(dir / "m.png")));
  CHECK(read_mask_png(dir / "m.png") == m);

  std::vector<std::uint16_t> many(600);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = static_cast<std::uint16_t>(i / 2 + 1);
  const LabelMask big(ImageGrid{0, 0, 0.1, 30, 20}, many, MaskKind::kMultilabel);
  CHECK(decode_gray_png(encode_mask_png(big)).bit_depth == 16);
  write_mask_png(big, dir / "big.png");
  CHECK(read_mask_png(dir / "big.png") == big);
}

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

#include "pasam/core/png_io.hpp"

#include <csetjmp>
#include <cstring>

#include <nlohmann/json.hpp>
#include <png.h>

#include "pasam/core/container.hpp"
#include "pasam/core/error.hpp"

namespace pasam {
namespace {

struct ReadCursor {
  std::string_view bytes;
  std::size_t pos = 0;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text != nullptr) *text = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void write_to_string(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), len);
}

void flush_noop(png_structp) {}

void read_from_cursor(png_structp png, png_bytep data, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->bytes.size() - cur->pos < len) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(data, cur->bytes.data() + cur->pos, len);
  cur->pos += len;
}

}  // namespace

bool looks_like_png(std::string_view bytes) {
  return bytes.size() >= 8 &&
         png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0;
}

std::string encode_gray_png(const GrayPng& image) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) *
                                 static_cast<std::size_t>(image.height)) {
    throw Error(ErrorCode::kInvalidArgument, "PNG dimensions do not match pixels");
  }
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw Error(ErrorCode::kInvalidArgument, "PNG bit depth must be 8 or 16");
  }
  const int bytes_per_px = image.bit_depth / 8;
  std::vector<png_byte> rows(image.pixels.size() * bytes_per_px);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const std::uint16_t v = image.pixels[i];
    if (bytes_per_px == 1) {
      if (v > 255) {
        throw Error(ErrorCode::kInvalidArgument, "8-bit PNG pixel exceeds 255");
      }
      rows[i] = static_cast<png_byte>(v);
    } else {
      rows[2 * i] = static_cast<png_byte>(v >> 8);  // PNG is big-endian
      rows[2 * i + 1] = static_cast<png_byte>(v & 0xFF);
    }
  }

  std::string out;
  std::string err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "libpng allocation failed");
  }
  std::vector<png_bytep> row_ptrs(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "PNG encode failed: " + err);
  }
  png_set_write_fn(png, &out, write_to_string, flush_noop);
  png_set_IHDR(png, info, image.width, image.height, image.bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  for (int y = 0; y < image.height; ++y) {
    row_ptrs[y] = rows.data() + static_cast<std::size_t>(y) * image.width * bytes_per_px;
  }
  png_set_rows(png, info, row_ptrs.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

GrayPng decode_gray_png(std::string_view bytes) {
  if (!looks_like_png(bytes)) {
    throw Error(ErrorCode::kBadMagic, "not a PNG stream");
  }
  std::string err;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "libpng allocation failed");
  }
  ReadCursor cursor{bytes, 0};
  GrayPng result;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kInvalidArgument, "PNG decode failed: " + err);
  }
  png_set_read_fn(png, &cursor, read_from_cursor);
  png_read_png(png, info, PNG_TRANSFORM_PACKING | PNG_TRANSFORM_STRIP_ALPHA,
               nullptr);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kInvalidArgument, "PNG must be grayscale");
  }
  result.width = static_cast<int>(png_get_image_width(png, info));
  result.height = static_cast<int>(png_get_image_height(png, info));
  result.bit_depth = depth == 16 ? 16 : 8;
  result.pixels.resize(static_cast<std::size_t>(result.width) * result.height);
  png_bytepp rows = png_get_rows(png, info);
  for (int y = 0; y < result.height; ++y) {
    const png_bytep row = rows[y];
    for (int x = 0; x < result.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * result.width + x;
      result.pixels[i] = depth == 16
                             ? static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1])
                             : row[x];
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return result;
}

std::string encode_mask_png(const LabelMask& mask) {
  GrayPng png;
  png.width = mask.width();
  png.height = mask.height();
  png.bit_depth = mask.num_labels() <= 255 ? 8 : 16;
  png.pixels.assign(mask.labels().begin(), mask.labels().end());
  return encode_gray_png(png);
}

std::filesystem::path sidecar_path(const std::filesystem::path& png_path) {
  return std::filesystem::path(png_path.string() + ".json");
}

void write_mask_png(const LabelMask& mask, const std::filesystem::path& path) {
  write_file_bytes(path, encode_mask_png(mask));
  const nlohmann::json sidecar = {
      {"grid",
       {{"origin_x_mm", mask.grid().origin_x_mm},
        {"origin_y_mm", mask.grid().origin_y_mm},
        {"pitch_mm", mask.grid().pitch_mm}}},
      {"mask_kind", mask.kind() == MaskKind::kBinary ? "binary" : "multilabel"}};
  write_file_bytes(sidecar_path(path), sidecar.dump(2) + "\n");
}

LabelMask read_mask_png(const std::filesystem::path& path) {
  const GrayPng png = decode_gray_png(read_file_bytes(path));
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_file_bytes(sidecar_path(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidHeader,
                "bad mask sidecar for " + path.string() + ": " + e.what());
  }
  ImageGrid grid;
  MaskKind kind = MaskKind::kBinary;
  try {
    const auto& g = sidecar.at("grid");
    grid.origin_x_mm = g.at("origin_x_mm").get<double>();
    grid.origin_y_mm = g.at("origin_y_mm").get<double>();
    grid.pitch_mm = g.at("pitch_mm").get<double>();
    const std::string k = sidecar.value("mask_kind", "binary");
    if (k != "binary" && k != "multilabel") {
      throw Error(ErrorCode::kInvalidHeader, "mask_kind must be binary or multilabel");
    }
    kind = k == "binary" ? MaskKind::kBinary : MaskKind::kMultilabel;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidHeader,
                "bad mask sidecar for " + path.string() + ": " + e.what());
  }
  grid.width_px = png.width;
  grid.height_px = png.height;
  std::vector<std::uint16_t> labels(png.pixels.begin(), png.pixels.end());
  return LabelMask(grid, std::move(labels), kind);
}

}  // namespace pasam

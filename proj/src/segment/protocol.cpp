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

#include "pasam/segment/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "pasam/core/base64.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/png_io.hpp"

namespace pasam::segment {
namespace {

using nlohmann::json;

[[noreturn]] void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

const json& member(const json& obj, const char* key, ErrorCode code, const std::string& where) {
  if (!obj.is_object()) fail(code, where + " must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(code, where + " is missing '" + key + "'");
  return *it;
}

int dimension(const json& obj, const char* key, ErrorCode code, const std::string& where) {
  const json& v = member(obj, key, code, where);
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1 << 20) {
    fail(code, where + "." + key + " must be a positive integer");
  }
  return v.get<int>();
}

const std::string& string_member(const json& obj, const char* key, ErrorCode code,
                                 const std::string& where) {
  const json& v = member(obj, key, code, where);
  if (!v.is_string()) fail(code, where + "." + key + " must be a string");
  return v.get_ref<const std::string&>();
}

std::string decode_payload(const std::string& data, ErrorCode code, const std::string& where) {
  try {
    return base64_decode(data);
  } catch (const Error& e) {
    fail(code, where + ".data: " + e.what());
  }
}

GrayPng decode_png_payload(const std::string& bytes, int width, int height, ErrorCode code,
                           const std::string& where) {
  GrayPng png;
  try {
    png = decode_gray_png(bytes);
  } catch (const Error& e) {
    fail(code, where + ".data: " + e.what());
  }
  if (png.width != width || png.height != height) {
    fail(code, where + ": PNG is " + std::to_string(png.width) + "x" +
                   std::to_string(png.height) + " but declared " + std::to_string(width) +
                   "x" + std::to_string(height));
  }
  return png;
}

void put_f32le(std::string& out, float v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((u >> (8 * k)) & 0xFF));
}

float get_f32le(const char* p) {
  std::uint32_t u = 0;
  for (int k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[k])) << (8 * k);
  return std::bit_cast<float>(u);
}

}  // namespace

const char* image_encoding_name(ImageEncoding e) {
  return e == ImageEncoding::kF32leBase64 ? "f32le-base64" : "png-base64";
}

const char* mask_encoding_name(MaskEncoding e) {
  return e == MaskEncoding::kU8leBase64 ? "u8le-base64" : "png-base64";
}

const char* mode_name(SegmentMode m) {
  return m == SegmentMode::kBinary ? "binary" : "multilabel";
}

SegmentMode parse_mode(const std::string& name) {
  if (name == "binary") return SegmentMode::kBinary;
  if (name == "multilabel") return SegmentMode::kMultilabel;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + name + "'");
}

std::vector<float> normalize_for_transport(const Image2D& image) {
  const auto data = image.data();
  std::vector<float> out(data.size(), 0.0f);
  float lo = std::fabs(data[0]);
  float hi = lo;
  for (float v : data) {
    lo = std::min(lo, std::fabs(v));
    hi = std::max(hi, std::fabs(v));
  }
  if (!(hi > lo)) return out;
  const double span = static_cast<double>(hi) - lo;
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = static_cast<float>((std::fabs(data[i]) - static_cast<double>(lo)) / span);
  }
  return out;
}

json encode_image_raster(const Image2D& image, ImageEncoding encoding) {
  const std::vector<float> values = normalize_for_transport(image);
  std::string bytes;
  if (encoding == ImageEncoding::kF32leBase64) {
    bytes.reserve(values.size() * 4);
    for (float v : values) put_f32le(bytes, v);
  } else {
    GrayPng png{image.width(), image.height(), 16, {}};
    png.pixels.reserve(values.size());
    for (float v : values) {
      png.pixels.push_back(static_cast<std::uint16_t>(std::lround(v * 65535.0)));
    }
    bytes = encode_gray_png(png);
  }
  return json{{"width", image.width()},
              {"height", image.height()},
              {"encoding", image_encoding_name(encoding)},
              {"data", base64_encode(bytes)}};
}

json encode_mask_raster(const LabelMask& mask, MaskEncoding encoding) {
  std::string bytes;
  if (encoding == MaskEncoding::kU8leBase64) {
    if (mask.num_labels() > 255) {
      throw Error(ErrorCode::kInvalidArgument,
                  "u8le-base64 holds at most 255 labels; use png-base64");
    }
    bytes.reserve(mask.labels().size());
    for (std::uint16_t l : mask.labels()) bytes.push_back(static_cast<char>(l));
  } else {
    bytes = encode_mask_png(mask);
  }
  return json{{"width", mask.width()},
              {"height", mask.height()},
              {"encoding", mask_encoding_name(encoding)},
              {"data", base64_encode(bytes)}};
}

json encode_raw_image_raster(const Image2D& image) {
  std::string bytes;
  bytes.reserve(image.data().size() * 4);
  for (float v : image.data()) put_f32le(bytes, v);
  return json{{"width", image.width()},
              {"height", image.height()},
              {"encoding", image_encoding_name(ImageEncoding::kF32leBase64)},
              {"data", base64_encode(bytes)}};
}

ImageRaster decode_image_raster(const json& raster, ErrorCode code) {
  const std::string where = "image";
  ImageRaster out;
  out.width = dimension(raster, "width", code, where);
  out.height = dimension(raster, "height", code, where);
  const std::string& enc = string_member(raster, "encoding", code, where);
  const std::string bytes = decode_payload(string_member(raster, "data", code, where), code, where);
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
  out.values.resize(n);
  if (enc == "f32le-base64") {
    if (bytes.size() != 4 * n) {
      fail(code, "image payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                     std::to_string(4 * n));
    }
    for (std::size_t i = 0; i < n; ++i) out.values[i] = get_f32le(bytes.data() + 4 * i);
  } else if (enc == "png-base64") {
    const GrayPng png = decode_png_payload(bytes, out.width, out.height, code, where);
    out.png_bit_depth = png.bit_depth;
    for (std::size_t i = 0; i < n; ++i) out.values[i] = static_cast<float>(png.pixels[i]);
  } else {
    fail(code, "unknown image encoding '" + enc + "'");
  }
  for (float v : out.values) {
    if (!std::isfinite(v)) fail(code, "image payload holds non-finite values");
  }
  return out;
}

MaskRaster decode_mask_raster(const json& raster, ErrorCode code) {
  const std::string where = "mask";
  MaskRaster out;
  out.width = dimension(raster, "width", code, where);
  out.height = dimension(raster, "height", code, where);
  const std::string& enc = string_member(raster, "encoding", code, where);
  const std::string bytes =
      decode_payload(string_member(raster, "data", code, where), code, where);
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
  if (enc == "u8le-base64") {
    if (bytes.size() != n) {
      fail(code, "mask payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                     std::to_string(n));
    }
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = static_cast<unsigned char>(bytes[i]);
  } else if (enc == "png-base64") {
    out.labels = decode_png_payload(bytes, out.width, out.height, code, where).pixels;
  } else {
    fail(code, "unknown mask encoding '" + enc + "'");
  }
  return out;
}

json encode_prompts(std::span<const PromptPoint> prompts) {
  json arr = json::array();
  for (const PromptPoint& p : prompts) {
    arr.push_back(json{{"x", p.x_px}, {"y", p.y_px}, {"label", p.label}});
  }
  return arr;
}

std::string serialize_prompts(std::span<const PromptPoint> prompts) {
  return encode_prompts(prompts).dump();
}

std::vector<PromptPoint> decode_prompts(const json& prompts) {
  const ErrorCode code = ErrorCode::kInvalidArgument;
  if (!prompts.is_array()) fail(code, "prompts must be an array");
  std::vector<PromptPoint> out;
  out.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const std::string where = "prompts[" + std::to_string(i) + "]";
    const json& x = member(prompts[i], "x", code, where);
    const json& y = member(prompts[i], "y", code, where);
    const json& label = member(prompts[i], "label", code, where);
    if (!x.is_number() || !y.is_number()) fail(code, where + " coordinates must be numbers");
    if (!label.is_number_integer() || (label.get<long long>() != 0 && label.get<long long>() != 1)) {
      fail(code, where + ".label must be 0 or 1");
    }
    out.push_back({x.get<double>(), y.get<double>(), label.get<int>()});
  }
  return out;
}

json encode_request(const SegmentRequest& request, ImageEncoding encoding) {
  return json{{"image", encode_image_raster(request.image, encoding)},
              {"prompts", encode_prompts(request.prompts)},
              {"mode", mode_name(request.mode)}};
}

SegmentRequest decode_request(const json& body, const std::optional<ImageGrid>& grid) {
  const ErrorCode code = ErrorCode::kInvalidArgument;
  ImageRaster raster = decode_image_raster(member(body, "image", code, "request"), code);
  const int width = raster.width, height = raster.height;
  std::vector<float> values = std::move(raster.values);
  if (raster.png_bit_depth != 0) {
    const double full = raster.png_bit_depth == 16 ? 65535.0 : 255.0;
    for (float& v : values) v = static_cast<float>(v / full);
  }

  ImageGrid g = grid.value_or(ImageGrid{0.0, 0.0, 0.1, width, height});
  if (g.width_px != width || g.height_px != height) {
    fail(ErrorCode::kDimensionMismatch, "request image dimensions differ from target grid");
  }
  SegmentRequest request{Image2D(g, std::move(values)),
                         decode_prompts(member(body, "prompts", code, "request")),
                         SegmentMode::kBinary};
  const auto mode_it = body.find("mode");
  if (mode_it != body.end()) {
    if (!mode_it->is_string()) fail(code, "request.mode must be a string");
    request.mode = parse_mode(mode_it->get<std::string>());
  }
  return request;
}

json encode_response(const LabelMask& mask, double elapsed_ms, const std::string& backend,
                     MaskEncoding encoding) {
  return json{{"mask", encode_mask_raster(mask, encoding)},
              {"elapsed_ms", elapsed_ms},
              {"backend", backend}};
}

SegmentResponse decode_response(const json& body) {
  const ErrorCode code = ErrorCode::kMalformedResponse;
  SegmentResponse out;
  out.mask = decode_mask_raster(member(body, "mask", code, "response"), code);
  const json& elapsed = member(body, "elapsed_ms", code, "response");
  if (!elapsed.is_number() || !std::isfinite(elapsed.get<double>())) {
    fail(code, "response.elapsed_ms must be a number");
  }
  out.elapsed_ms = elapsed.get<double>();
  out.backend = string_member(body, "backend", code, "response");
  return out;
}

json encode_error(const std::string& code, const std::string& message) {
  return json{{"error", {{"code", code}, {"message", message}}}};
}

LabelMask to_label_mask(const MaskRaster& raster, const ImageGrid& grid, SegmentMode mode) {
  if (raster.width != grid.width_px || raster.height != grid.height_px) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask is " + std::to_string(raster.width) + "x" + std::to_string(raster.height) +
                    " but the image is " + std::to_string(grid.width_px) + "x" +
                    std::to_string(grid.height_px));
  }
  try {
    return LabelMask(grid, raster.labels,
                     mode == SegmentMode::kBinary ? MaskKind::kBinary : MaskKind::kMultilabel);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("mask labels invalid: ") + e.what());
  }
}

}  // namespace pasam::segment

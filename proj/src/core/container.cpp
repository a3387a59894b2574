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

#include "pasam/core/container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <nlohmann/json.hpp>

#include "pasam/core/error.hpp"

namespace pasam {
namespace {

using nlohmann::json;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

void put_f32_payload(std::string& out, std::span<const float> values) {
  out.reserve(out.size() + values.size() * 4);
  for (float f : values) put_u32(out, std::bit_cast<std::uint32_t>(f));
}

void put_u16_payload(std::string& out, std::span<const std::uint16_t> values) {
  out.reserve(out.size() + values.size() * 2);
  for (std::uint16_t v : values) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
  }
}

json grid_json(const ImageGrid& g) {
  return {{"origin_x_mm", g.origin_x_mm},
          {"origin_y_mm", g.origin_y_mm},
          {"pitch_mm", g.pitch_mm}};
}

std::string frame(const json& header, const std::string& payload) {
  const std::string text = header.dump();
  std::string out(kContainerMagic);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out += payload;
  return out;
}

[[noreturn]] void bad_header(const std::string& why) {
  throw Error(ErrorCode::kInvalidHeader, "container header: " + why);
}

std::size_t check_payload(std::string_view payload, std::size_t count,
                          std::size_t elem_size) {
  const std::size_t expected = count * elem_size;
  if (payload.size() < expected) {
    throw Error(ErrorCode::kTruncated,
                "container payload truncated: expected " +
                    std::to_string(expected) + " bytes, found " +
                    std::to_string(payload.size()));
  }
  if (payload.size() > expected) {
    throw Error(ErrorCode::kLengthMismatch,
                "container payload length " + std::to_string(payload.size()) +
                    " does not match header dims (" + std::to_string(expected) +
                    " bytes)");
  }
  return count;
}

std::vector<float> get_f32_payload(std::string_view payload, std::size_t count) {
  check_payload(payload, count, 4);
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(get_u32(payload, 4 * i));
  }
  return values;
}

std::vector<std::uint16_t> get_u16_payload(std::string_view payload,
                                           std::size_t count) {
  check_payload(payload, count, 2);
  std::vector<std::uint16_t> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = static_cast<std::uint16_t>(
        static_cast<unsigned char>(payload[2 * i]) |
        (static_cast<unsigned char>(payload[2 * i + 1]) << 8));
  }
  return values;
}

std::pair<long, long> dims_of(const json& h) {
  if (!h.contains("dims") || !h["dims"].is_array() || h["dims"].size() != 2) {
    bad_header("dims must be a 2-element array");
  }
  const long d0 = h["dims"][0].get<long>();
  const long d1 = h["dims"][1].get<long>();
  if (d0 < 1 || d1 < 1 || d0 > (1L << 24) || d1 > (1L << 24)) {
    bad_header("dims out of range");
  }
  return {d0, d1};
}

ImageGrid grid_of(const json& h, long rows, long cols) {
  if (!h.contains("grid") || !h["grid"].is_object()) bad_header("missing grid");
  const json& g = h["grid"];
  ImageGrid grid;
  grid.origin_x_mm = g.at("origin_x_mm").get<double>();
  grid.origin_y_mm = g.at("origin_y_mm").get<double>();
  grid.pitch_mm = g.at("pitch_mm").get<double>();
  grid.width_px = static_cast<int>(cols);
  grid.height_px = static_cast<int>(rows);
  return grid;
}

void expect_dtype(const json& h, const char* dtype) {
  if (h.value("dtype", "") != dtype) {
    bad_header(std::string("expected dtype ") + dtype);
  }
}

}  // namespace

std::string encode_container(const ContainerObject& object) {
  std::string payload;
  json header;
  if (const auto* ch = std::get_if<ChannelData>(&object)) {
    header = {{"kind", "channels"},
              {"dtype", "f32"},
              {"dims", {ch->n_channels(), ch->n_samples()}},
              {"fs_hz", ch->fs_hz()},
              {"t0_s", ch->t0_s()}};
    if (!ch->geometry_descriptor().empty()) {
      header["geometry"] = ch->geometry_descriptor();
    }
    put_f32_payload(payload, ch->samples());
  } else if (const auto* im = std::get_if<Image2D>(&object)) {
    header = {{"kind", "image"},
              {"dtype", "f32"},
              {"dims", {im->height(), im->width()}},
              {"grid", grid_json(im->grid())}};
    put_f32_payload(payload, im->data());
  } else {
    const auto& m = std::get<LabelMask>(object);
    header = {{"kind", "mask"},
              {"dtype", "u16"},
              {"dims", {m.height(), m.width()}},
              {"grid", grid_json(m.grid())},
              {"mask_kind",
               m.kind() == MaskKind::kBinary ? "binary" : "multilabel"}};
    put_u16_payload(payload, m.labels());
  }
  return frame(header, payload);
}

ContainerObject decode_container(std::string_view bytes) {
  if (bytes.size() < 4) {
    throw Error(ErrorCode::kTruncated, "container shorter than its magic");
  }
  if (bytes.substr(0, 4) != kContainerMagic) {
    throw Error(ErrorCode::kBadMagic, "not a PAZ1 container (bad magic)");
  }
  if (bytes.size() < 8) {
    throw Error(ErrorCode::kTruncated, "container header length truncated");
  }
  const std::uint32_t hlen = get_u32(bytes, 4);
  if (bytes.size() - 8 < hlen) {
    throw Error(ErrorCode::kTruncated, "container header truncated");
  }
  const std::string_view payload = bytes.substr(8 + hlen);

  json h;
  try {
    h = json::parse(bytes.substr(8, hlen));
  } catch (const json::exception& e) {
    bad_header(std::string("not valid JSON: ") + e.what());
  }
  if (!h.is_object() || !h.contains("kind")) bad_header("missing kind");

  try {
    const std::string kind = h["kind"].get<std::string>();
    const auto [d0, d1] = dims_of(h);
    const auto count = static_cast<std::size_t>(d0) * static_cast<std::size_t>(d1);
    if (kind == "channels") {
      expect_dtype(h, "f32");
      const double fs = h.at("fs_hz").get<double>();
      const double t0 = h.value("t0_s", 0.0);
      ChannelData data(static_cast<int>(d0), static_cast<int>(d1), fs, t0,
                       get_f32_payload(payload, count));
      if (h.contains("geometry")) {
        data.set_geometry_descriptor(h["geometry"].get<std::string>());
      }
      return data;
    }
    if (kind == "image") {
      expect_dtype(h, "f32");
      const ImageGrid grid = grid_of(h, d0, d1);
      return Image2D(grid, get_f32_payload(payload, count));
    }
    if (kind == "mask") {
      expect_dtype(h, "u16");
      const ImageGrid grid = grid_of(h, d0, d1);
      const std::string mk = h.value("mask_kind", "");
      if (mk != "binary" && mk != "multilabel") {
        bad_header("mask_kind must be binary or multilabel");
      }
      return LabelMask(grid, get_u16_payload(payload, count),
                       mk == "binary" ? MaskKind::kBinary : MaskKind::kMultilabel);
    }
    bad_header("unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    bad_header(e.what());
  }
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void write_container(const ContainerObject& object,
                     const std::filesystem::path& path) {
  write_file_bytes(path, encode_container(object));
}

ContainerObject read_container(const std::filesystem::path& path) {
  return decode_container(read_file_bytes(path));
}

namespace {
template <typename T>
T read_kind(const std::filesystem::path& path, const char* name) {
  ContainerObject obj = read_container(path);
  if (auto* v = std::get_if<T>(&obj)) return std::move(*v);
  throw Error(ErrorCode::kInvalidArgument,
              path.string() + " does not hold " + name);
}
}  // namespace

ChannelData read_channels(const std::filesystem::path& path) {
  return read_kind<ChannelData>(path, "channel data");
}
Image2D read_image(const std::filesystem::path& path) {
  return read_kind<Image2D>(path, "an image");
}
LabelMask read_mask(const std::filesystem::path& path) {
  return read_kind<LabelMask>(path, "a mask");
}

}  // namespace pasam

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

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "pasam/core/types.hpp"

namespace pasam {

// PAZ container, little-endian throughout:
//   bytes 0-3   magic "PAZ1"
//   bytes 4-7   u32 header length H
//   bytes 8..   H bytes of UTF-8 JSON header
//   remainder   raw row-major payload (f32 for channels/images, u16 masks)
using ContainerObject = std::variant<ChannelData, Image2D, LabelMask>;

inline constexpr std::string_view kContainerMagic = "PAZ1";

std::string encode_container(const ContainerObject& object);
ContainerObject decode_container(std::string_view bytes);

void write_container(const ContainerObject& object,
                     const std::filesystem::path& path);
ContainerObject read_container(const std::filesystem::path& path);

// Typed readers; a container of another kind is kInvalidArgument.
ChannelData read_channels(const std::filesystem::path& path);
Image2D read_image(const std::filesystem::path& path);
LabelMask read_mask(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace pasam

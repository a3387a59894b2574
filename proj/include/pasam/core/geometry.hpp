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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

#include "pasam/core/types.hpp"

namespace pasam {

// Descriptor grammar (round-trips through ChannelData containers):
//   ring:<n>:<radius_mm>                    full ring, element 0 on +x
//   arc:<n>:<radius_mm>:<start_deg>:<span_deg>
//                                           element i at start + span*i/n
//   <base>@step:<first>:<step>:<count>      arithmetic subset of <base>
// Angles run from +x toward +y (the depth axis).

ArrayGeometry make_ring(int n_elements, double radius_mm);
ArrayGeometry make_arc(int n_elements, double radius_mm, double start_deg,
                       double span_deg);

/// Parses a descriptor; throws kInvalidArgument for anything outside the
/// grammar above.
ArrayGeometry parse_geometry_descriptor(const std::string& descriptor);

/// Names a subset of `parent` in descriptor form. Arithmetic index runs get a
/// parseable `@step` suffix; anything else gets a non-parseable `@list` tag.
std::string subset_descriptor(const std::string& parent,
                              std::span<const std::size_t> indices);

/// YAML/JSON document: either {descriptor: "..."} or
/// {descriptor: "...", elements: [[x_mm, y_mm], ...]}.
ArrayGeometry load_geometry_file(const std::filesystem::path& path);
void write_geometry_file(const ArrayGeometry& geometry,
                         const std::filesystem::path& path);

/// A path to an existing geometry file, otherwise a descriptor.
ArrayGeometry resolve_geometry(const std::string& file_or_descriptor);

}  // namespace pasam

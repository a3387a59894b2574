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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pasam/core/types.hpp"
#include "pasam/forward/simulate.hpp"
#include "pasam/maskops/maskops.hpp"
#include "pasam/segment/builtin.hpp"

namespace pasam::app {

// Declarative pipeline document (YAML, `version: 1`).

struct SourceSpec {
  forward::Source source;
  /// Inclusive slice range holding the source; unset means every slice.
  std::optional<std::pair<int, int>> slices;
};

struct ShellSpec {
  Ellipse outline;
  double spacing_mm = 0.1;
  double amplitude = 1.0;
};

/// Filled disk of point sources on a square lattice.
struct DiskSpec {
  double cx_mm = 0.0;
  double cy_mm = 0.0;
  double radius_mm = 1.0;
  double spacing_mm = 0.1;
  double amplitude = 1.0;
};

/// Evenly spaced point sources about `spacing_mm` apart along a segment,
/// endpoints included.
struct LineSpec {
  Point2 from;
  Point2 to;
  double spacing_mm = 0.1;
  double amplitude = 1.0;
};

struct NoiseSpec {
  double snr = 10.0;
  std::uint64_t seed = 0;
};

/// Keep every `step`-th channel; `expand` duplicates them back to the full
/// geometry before reconstruction.
struct SparseSpec {
  std::size_t step = 2;
  bool expand = true;
};

struct SliceSpec {
  int count = 1;
  double step_mm = 0.1;
};

struct SimulateInput {
  std::string geometry;
  double fs_hz = 40e6;
  int samples = 4096;
  double fc_hz = 5e6;
  double t0_s = 0.0;
  bool distance_decay = false;
  forward::MediumModel medium;
  std::vector<SourceSpec> sources;
  std::vector<ShellSpec> shells;
  std::vector<DiskSpec> disks;
  std::vector<LineSpec> lines;
  std::optional<NoiseSpec> noise;
  std::optional<SparseSpec> sparse;
  SliceSpec slices;
};

struct ContainerInput {
  std::filesystem::path path;
  /// Overrides the descriptor stored in the container.
  std::optional<std::string> geometry;
};

struct SingleRecon {
  double c_m_s = 1500.0;
};

struct DualRecon {
  double c_in_m_s = 1560.0;
  double c_out_m_s = 1500.0;
  /// Unset: fit from the segmentation mask.
  std::optional<Ellipse> ellipse;
};

struct BuiltinSegmentation {
  segment::BuiltinParams params;
};

struct RemoteSegmentation {
  std::string endpoint;
};

struct SegmentationSpec {
  std::variant<BuiltinSegmentation, RemoteSegmentation> backend;
  segment::SegmentMode mode = segment::SegmentMode::kBinary;
  std::vector<PromptPoint> prompts;
};

enum class MipOutput { kNone, kSliceNormal, kDepth };

struct SkinBandSpec {
  double depth_mm = 10.0;
  double offset_mm = 0.0;
  maskops::MaskMode mode = maskops::MaskMode::kRemove;
  MipOutput mip = MipOutput::kNone;
};

struct VesselSpec {
  maskops::VesselCriteria criteria;
};

struct PipelineConfig {
  int version = 1;
  std::variant<SimulateInput, ContainerInput> input;
  ImageGrid grid;
  std::variant<SingleRecon, DualRecon> reconstruction;
  std::optional<SegmentationSpec> segmentation;
  std::variant<std::monostate, SkinBandSpec, VesselSpec> postprocess;
  std::filesystem::path output_dir;
  /// Defaults to `<output_dir>.quarantine`.
  std::filesystem::path quarantine_dir;
  int threads = 0;

  /// Structural rules; path existence is checked when the run loads inputs.
  void validate() const;
};

/// Relative paths resolve against `base_dir`.
PipelineConfig parse_pipeline_config(const std::string& yaml_text,
                                     const std::filesystem::path& base_dir = ".");
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// "keep" / "remove".
maskops::MaskMode parse_mask_mode(const std::string& text);
/// "none" / "slice-normal" / "depth".
MipOutput parse_mip_output(const std::string& text);

}  // namespace pasam::app

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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pasam/app/config.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/types.hpp"

namespace pasam::app {

struct StageRecord {
  std::string name;
  double wall_ms = 0.0;
  nlohmann::json params;
};

struct RunReport {
  bool ok = false;
  std::vector<StageRecord> stages;
  /// Every file the run wrote, in its final location.
  std::vector<std::filesystem::path> artifacts;
  std::string failed_stage;
  std::string error_code;
  std::string error_message;

  nlohmann::json to_json() const;
};

/// Raised when a stage fails; the quarantine directory then holds the
/// partial outputs and a failed report.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorCode code, const std::string& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// In-memory results of a run, slice 0 for multi-slice inputs.
struct PipelineResult {
  RunReport report;
  std::optional<Image2D> reconstruction;  // single-SoS (or explicit dual) image
  std::optional<LabelMask> mask;
  std::optional<Ellipse> ellipse;
  std::optional<Image2D> dualsos;
  std::optional<Image2D> skinband;
  std::optional<Image2D> mip;
  std::optional<LabelMask> vessels;
};

/// Point sources of the simulated phantom present in `slice`.
forward::Phantom build_phantom(const SimulateInput& input, int slice);

/// Runs the stages in order and moves the outputs into `output_dir` only
/// after every stage succeeded.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace pasam::app

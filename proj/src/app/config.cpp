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

#include "pasam/app/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pasam/core/error.hpp"
#include "pasam/core/geometry.hpp"

namespace pasam::app {
namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kConfig, where + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) bad(where, "expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) bad(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) bad(where, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(where, "cannot read '" + node.Scalar() + "'");
  }
}

template <typename T>
T optional_scalar(const YAML::Node& parent, const char* key, T fallback,
                  const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  return scalar<T>(n, where + "." + key);
}

template <typename T>
T required_scalar(const YAML::Node& parent, const char* key, const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) bad(where, std::string("missing '") + key + "'");
  return scalar<T>(n, where + "." + key);
}

Ellipse ellipse_node(const YAML::Node& n, const std::string& where) {
  check_keys(n, where, {"cx", "cy", "a", "b", "theta", "theta_deg"});
  if (n["theta"] && n["theta_deg"]) bad(where, "give theta or theta_deg, not both");
  const double theta = n["theta_deg"]
                           ? required_scalar<double>(n, "theta_deg", where) * std::numbers::pi / 180.0
                           : optional_scalar<double>(n, "theta", 0.0, where);
  try {
    return make_ellipse(required_scalar<double>(n, "cx", where),
                        required_scalar<double>(n, "cy", where),
                        required_scalar<double>(n, "a", where),
                        required_scalar<double>(n, "b", where), theta);
  } catch (const Error& e) {
    bad(where, e.what());
  }
}

ImageGrid grid_node(const YAML::Node& n, const std::string& where) {
  check_keys(n, where, {"width", "height", "pitch_mm", "origin_x_mm", "origin_y_mm", "center"});
  ImageGrid g;
  g.width_px = required_scalar<int>(n, "width", where);
  g.height_px = required_scalar<int>(n, "height", where);
  g.pitch_mm = optional_scalar<double>(n, "pitch_mm", 0.1, where);
  if (n["center"]) {
    if (n["origin_x_mm"] || n["origin_y_mm"]) bad(where, "give center or origin, not both");
    const YAML::Node c = n["center"];
    if (!c.IsSequence() || c.size() != 2) bad(where + ".center", "expected [x_mm, y_mm]");
    g.origin_x_mm = scalar<double>(c[0], where + ".center") - 0.5 * (g.width_px - 1) * g.pitch_mm;
    g.origin_y_mm = scalar<double>(c[1], where + ".center") - 0.5 * (g.height_px - 1) * g.pitch_mm;
  } else {
    g.origin_x_mm = optional_scalar<double>(n, "origin_x_mm", 0.0, where);
    g.origin_y_mm = optional_scalar<double>(n, "origin_y_mm", 0.0, where);
  }
  try {
    g.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return g;
}

forward::MediumModel medium_node(const YAML::Node& n, const std::string& where) {
  check_keys(n, where, {"mode", "c", "c_in", "c_out", "boundary"});
  const auto mode = optional_scalar<std::string>(n, "mode", "uniform", where);
  forward::MediumModel m;
  if (mode == "uniform") {
    m = forward::MediumModel::uniform(optional_scalar<double>(n, "c", 1500.0, where));
  } else if (mode == "dual") {
    if (!n["boundary"]) bad(where, "dual medium needs a boundary ellipse");
    m = forward::MediumModel::dual(required_scalar<double>(n, "c_in", where),
                                   required_scalar<double>(n, "c_out", where),
                                   ellipse_node(n["boundary"], where + ".boundary"));
  } else {
    bad(where + ".mode", "expected uniform or dual, got '" + mode + "'");
  }
  try {
    m.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return m;
}

void phantom_node(const YAML::Node& n, const std::string& where, SimulateInput& sim) {
  check_keys(n, where, {"sources", "shells", "disks", "lines"});
  if (const YAML::Node list = n["sources"]) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = where + ".sources[" + std::to_string(i) + "]";
      const YAML::Node s = list[i];
      check_keys(s, w, {"x", "y", "amplitude", "slices"});
      SourceSpec spec;
      spec.source = {required_scalar<double>(s, "x", w), required_scalar<double>(s, "y", w),
                     optional_scalar<double>(s, "amplitude", 1.0, w)};
      if (const YAML::Node r = s["slices"]) {
        if (!r.IsSequence() || r.size() != 2) bad(w + ".slices", "expected [first, last]");
        spec.slices = std::pair{scalar<int>(r[0], w + ".slices"), scalar<int>(r[1], w + ".slices")};
      }
      sim.sources.push_back(spec);
    }
  }
  if (const YAML::Node list = n["shells"]) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = where + ".shells[" + std::to_string(i) + "]";
      const YAML::Node s = list[i];
      check_keys(s, w, {"ellipse", "spacing_mm", "amplitude"});
      if (!s["ellipse"]) bad(w, "missing 'ellipse'");
      sim.shells.push_back({ellipse_node(s["ellipse"], w + ".ellipse"),
                            optional_scalar<double>(s, "spacing_mm", 0.1, w),
                            optional_scalar<double>(s, "amplitude", 1.0, w)});
    }
  }
  if (const YAML::Node list = n["disks"]) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = where + ".disks[" + std::to_string(i) + "]";
      const YAML::Node s = list[i];
      check_keys(s, w, {"cx", "cy", "r", "spacing_mm", "amplitude"});
      sim.disks.push_back({required_scalar<double>(s, "cx", w), required_scalar<double>(s, "cy", w),
                           required_scalar<double>(s, "r", w),
                           optional_scalar<double>(s, "spacing_mm", 0.1, w),
                           optional_scalar<double>(s, "amplitude", 1.0, w)});
    }
  }
  if (const YAML::Node list = n["lines"]) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = where + ".lines[" + std::to_string(i) + "]";
      const YAML::Node s = list[i];
      check_keys(s, w, {"from", "to", "spacing_mm", "amplitude"});
      auto point = [&](const char* key) {
        const YAML::Node p = s[key];
        if (!p || !p.IsSequence() || p.size() != 2) bad(w + "." + key, "expected [x_mm, y_mm]");
        return Point2{scalar<double>(p[0], w + "." + key), scalar<double>(p[1], w + "." + key)};
      };
      sim.lines.push_back({point("from"), point("to"), optional_scalar<double>(s, "spacing_mm", 0.1, w),
                           optional_scalar<double>(s, "amplitude", 1.0, w)});
    }
  }
}

SimulateInput simulate_node(const YAML::Node& n, const std::string& where) {
  check_keys(n, where, {"geometry", "fs_hz", "samples", "fc_hz", "t0_s", "distance_decay",
                        "medium", "phantom", "noise", "sparse", "slices"});
  SimulateInput sim;
  sim.geometry = required_scalar<std::string>(n, "geometry", where);
  sim.fs_hz = optional_scalar<double>(n, "fs_hz", sim.fs_hz, where);
  sim.samples = optional_scalar<int>(n, "samples", sim.samples, where);
  sim.fc_hz = optional_scalar<double>(n, "fc_hz", sim.fc_hz, where);
  sim.t0_s = optional_scalar<double>(n, "t0_s", sim.t0_s, where);
  sim.distance_decay = optional_scalar<bool>(n, "distance_decay", false, where);
  if (n["medium"]) sim.medium = medium_node(n["medium"], where + ".medium");
  if (!n["phantom"]) bad(where, "missing 'phantom'");
  phantom_node(n["phantom"], where + ".phantom", sim);
  if (const YAML::Node z = n["noise"]) {
    check_keys(z, where + ".noise", {"snr", "seed"});
    sim.noise = NoiseSpec{required_scalar<double>(z, "snr", where + ".noise"),
                          required_scalar<std::uint64_t>(z, "seed", where + ".noise")};
  }
  if (const YAML::Node z = n["sparse"]) {
    check_keys(z, where + ".sparse", {"step", "expand"});
    sim.sparse = SparseSpec{optional_scalar<std::size_t>(z, "step", 2, where + ".sparse"),
                            optional_scalar<bool>(z, "expand", true, where + ".sparse")};
  }
  if (const YAML::Node z = n["slices"]) {
    check_keys(z, where + ".slices", {"count", "step_mm"});
    sim.slices = SliceSpec{required_scalar<int>(z, "count", where + ".slices"),
                           optional_scalar<double>(z, "step_mm", 0.1, where + ".slices")};
  }
  return sim;
}

std::vector<PromptPoint> prompts_node(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence()) bad(where, "expected a list of {x, y, label}");
  std::vector<PromptPoint> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    check_keys(n[i], w, {"x", "y", "label"});
    out.push_back({required_scalar<double>(n[i], "x", w), required_scalar<double>(n[i], "y", w),
                   optional_scalar<int>(n[i], "label", 1, w)});
  }
  return out;
}

segment::BuiltinParams builtin_params_node(const YAML::Node& n, const std::string& where) {
  segment::BuiltinParams p;
  if (!n || n.IsNull()) return p;
  check_keys(n, where, {"smooth_sigma_px", "threshold", "percentile", "grow_tolerance", "fill_holes"});
  p.smooth_sigma_px = optional_scalar<double>(n, "smooth_sigma_px", p.smooth_sigma_px, where);
  const auto mode = optional_scalar<std::string>(n, "threshold", "otsu", where);
  if (mode == "otsu") {
    p.threshold_mode = segment::ThresholdMode::kOtsu;
  } else if (mode == "percentile") {
    p.threshold_mode = segment::ThresholdMode::kPercentile;
  } else {
    bad(where + ".threshold", "expected otsu or percentile");
  }
  p.percentile = optional_scalar<double>(n, "percentile", p.percentile, where);
  p.grow_tolerance = optional_scalar<double>(n, "grow_tolerance", p.grow_tolerance, where);
  p.fill_holes = optional_scalar<bool>(n, "fill_holes", p.fill_holes, where);
  try {
    p.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return p;
}

SegmentationSpec segmentation_node(const YAML::Node& n, const std::string& where) {
  check_keys(n, where, {"builtin", "remote", "mode", "prompts"});
  if (static_cast<bool>(n["builtin"]) == static_cast<bool>(n["remote"])) {
    bad(where, "exactly one of builtin or remote is required");
  }
  SegmentationSpec spec;
  if (n["builtin"]) {
    spec.backend = BuiltinSegmentation{builtin_params_node(n["builtin"], where + ".builtin")};
  } else {
    const YAML::Node r = n["remote"];
    check_keys(r, where + ".remote", {"endpoint"});
    spec.backend = RemoteSegmentation{required_scalar<std::string>(r, "endpoint", where + ".remote")};
  }
  const auto mode = optional_scalar<std::string>(n, "mode", "binary", where);
  if (mode == "binary") {
    spec.mode = segment::SegmentMode::kBinary;
  } else if (mode == "multilabel") {
    spec.mode = segment::SegmentMode::kMultilabel;
  } else {
    bad(where + ".mode", "expected binary or multilabel");
  }
  if (!n["prompts"]) bad(where, "missing 'prompts'");
  spec.prompts = prompts_node(n["prompts"], where + ".prompts");
  return spec;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

maskops::MaskMode parse_mask_mode(const std::string& text) {
  if (text == "keep") return maskops::MaskMode::kKeep;
  if (text == "remove") return maskops::MaskMode::kRemove;
  throw Error(ErrorCode::kInvalidArgument, "mask mode must be keep or remove, got '" + text + "'");
}

MipOutput parse_mip_output(const std::string& text) {
  if (text == "none") return MipOutput::kNone;
  if (text == "slice-normal") return MipOutput::kSliceNormal;
  if (text == "depth") return MipOutput::kDepth;
  throw Error(ErrorCode::kInvalidArgument,
              "mip must be none, slice-normal or depth, got '" + text + "'");
}

void PipelineConfig::validate() const {
  if (version != 1) bad("version", "only version 1 is supported");
  const auto* dual = std::get_if<DualRecon>(&reconstruction);
  if (dual && !dual->ellipse && !segmentation) {
    bad("reconstruction.dual", "fit-from-mask needs a segmentation stage");
  }
  if (std::holds_alternative<SkinBandSpec>(postprocess) && !segmentation) {
    bad("postprocess.skin_band", "needs a segmentation stage");
  }
  if (std::holds_alternative<VesselSpec>(postprocess) && !segmentation) {
    bad("postprocess.vessels", "needs a segmentation stage");
  }
  if (const auto* sim = std::get_if<SimulateInput>(&input)) {
    if (sim->slices.count < 1) bad("input.simulate.slices", "count must be >= 1");
    if (!(sim->slices.step_mm > 0.0)) bad("input.simulate.slices", "step_mm must be > 0");
    if (sim->sparse && sim->sparse->step < 1) bad("input.simulate.sparse", "step must be >= 1");
    if (sim->sources.empty() && sim->shells.empty() && sim->disks.empty() && sim->lines.empty()) {
      bad("input.simulate.phantom", "phantom has no sources");
    }
    for (const SourceSpec& s : sim->sources) {
      if (s.slices && (s.slices->first < 0 || s.slices->second < s.slices->first ||
                       s.slices->second >= sim->slices.count)) {
        bad("input.simulate.phantom", "source slice range outside [0, count)");
      }
    }
  }
  if (output_dir.empty()) bad("outputs", "missing 'directory'");
}

PipelineConfig parse_pipeline_config(const std::string& yaml_text,
                                     const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid YAML: ") + e.what());
  }
  check_keys(root, "config", {"version", "input", "grid", "reconstruction", "segmentation",
                              "postprocess", "outputs", "threads"});
  PipelineConfig cfg;
  cfg.version = required_scalar<int>(root, "version", "config");

  const YAML::Node in = root["input"];
  if (!in) bad("config", "missing 'input'");
  check_keys(in, "input", {"simulate", "container"});
  if (static_cast<bool>(in["simulate"]) == static_cast<bool>(in["container"])) {
    bad("input", "exactly one of simulate or container is required");
  }
  if (in["simulate"]) {
    cfg.input = simulate_node(in["simulate"], "input.simulate");
  } else {
    const YAML::Node c = in["container"];
    check_keys(c, "input.container", {"path", "geometry"});
    ContainerInput ci;
    ci.path = resolve(base_dir, required_scalar<std::string>(c, "path", "input.container"));
    if (c["geometry"]) ci.geometry = scalar<std::string>(c["geometry"], "input.container.geometry");
    cfg.input = ci;
  }

  if (!root["grid"]) bad("config", "missing 'grid'");
  cfg.grid = grid_node(root["grid"], "grid");

  const YAML::Node rec = root["reconstruction"];
  if (!rec) bad("config", "missing 'reconstruction'");
  check_keys(rec, "reconstruction", {"single", "dual"});
  if (static_cast<bool>(rec["single"]) == static_cast<bool>(rec["dual"])) {
    bad("reconstruction", "exactly one of single or dual is required");
  }
  if (rec["single"]) {
    check_keys(rec["single"], "reconstruction.single", {"c"});
    cfg.reconstruction = SingleRecon{required_scalar<double>(rec["single"], "c", "reconstruction.single")};
  } else {
    const YAML::Node d = rec["dual"];
    const std::string w = "reconstruction.dual";
    check_keys(d, w, {"c_in", "c_out", "ellipse"});
    DualRecon dual{required_scalar<double>(d, "c_in", w), required_scalar<double>(d, "c_out", w),
                   std::nullopt};
    const YAML::Node e = d["ellipse"];
    if (!e) bad(w, "missing 'ellipse' (fit-from-mask or explicit parameters)");
    if (e.IsScalar()) {
      if (e.Scalar() != "fit-from-mask") bad(w + ".ellipse", "expected fit-from-mask or a mapping");
    } else {
      dual.ellipse = ellipse_node(e, w + ".ellipse");
    }
    cfg.reconstruction = dual;
  }

  if (root["segmentation"]) cfg.segmentation = segmentation_node(root["segmentation"], "segmentation");

  if (const YAML::Node post = root["postprocess"]) {
    if (post.IsScalar()) {
      if (post.Scalar() != "none") bad("postprocess", "expected none, skin_band or vessels");
    } else {
      check_keys(post, "postprocess", {"skin_band", "vessels", "none"});
      if (post.size() != 1) bad("postprocess", "exactly one postprocess kind is allowed");
      if (const YAML::Node sb = post["skin_band"]) {
        const std::string w = "postprocess.skin_band";
        check_keys(sb, w, {"depth_mm", "offset_mm", "mode", "mip"});
        SkinBandSpec spec;
        spec.depth_mm = optional_scalar<double>(sb, "depth_mm", spec.depth_mm, w);
        spec.offset_mm = optional_scalar<double>(sb, "offset_mm", spec.offset_mm, w);
        try {
          spec.mode = parse_mask_mode(optional_scalar<std::string>(sb, "mode", "remove", w));
          spec.mip = parse_mip_output(optional_scalar<std::string>(sb, "mip", "none", w));
        } catch (const Error& e) {
          bad(w, e.what());
        }
        if (!(spec.depth_mm > 0.0) || !(spec.offset_mm >= 0.0)) {
          bad(w, "depth_mm must be > 0 and offset_mm >= 0");
        }
        cfg.postprocess = spec;
      } else if (const YAML::Node v = post["vessels"]) {
        const std::string w = "postprocess.vessels";
        VesselSpec spec;
        if (!v.IsNull()) {
          check_keys(v, w, {"area_min_mm2", "area_max_mm2", "intensity_rel_min"});
          auto& c = spec.criteria;
          c.area_min_mm2 = optional_scalar<double>(v, "area_min_mm2", c.area_min_mm2, w);
          c.area_max_mm2 = optional_scalar<double>(v, "area_max_mm2", c.area_max_mm2, w);
          c.intensity_rel_min = optional_scalar<double>(v, "intensity_rel_min", c.intensity_rel_min, w);
        }
        try {
          spec.criteria.validate();
        } catch (const Error& e) {
          bad(w, e.what());
        }
        cfg.postprocess = spec;
      }
    }
  }

  const YAML::Node out = root["outputs"];
  if (!out) bad("config", "missing 'outputs'");
  check_keys(out, "outputs", {"directory", "quarantine"});
  cfg.output_dir = resolve(base_dir, required_scalar<std::string>(out, "directory", "outputs"));
  cfg.quarantine_dir =
      out["quarantine"]
          ? resolve(base_dir, scalar<std::string>(out["quarantine"], "outputs.quarantine"))
          : std::filesystem::path(cfg.output_dir.string() + ".quarantine");
  cfg.threads = optional_scalar<int>(root, "threads", 0, "config");
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_pipeline_config(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace pasam::app

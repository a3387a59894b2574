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

#include "pasam/app/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <system_error>

#include "pasam/core/container.hpp"
#include "pasam/core/geometry.hpp"
#include "pasam/core/png_io.hpp"
#include "pasam/dualsos/dualsos.hpp"
#include "pasam/forward/simulate.hpp"
#include "pasam/maskops/maskops.hpp"
#include "pasam/recon/das.hpp"
#include "pasam/segment/protocol.hpp"
#include "pasam/segment/remote.hpp"

namespace pasam::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json ellipse_json(const Ellipse& e) {
  return json{{"cx", e.cx_mm}, {"cy", e.cy_mm}, {"a", e.a_mm}, {"b", e.b_mm}, {"theta", e.theta_rad}};
}

json grid_json(const ImageGrid& g) {
  return json{{"origin_x_mm", g.origin_x_mm}, {"origin_y_mm", g.origin_y_mm},
              {"pitch_mm", g.pitch_mm},       {"width", g.width_px},
              {"height", g.height_px}};
}

const char* mask_mode_name(maskops::MaskMode m) {
  return m == maskops::MaskMode::kKeep ? "keep" : "remove";
}

// Everything derived from one distinct slice phantom.
struct SliceState {
  ChannelData channels{1, 1, 1.0, 0.0};
  std::optional<ArrayGeometry> geometry;
  std::optional<Image2D> reconstruction;
  std::optional<LabelMask> mask;
  std::optional<Ellipse> ellipse;
  std::optional<Image2D> dualsos;
  std::optional<Image2D> skinband;
  std::optional<LabelMask> vessels;

  const Image2D& final_image() const { return dualsos ? *dualsos : *reconstruction; }
};

class Runner {
 public:
  explicit Runner(RunReport& report) : report_(report) {}

  void stage(const std::string& name, json params, const std::function<void(json&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(params);
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e.code(), e.what());
    } catch (const std::exception& e) {
      throw StageError(name, ErrorCode::kInvalidArgument, e.what());
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report_.stages.push_back({name, ms, std::move(params)});
  }

 private:
  RunReport& report_;
};

// Maps every slice to the index of its distinct source set.
std::vector<std::size_t> slice_groups(const SimulateInput& sim, std::vector<int>& representative) {
  std::map<std::vector<bool>, std::size_t> seen;
  std::vector<std::size_t> group(static_cast<std::size_t>(sim.slices.count));
  for (int k = 0; k < sim.slices.count; ++k) {
    std::vector<bool> key;
    for (const SourceSpec& s : sim.sources) {
      key.push_back(!s.slices || (k >= s.slices->first && k <= s.slices->second));
    }
    const auto [it, inserted] = seen.emplace(key, representative.size());
    if (inserted) representative.push_back(k);
    group[static_cast<std::size_t>(k)] = it->second;
  }
  return group;
}

}  // namespace

StageError::StageError(std::string stage, ErrorCode code, const std::string& cause)
    : Error(code, "stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

json RunReport::to_json() const {
  json stages_json = json::array();
  for (const StageRecord& s : stages) {
    stages_json.push_back({{"name", s.name}, {"wall_ms", s.wall_ms}, {"params", s.params}});
  }
  json artifacts_json = json::array();
  for (const fs::path& p : artifacts) artifacts_json.push_back(p.string());
  json out{{"version", 1},
           {"status", ok ? "ok" : "failed"},
           {"stages", stages_json},
           {"artifacts", artifacts_json}};
  if (!ok) {
    out["error"] = {{"stage", failed_stage}, {"code", error_code}, {"message", error_message}};
  }
  return out;
}

forward::Phantom build_phantom(const SimulateInput& input, int slice) {
  forward::Phantom phantom;
  for (const SourceSpec& s : input.sources) {
    if (!s.slices || (slice >= s.slices->first && slice <= s.slices->second)) {
      phantom.sources.push_back(s.source);
    }
  }
  for (const ShellSpec& s : input.shells) {
    forward::add_ellipse_shell(phantom, s.outline, s.spacing_mm, s.amplitude);
  }
  for (const DiskSpec& d : input.disks) {
    if (!(d.spacing_mm > 0.0) || !(d.radius_mm > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "disk radius and spacing must be > 0");
    }
    const int n = static_cast<int>(std::floor(d.radius_mm / d.spacing_mm));
    for (int j = -n; j <= n; ++j) {
      for (int i = -n; i <= n; ++i) {
        const double dx = i * d.spacing_mm, dy = j * d.spacing_mm;
        if (dx * dx + dy * dy <= d.radius_mm * d.radius_mm) {
          phantom.sources.push_back({d.cx_mm + dx, d.cy_mm + dy, d.amplitude});
        }
      }
    }
  }
  for (const LineSpec& l : input.lines) {
    if (!(l.spacing_mm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "line spacing must be > 0");
    const double length = std::hypot(l.to.x - l.from.x, l.to.y - l.from.y);
    const int n = static_cast<int>(std::floor(length / l.spacing_mm + 1e-9));
    for (int i = 0; i <= n; ++i) {
      const double t = n == 0 ? 0.0 : static_cast<double>(i) / n;
      phantom.sources.push_back({l.from.x + t * (l.to.x - l.from.x), l.from.y + t * (l.to.y - l.from.y),
                                 l.amplitude});
    }
  }
  phantom.validate();
  return phantom;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult result;
  RunReport& report = result.report;
  Runner run(report);

  std::error_code ec;
  fs::remove_all(cfg.quarantine_dir, ec);
  fs::create_directories(cfg.quarantine_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create " + cfg.quarantine_dir.string() + ": " + ec.message());
  }
  std::vector<fs::path> staged;  // file names relative to the quarantine dir
  auto stage_file = [&](const fs::path& name) {
    staged.push_back(name);
    return cfg.quarantine_dir / name;
  };

  recon::DasOptions das;
  das.threads = cfg.threads;

  std::vector<int> representative;
  std::vector<std::size_t> group = {0};
  std::vector<SliceState> slices;

  try {
    // Input.
    if (const auto* sim = std::get_if<SimulateInput>(&cfg.input)) {
      group = slice_groups(*sim, representative);
      json params{{"geometry", sim->geometry},       {"fs_hz", sim->fs_hz},
                  {"samples", sim->samples},          {"fc_hz", sim->fc_hz},
                  {"t0_s", sim->t0_s},                {"slices", sim->slices.count},
                  {"distinct_slices", representative.size()},
                  {"medium", sim->medium.mode == forward::MediumMode::kDual ? "dual" : "uniform"}};
      run.stage("simulate", params, [&](json& p) {
        const ArrayGeometry geometry = resolve_geometry(sim->geometry);
        forward::SimulateOptions opts;
        opts.fc_hz = sim->fc_hz;
        opts.t0_s = sim->t0_s;
        opts.distance_decay = sim->distance_decay;
        opts.extent = cfg.grid;
        opts.threads = cfg.threads;
        std::size_t n_sources = 0;
        for (const int k : representative) {
          const forward::Phantom phantom = build_phantom(*sim, k);
          n_sources += phantom.sources.size();
          SliceState s;
          s.channels = forward::simulate(phantom, geometry, sim->medium, sim->fs_hz, sim->samples, opts);
          s.geometry = geometry;
          if (sim->noise) {
            s.channels = forward::add_gaussian_noise(s.channels, sim->noise->snr,
                                                     sim->noise->seed + static_cast<std::uint64_t>(k));
          }
          if (sim->sparse) {
            const auto idx = forward::strided_indices(geometry.size(), sim->sparse->step);
            auto [sub, sub_geom] = forward::subset_channels(s.channels, geometry, idx);
            if (sim->sparse->expand) {
              auto [dense, dense_geom] = recon::expand_sparse_channels(sub, geometry);
              s.channels = std::move(dense);
              s.geometry = std::move(dense_geom);
            } else {
              s.channels = std::move(sub);
              s.geometry = std::move(sub_geom);
            }
          }
          if (sim->medium.boundary) p["boundary"] = ellipse_json(*sim->medium.boundary);
          slices.push_back(std::move(s));
        }
        p["sources"] = n_sources;
        if (sim->noise) p["noise"] = {{"snr", sim->noise->snr}, {"seed", sim->noise->seed}};
        if (sim->sparse) p["sparse"] = {{"step", sim->sparse->step}, {"expand", sim->sparse->expand}};
      });
    } else {
      const auto& in = std::get<ContainerInput>(cfg.input);
      representative = {0};
      run.stage("load", json{{"path", in.path.string()}}, [&](json& p) {
        if (!fs::exists(in.path)) {
          throw Error(ErrorCode::kIo, "input file not found: " + in.path.string());
        }
        SliceState s;
        s.channels = read_channels(in.path);
        const std::string descriptor = in.geometry ? *in.geometry : s.channels.geometry_descriptor();
        if (descriptor.empty()) {
          throw Error(ErrorCode::kConfig, in.path.string() +
                                              " carries no geometry descriptor; set input.container.geometry");
        }
        s.geometry = resolve_geometry(descriptor);
        p["geometry"] = descriptor;
        p["channels"] = s.channels.n_channels();
        p["samples"] = s.channels.n_samples();
        slices.push_back(std::move(s));
      });
    }

    const auto* dual = std::get_if<DualRecon>(&cfg.reconstruction);
    const bool explicit_dual = dual && dual->ellipse;

    auto run_dualsos = [&]() {
      run.stage("dualsos",
                json{{"c_in", dual->c_in_m_s}, {"c_out", dual->c_out_m_s}, {"grid", grid_json(cfg.grid)},
                     {"ellipse_source", explicit_dual ? "explicit" : "fit-from-mask"}},
                [&](json&) {
                  for (SliceState& s : slices) {
                    const Ellipse e = explicit_dual ? *dual->ellipse : *s.ellipse;
                    s.dualsos = dualsos::das_dual_sos(s.channels, *s.geometry, cfg.grid, e,
                                                      dual->c_in_m_s, dual->c_out_m_s, das);
                  }
                });
    };

    if (explicit_dual) {
      run_dualsos();
    } else {
      const double c = dual ? dual->c_out_m_s : std::get<SingleRecon>(cfg.reconstruction).c_m_s;
      run.stage("reconstruct", json{{"c", c}, {"grid", grid_json(cfg.grid)}}, [&](json&) {
        for (SliceState& s : slices) {
          s.reconstruction = recon::das_reconstruct(s.channels, *s.geometry, cfg.grid, c, das);
        }
      });
    }

    if (cfg.segmentation) {
      const SegmentationSpec& seg = *cfg.segmentation;
      json params{{"mode", segment::mode_name(seg.mode)},
                  {"prompts", segment::encode_prompts(seg.prompts)}};
      if (const auto* b = std::get_if<BuiltinSegmentation>(&seg.backend)) {
        params["backend"] = "builtin";
        params["smooth_sigma_px"] = b->params.smooth_sigma_px;
        params["threshold"] =
            b->params.threshold_mode == segment::ThresholdMode::kOtsu ? "otsu" : "percentile";
        params["grow_tolerance"] = b->params.grow_tolerance;
        params["fill_holes"] = b->params.fill_holes;
      } else {
        params["backend"] = "remote";
        params["endpoint"] = std::get<RemoteSegmentation>(seg.backend).endpoint;
      }
      run.stage("segment", params, [&](json& p) {
        double backend_ms = 0.0;
        for (SliceState& s : slices) {
          // The explicit-dual image stands in for the reconstruction.
          const segment::SegmentRequest request{s.reconstruction ? *s.reconstruction : *s.dualsos,
                                                seg.prompts, seg.mode};
          if (const auto* b = std::get_if<BuiltinSegmentation>(&seg.backend)) {
            s.mask = segment::builtin_segment(request, b->params);
          } else {
            segment::SegmentResult r =
                segment::remote_segment(std::get<RemoteSegmentation>(seg.backend).endpoint, request);
            backend_ms += r.backend_elapsed_ms;
            s.mask = std::move(r.mask);
          }
        }
        p["foreground_px"] = slices.front().mask->foreground_count();
        if (std::holds_alternative<RemoteSegmentation>(seg.backend)) p["backend_elapsed_ms"] = backend_ms;
      });
    }

    if (dual && !explicit_dual) {
      run.stage("fit_ellipse", json::object(), [&](json& p) {
        for (SliceState& s : slices) s.ellipse = dualsos::fit_ellipse_from_mask(*s.mask);
        p["ellipse"] = ellipse_json(*slices.front().ellipse);
      });
      run_dualsos();
    }

    if (const auto* sb = std::get_if<SkinBandSpec>(&cfg.postprocess)) {
      run.stage("skin_band",
                json{{"depth_mm", sb->depth_mm}, {"offset_mm", sb->offset_mm}, {"mode", mask_mode_name(sb->mode)}},
                [&](json&) {
                  for (SliceState& s : slices) {
                    const LabelMask band = maskops::skin_band_mask(*s.mask, sb->depth_mm, sb->offset_mm);
                    s.skinband = maskops::apply_mask(s.final_image(), band, sb->mode);
                  }
                });
      if (sb->mip != MipOutput::kNone) {
        const double step =
            std::holds_alternative<SimulateInput>(cfg.input) ? std::get<SimulateInput>(cfg.input).slices.step_mm : 0.1;
        run.stage("mip",
                  json{{"axis", sb->mip == MipOutput::kSliceNormal ? "slice-normal" : "depth"},
                       {"slices", group.size()}, {"step_mm", step}},
                  [&](json&) {
                    std::vector<Image2D> volume;
                    volume.reserve(group.size());
                    for (const std::size_t g : group) volume.push_back(*slices[g].skinband);
                    result.mip = maskops::mip(maskops::stack_volume(std::move(volume), step),
                                              sb->mip == MipOutput::kSliceNormal ? maskops::MipAxis::kSliceNormal
                                                                                 : maskops::MipAxis::kDepth);
                  });
      }
    } else if (const auto* v = std::get_if<VesselSpec>(&cfg.postprocess)) {
      run.stage("vessels",
                json{{"area_min_mm2", v->criteria.area_min_mm2},
                     {"area_max_mm2", v->criteria.area_max_mm2},
                     {"intensity_rel_min", v->criteria.intensity_rel_min}},
                [&](json& p) {
                  for (SliceState& s : slices) {
                    s.vessels = maskops::refine_vessels(*s.mask, s.final_image(), v->criteria);
                  }
                  p["input_regions"] = slices.front().mask->num_labels();
                  p["kept_regions"] = slices.front().vessels->num_labels();
                });
    }

    // Outputs (slice 0).
    const SliceState& s0 = slices[group.front()];
    try {
      if (s0.reconstruction) write_container(*s0.reconstruction, stage_file("reconstruction.paz"));
      if (s0.mask) {
        write_container(*s0.mask, stage_file("mask.paz"));
        write_mask_png(*s0.mask, stage_file("mask.png"));
        staged.push_back("mask.png.json");
      }
      if (s0.ellipse) dualsos::write_ellipse_file(*s0.ellipse, stage_file("ellipse.yaml"));
      if (s0.dualsos) write_container(*s0.dualsos, stage_file("dualsos.paz"));
      if (s0.skinband) write_container(*s0.skinband, stage_file("skinband.paz"));
      if (result.mip) write_container(*result.mip, stage_file("mip.paz"));
      if (s0.vessels) {
        write_container(*s0.vessels, stage_file("vessels.paz"));
        write_mask_png(*s0.vessels, stage_file("vessels.png"));
        staged.push_back("vessels.png.json");
      }
    } catch (const Error& e) {
      throw StageError("write_outputs", e.code(), e.what());
    }

    result.reconstruction = s0.reconstruction;
    result.mask = s0.mask;
    result.ellipse = s0.ellipse;
    result.dualsos = s0.dualsos;
    result.skinband = s0.skinband;
    result.vessels = s0.vessels;
  } catch (const StageError& e) {
    report.ok = false;
    report.failed_stage = e.stage();
    report.error_code = std::string(error_code_name(e.code()));
    report.error_message = e.what();
    for (const fs::path& name : staged) report.artifacts.push_back(cfg.quarantine_dir / name);
    report.artifacts.push_back(cfg.quarantine_dir / "report.json");
    write_file_bytes(cfg.quarantine_dir / "report.json", report.to_json().dump(2) + "\n");
    throw;
  }

  // Publish.
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + cfg.output_dir.string() + ": " + ec.message());
  for (const fs::path& name : staged) {
    fs::rename(cfg.quarantine_dir / name, cfg.output_dir / name, ec);
    if (ec) {
      fs::copy_file(cfg.quarantine_dir / name, cfg.output_dir / name,
                    fs::copy_options::overwrite_existing);
    }
    report.artifacts.push_back(cfg.output_dir / name);
  }
  fs::remove_all(cfg.quarantine_dir, ec);
  report.ok = true;
  report.artifacts.push_back(cfg.output_dir / "report.json");
  write_file_bytes(cfg.output_dir / "report.json", result.report.to_json().dump(2) + "\n");
  return result;
}

}  // namespace pasam::app

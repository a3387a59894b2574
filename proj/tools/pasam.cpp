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

// pasam: command-line front end to every pipeline stage.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pasam/app/config.hpp"
#include "pasam/app/pipeline.hpp"
#include "pasam/app/service.hpp"
#include "pasam/core/container.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/geometry.hpp"
#include "pasam/core/png_io.hpp"
#include "pasam/core/text.hpp"
#include "pasam/dualsos/dualsos.hpp"
#include "pasam/forward/simulate.hpp"
#include "pasam/maskops/maskops.hpp"
#include "pasam/recon/das.hpp"
#include "pasam/segment/builtin.hpp"
#include "pasam/segment/protocol.hpp"
#include "pasam/segment/remote.hpp"

namespace {

using namespace pasam;
using nlohmann::json;

std::vector<double> split_numbers(const std::string& text, std::size_t min_n, std::size_t max_n,
                                  const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    out.push_back(parse_double(text.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.size() < min_n || out.size() > max_n) {
    throw Error(ErrorCode::kInvalidArgument, what + " expects " + std::to_string(min_n) +
                                                 (min_n == max_n ? "" : "-" + std::to_string(max_n)) +
                                                 " comma-separated numbers, got '" + text + "'");
  }
  return out;
}

struct GridOptions {
  int width = 500;
  int height = 500;
  double pitch_mm = 0.1;
  double origin_x_mm = 0.0;
  double origin_y_mm = 0.0;
  std::string center;

  void add(CLI::App* app) {
    app->add_option("--width", width, "Grid width in pixels")->capture_default_str();
    app->add_option("--height", height, "Grid height in pixels")->capture_default_str();
    app->add_option("--pitch", pitch_mm, "Pixel pitch in mm")->capture_default_str();
    app->add_option("--origin-x", origin_x_mm, "World x of pixel (0,0) center, mm");
    app->add_option("--origin-y", origin_y_mm, "World y of pixel (0,0) center, mm");
    app->add_option("--center", center, "Grid center x,y in mm (instead of an origin)");
  }

  ImageGrid grid() const {
    ImageGrid g{origin_x_mm, origin_y_mm, pitch_mm, width, height};
    if (!center.empty()) {
      const auto c = split_numbers(center, 2, 2, "--center");
      g.origin_x_mm = c[0] - 0.5 * (width - 1) * pitch_mm;
      g.origin_y_mm = c[1] - 0.5 * (height - 1) * pitch_mm;
    }
    g.validate();
    return g;
  }
};

double deg(double d) { return d * std::numbers::pi / 180.0; }

Ellipse ellipse_arg(const std::string& text, const std::string& what) {
  const auto v = split_numbers(text, 5, 5, what);
  return make_ellipse(v[0], v[1], v[2], v[3], deg(v[4]));
}

LabelMask read_mask_any(const std::string& path) {
  const std::string head = read_file_bytes(path).substr(0, 8);
  return looks_like_png(head) ? read_mask_png(path) : read_mask(path);
}

void write_mask_any(const LabelMask& mask, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
    write_mask_png(mask, path);
  } else {
    write_container(mask, path);
  }
}

ArrayGeometry geometry_for(const ChannelData& data, const std::string& override_descriptor) {
  const std::string d = override_descriptor.empty() ? data.geometry_descriptor() : override_descriptor;
  if (d.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "input carries no geometry descriptor; pass --geometry");
  }
  return resolve_geometry(d);
}

std::vector<PromptPoint> prompts_from(const std::vector<std::string>& args, const std::string& file) {
  std::vector<PromptPoint> out;
  if (!file.empty()) {
    try {
      const json j = json::parse(read_file_bytes(file));
      out = segment::decode_prompts(j.is_object() ? j.at("prompts") : j);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, file + ": " + e.what());
    }
  }
  for (const std::string& a : args) {
    const auto v = split_numbers(a, 2, 3, "--prompt");
    out.push_back({v[0], v[1], v.size() == 3 ? static_cast<int>(v[2]) : 1});
  }
  return out;
}

app::Service* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmentation-guided photoacoustic image processing"};
  app.require_subcommand(1);
  std::function<void()> action;

  // simulate
  struct {
    std::string geometry, out, boundary;
    double fs = 40e6, fc = 5e6, t0 = 0.0, c = 1500.0, snr = 0.0;
    std::optional<double> c_in, c_out;
    int samples = 4096;
    std::uint64_t seed = 0;
    bool decay = false;
    std::vector<std::string> sources, shells;
  } sim;
  auto* s_sim = app.add_subcommand("simulate", "Forward-simulate channel data for point sources");
  s_sim->add_option("--geometry", sim.geometry, "Array descriptor or geometry file")->required();
  s_sim->add_option("--fs", sim.fs, "Sampling rate, Hz")->capture_default_str();
  s_sim->add_option("--samples", sim.samples, "Samples per channel")->capture_default_str();
  s_sim->add_option("--fc", sim.fc, "Wavelet center frequency, Hz")->capture_default_str();
  s_sim->add_option("--t0", sim.t0, "Time of the first sample, s");
  s_sim->add_option("--c", sim.c, "Uniform speed of sound, m/s")->capture_default_str();
  s_sim->add_option("--c-in", sim.c_in, "Speed inside the boundary (dual medium), m/s");
  s_sim->add_option("--c-out", sim.c_out, "Speed outside the boundary (dual medium), m/s");
  s_sim->add_option("--boundary", sim.boundary, "Dual-medium ellipse cx,cy,a,b,theta_deg");
  s_sim->add_option("--source", sim.sources, "Point source x,y[,amplitude] in mm (repeatable)");
  s_sim->add_option("--shell", sim.shells, "Ellipse shell cx,cy,a,b,theta_deg,spacing[,amplitude]");
  s_sim->add_option("--snr", sim.snr, "Add white noise at this peak SNR (0 = none)");
  s_sim->add_option("--seed", sim.seed, "Noise seed");
  s_sim->add_flag("--decay", sim.decay, "Apply 1/sqrt(r) spreading");
  s_sim->add_option("--out", sim.out, "Output channel container")->required();
  s_sim->callback([&] {
    action = [&] {
      forward::Phantom phantom;
      for (const std::string& s : sim.sources) {
        const auto v = split_numbers(s, 2, 3, "--source");
        phantom.sources.push_back({v[0], v[1], v.size() == 3 ? v[2] : 1.0});
      }
      for (const std::string& s : sim.shells) {
        const auto v = split_numbers(s, 6, 7, "--shell");
        forward::add_ellipse_shell(phantom, make_ellipse(v[0], v[1], v[2], v[3], deg(v[4])), v[5],
                                   v.size() == 7 ? v[6] : 1.0);
      }
      forward::MediumModel medium = forward::MediumModel::uniform(sim.c);
      if (sim.c_in || sim.c_out || !sim.boundary.empty()) {
        if (!sim.c_in || !sim.c_out || sim.boundary.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "a dual medium needs --c-in, --c-out and --boundary");
        }
        medium = forward::MediumModel::dual(*sim.c_in, *sim.c_out, ellipse_arg(sim.boundary, "--boundary"));
      }
      forward::SimulateOptions opts;
      opts.fc_hz = sim.fc;
      opts.t0_s = sim.t0;
      opts.distance_decay = sim.decay;
      ChannelData data =
          forward::simulate(phantom, resolve_geometry(sim.geometry), medium, sim.fs, sim.samples, opts);
      if (sim.snr > 0.0) data = forward::add_gaussian_noise(data, sim.snr, sim.seed);
      write_container(data, sim.out);
    };
  });

  // recon
  struct {
    std::string in, geometry, out;
    double c = 1500.0;
    int threads = 0;
    GridOptions grid;
  } rec;
  auto* s_rec = app.add_subcommand("recon", "Single-speed delay-and-sum reconstruction");
  s_rec->add_option("--in", rec.in, "Channel container")->required();
  s_rec->add_option("--geometry", rec.geometry, "Override the container's geometry");
  s_rec->add_option("--c", rec.c, "Speed of sound, m/s")->capture_default_str();
  s_rec->add_option("--threads", rec.threads, "Worker threads (0 = all)");
  rec.grid.add(s_rec);
  s_rec->add_option("--out", rec.out, "Output image container")->required();
  s_rec->callback([&] {
    action = [&] {
      const ChannelData data = read_channels(rec.in);
      recon::DasOptions o;
      o.threads = rec.threads;
      write_container(recon::das_reconstruct(data, geometry_for(data, rec.geometry), rec.grid.grid(), rec.c, o),
                      rec.out);
    };
  });

  // dualsos
  struct {
    std::string in, geometry, out, ellipse, mask, ellipse_out;
    double c_in = 1560.0, c_out = 1500.0;
    int threads = 0;
    GridOptions grid;
  } dual;
  auto* s_dual = app.add_subcommand("dualsos", "Dual-speed-of-sound delay-and-sum reconstruction");
  s_dual->add_option("--in", dual.in, "Channel container")->required();
  s_dual->add_option("--geometry", dual.geometry, "Override the container's geometry");
  s_dual->add_option("--c-in", dual.c_in, "Speed inside the ellipse, m/s")->capture_default_str();
  s_dual->add_option("--c-out", dual.c_out, "Speed outside the ellipse, m/s")->capture_default_str();
  auto* o_ell = s_dual->add_option("--ellipse", dual.ellipse, "Ellipse file from fit-ellipse");
  auto* o_mask = s_dual->add_option("--mask", dual.mask, "Binary body mask to fit the ellipse from");
  o_ell->excludes(o_mask);
  s_dual->add_option("--ellipse-out", dual.ellipse_out, "Write the ellipse used");
  s_dual->add_option("--threads", dual.threads, "Worker threads (0 = all)");
  dual.grid.add(s_dual);
  s_dual->add_option("--out", dual.out, "Output image container")->required();
  s_dual->callback([&] {
    action = [&] {
      if (dual.ellipse.empty() && dual.mask.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "pass --ellipse or --mask");
      }
      const Ellipse e = dual.ellipse.empty() ? dualsos::fit_ellipse_from_mask(read_mask_any(dual.mask))
                                             : dualsos::read_ellipse_file(dual.ellipse);
      const ChannelData data = read_channels(dual.in);
      recon::DasOptions o;
      o.threads = dual.threads;
      write_container(dualsos::das_dual_sos(data, geometry_for(data, dual.geometry), dual.grid.grid(), e,
                                            dual.c_in, dual.c_out, o),
                      dual.out);
      if (!dual.ellipse_out.empty()) dualsos::write_ellipse_file(e, dual.ellipse_out);
    };
  });

  // segment
  struct {
    std::string image, prompts_file, mode = "binary", backend = "builtin", endpoint, out;
    std::string threshold = "otsu", image_encoding = "f32le-base64";
    std::vector<std::string> prompts;
    segment::BuiltinParams params;
    bool no_fill = false;
  } seg;
  auto* s_seg = app.add_subcommand("segment", "Prompt-driven segmentation");
  s_seg->add_option("--image", seg.image, "Image container")->required();
  s_seg->add_option("--prompt", seg.prompts, "Prompt x,y[,label] in pixels (repeatable)");
  s_seg->add_option("--prompts", seg.prompts_file, "JSON prompt list [{x, y, label}]");
  s_seg->add_option("--mode", seg.mode, "binary or multilabel")->capture_default_str();
  s_seg->add_option("--backend", seg.backend, "builtin or remote")->capture_default_str();
  s_seg->add_option("--endpoint", seg.endpoint, "Remote backend base URL");
  s_seg->add_option("--image-encoding", seg.image_encoding, "Remote transport: f32le-base64 or png-base64");
  s_seg->add_option("--sigma", seg.params.smooth_sigma_px, "Smoothing sigma, px")->capture_default_str();
  s_seg->add_option("--threshold", seg.threshold, "otsu or percentile")->capture_default_str();
  s_seg->add_option("--percentile", seg.params.percentile, "Percentile for --threshold percentile");
  s_seg->add_option("--grow", seg.params.grow_tolerance, "Relative region-growing tolerance");
  s_seg->add_flag("--no-fill-holes", seg.no_fill, "Keep enclosed background");
  s_seg->add_option("--out", seg.out, "Output mask (.png writes PNG + sidecar)")->required();
  s_seg->callback([&] {
    action = [&] {
      const segment::SegmentRequest request{read_image(seg.image), prompts_from(seg.prompts, seg.prompts_file),
                                            segment::parse_mode(seg.mode)};
      if (seg.backend == "builtin") {
        if (seg.threshold == "otsu") {
          seg.params.threshold_mode = segment::ThresholdMode::kOtsu;
        } else if (seg.threshold == "percentile") {
          seg.params.threshold_mode = segment::ThresholdMode::kPercentile;
        } else {
          throw Error(ErrorCode::kInvalidArgument, "--threshold must be otsu or percentile");
        }
        seg.params.fill_holes = !seg.no_fill;
        write_mask_any(segment::builtin_segment(request, seg.params), seg.out);
      } else if (seg.backend == "remote") {
        if (seg.endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "remote backend needs --endpoint");
        segment::RemoteOptions ro;
        if (seg.image_encoding == "png-base64") {
          ro.image_encoding = segment::ImageEncoding::kPngBase64;
        } else if (seg.image_encoding != "f32le-base64") {
          throw Error(ErrorCode::kInvalidArgument, "--image-encoding must be f32le-base64 or png-base64");
        }
        const segment::SegmentResult r = segment::remote_segment(seg.endpoint, request, ro);
        write_mask_any(r.mask, seg.out);
        std::fprintf(stderr, "backend %s: %.3f ms reported, %.3f ms round trip\n", r.backend.c_str(),
                     r.backend_elapsed_ms, r.round_trip_ms);
      } else {
        throw Error(ErrorCode::kInvalidArgument, "--backend must be builtin or remote");
      }
    };
  });

  // prompts
  struct {
    std::vector<std::string> prompts;
    std::string prompts_file;
  } pr;
  auto* s_pr = app.add_subcommand("prompts", "Print the wire serialization of a prompt list");
  s_pr->add_option("--prompt", pr.prompts, "Prompt x,y[,label] in pixels (repeatable)");
  s_pr->add_option("--prompts", pr.prompts_file, "JSON prompt list [{x, y, label}]");
  s_pr->callback([&] {
    action = [&] { std::cout << segment::serialize_prompts(prompts_from(pr.prompts, pr.prompts_file)) << "\n"; };
  });

  // fit-ellipse
  struct {
    std::string mask, out;
  } fit;
  auto* s_fit = app.add_subcommand("fit-ellipse", "Moment ellipse of a binary mask");
  s_fit->add_option("--mask", fit.mask, "Binary mask (container or PNG)")->required();
  s_fit->add_option("--out", fit.out, "Ellipse file (stdout when omitted)");
  s_fit->callback([&] {
    action = [&] {
      const Ellipse e = dualsos::fit_ellipse_from_mask(read_mask_any(fit.mask));
      if (fit.out.empty()) {
        std::cout << dualsos::format_ellipse(e);
      } else {
        dualsos::write_ellipse_file(e, fit.out);
      }
    };
  });

  // skinband
  struct {
    std::string image, mask, mode = "remove", out, band_out;
    double depth = 10.0, offset = 0.0;
  } sb;
  auto* s_sb = app.add_subcommand("skinband", "Keep or remove the band below the upper mask boundary");
  s_sb->add_option("--image", sb.image, "Image container")->required();
  s_sb->add_option("--mask", sb.mask, "Body mask")->required();
  s_sb->add_option("--depth", sb.depth, "Band depth, mm")->capture_default_str();
  s_sb->add_option("--offset", sb.offset, "Band start below the boundary, mm")->capture_default_str();
  s_sb->add_option("--mode", sb.mode, "keep or remove")->capture_default_str();
  s_sb->add_option("--band-out", sb.band_out, "Also write the band mask");
  s_sb->add_option("--out", sb.out, "Output image container")->required();
  s_sb->callback([&] {
    action = [&] {
      const LabelMask band = maskops::skin_band_mask(read_mask_any(sb.mask), sb.depth, sb.offset);
      write_container(maskops::apply_mask(read_image(sb.image), band, app::parse_mask_mode(sb.mode)), sb.out);
      if (!sb.band_out.empty()) write_mask_any(band, sb.band_out);
    };
  });

  // mip
  struct {
    std::vector<std::string> slices;
    double step = 0.1;
    std::string axis = "slice-normal", out;
  } mp;
  auto* s_mip = app.add_subcommand("mip", "Maximum-intensity projection of a slice stack");
  s_mip->add_option("--slice", mp.slices, "Slice image containers in order (repeatable)")->required();
  s_mip->add_option("--step", mp.step, "Slice spacing, mm")->capture_default_str();
  s_mip->add_option("--axis", mp.axis, "slice-normal or depth")->capture_default_str();
  s_mip->add_option("--out", mp.out, "Output image container")->required();
  s_mip->callback([&] {
    action = [&] {
      std::vector<Image2D> images;
      for (const std::string& p : mp.slices) images.push_back(read_image(p));
      const app::MipOutput axis = app::parse_mip_output(mp.axis);
      if (axis == app::MipOutput::kNone) throw Error(ErrorCode::kInvalidArgument, "--axis cannot be none");
      write_container(maskops::mip(maskops::stack_volume(std::move(images), mp.step),
                                   axis == app::MipOutput::kSliceNormal ? maskops::MipAxis::kSliceNormal
                                                                        : maskops::MipAxis::kDepth),
                      mp.out);
    };
  });

  // vessels
  struct {
    std::string image, mask, out;
    maskops::VesselCriteria criteria;
    bool stats = false;
  } ves;
  auto* s_ves = app.add_subcommand("vessels", "Area/intensity refinement of labelled regions");
  s_ves->add_option("--image", ves.image, "Image container")->required();
  s_ves->add_option("--mask", ves.mask, "Label mask")->required();
  s_ves->add_option("--area-min", ves.criteria.area_min_mm2, "Minimum area, mm^2")->capture_default_str();
  s_ves->add_option("--area-max", ves.criteria.area_max_mm2, "Maximum area, mm^2")->capture_default_str();
  s_ves->add_option("--intensity-rel", ves.criteria.intensity_rel_min,
                    "Minimum mean |value| relative to the image max")->capture_default_str();
  s_ves->add_flag("--stats", ves.stats, "Print region statistics as JSON");
  s_ves->add_option("--out", ves.out, "Output mask")->required();
  s_ves->callback([&] {
    action = [&] {
      const Image2D image = read_image(ves.image);
      const LabelMask kept = maskops::refine_vessels(read_mask_any(ves.mask), image, ves.criteria);
      write_mask_any(kept, ves.out);
      if (ves.stats && kept.kind() == MaskKind::kMultilabel) {
        json arr = json::array();
        for (const RegionStats& r : maskops::region_stats(kept, image)) {
          arr.push_back({{"label", r.label}, {"area_mm2", r.area_mm2}, {"mean_intensity", r.mean_intensity}});
        }
        std::cout << arr.dump(2) << "\n";
      }
    };
  });

  // expand-channels / subset-channels
  struct {
    std::string in, geometry, out;
    std::size_t step = 2, first = 0;
  } ch;
  auto* s_exp = app.add_subcommand("expand-channels", "Duplicate sparse channels onto the dense geometry");
  s_exp->add_option("--in", ch.in, "Sparse channel container")->required();
  s_exp->add_option("--geometry", ch.geometry, "Dense geometry (default: the subset's parent)");
  s_exp->add_option("--out", ch.out, "Output channel container")->required();
  s_exp->callback([&] {
    action = [&] {
      const ChannelData data = read_channels(ch.in);
      std::string dense = ch.geometry;
      if (dense.empty()) {
        dense = data.geometry_descriptor().substr(0, data.geometry_descriptor().find('@'));
      }
      if (dense.empty()) throw Error(ErrorCode::kInvalidArgument, "pass --geometry for the dense array");
      write_container(recon::expand_sparse_channels(data, resolve_geometry(dense)).first, ch.out);
    };
  });
  auto* s_sub = app.add_subcommand("subset-channels", "Keep every step-th channel");
  s_sub->add_option("--in", ch.in, "Channel container")->required();
  s_sub->add_option("--geometry", ch.geometry, "Override the container's geometry");
  s_sub->add_option("--step", ch.step, "Channel stride")->capture_default_str();
  s_sub->add_option("--first", ch.first, "First channel kept")->capture_default_str();
  s_sub->add_option("--out", ch.out, "Output channel container")->required();
  s_sub->callback([&] {
    action = [&] {
      const ChannelData data = read_channels(ch.in);
      const ArrayGeometry geometry = geometry_for(data, ch.geometry);
      const auto idx = forward::strided_indices(geometry.size(), ch.step, ch.first);
      write_container(forward::subset_channels(data, geometry, idx).first, ch.out);
    };
  });

  // pipeline run
  std::string config_path;
  auto* s_pipe = app.add_subcommand("pipeline", "Declarative end-to-end runs");
  s_pipe->require_subcommand(1);
  auto* s_run = s_pipe->add_subcommand("run", "Run a pipeline config");
  s_run->add_option("config", config_path, "Pipeline config")->required();
  s_run->callback([&] {
    action = [&] {
      const app::PipelineResult r = app::run_pipeline(app::load_pipeline_config(config_path));
      std::cout << r.report.to_json().dump(2) << "\n";
    };
  });

  // serve
  struct {
    std::string bind = "127.0.0.1:8080", remote;
    int max_jobs = 2;
    double job_timeout = 300.0;
  } srv;
  auto* s_srv = app.add_subcommand("serve", "HTTP service for the prompt UI");
  s_srv->add_option("--bind", srv.bind, "host:port")->capture_default_str();
  s_srv->add_option("--remote", srv.remote, "Remote segmentation backend base URL");
  s_srv->add_option("--max-jobs", srv.max_jobs, "Concurrent reconstruction jobs")->capture_default_str();
  s_srv->add_option("--job-timeout", srv.job_timeout, "Per-job timeout, s")->capture_default_str();
  s_srv->callback([&] {
    action = [&] {
      app::ServiceConfig cfg;
      const auto colon = srv.bind.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--bind expects host:port");
      cfg.host = srv.bind.substr(0, colon);
      cfg.port = static_cast<int>(parse_long(srv.bind.substr(colon + 1)));
      if (!srv.remote.empty()) cfg.remote_endpoint = srv.remote;
      cfg.max_jobs = srv.max_jobs;
      cfg.job_timeout_s = srv.job_timeout;
      app::Service service(cfg);
      const int port = service.bind();
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "listening on %s:%d\n", cfg.host.c_str(), port);
      service.serve();
      g_service = nullptr;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (action) action();
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(error_code_name(e.code())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

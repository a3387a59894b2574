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

#include "pasam/app/service.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <mutex>
#include <random>
#include <semaphore>
#include <set>
#include <stop_token>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pasam/app/config.hpp"
#include "pasam/core/base64.hpp"
#include "pasam/core/container.hpp"
#include "pasam/core/error.hpp"
#include "pasam/core/geometry.hpp"
#include "pasam/core/png_io.hpp"
#include "pasam/core/text.hpp"
#include "pasam/dualsos/dualsos.hpp"
#include "pasam/maskops/maskops.hpp"
#include "pasam/recon/das.hpp"
#include "pasam/segment/protocol.hpp"
#include "pasam/segment/remote.hpp"

namespace pasam::app {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kBusy: return 503;
    case ErrorCode::kCancelled: return 504;
    case ErrorCode::kTransport:
    case ErrorCode::kMalformedResponse:
    case ErrorCode::kBackendError: return 502;
    case ErrorCode::kIo: return 500;
    case ErrorCode::kDegenerateImage:
    case ErrorCode::kDegenerateMask:
    case ErrorCode::kTooFewPixels:
    case ErrorCode::kNoForegroundPrompt: return 422;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& msg) {
  send_json(res, status, segment::encode_error(code, msg));
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("body is not valid JSON: ") + e.what());
  }
}

double number_or(const json& body, const char* key, double fallback) {
  const auto it = body.find(key);
  if (it == body.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a number");
  return it->get<double>();
}

double required_number(const json& body, const char* key) {
  if (!body.contains(key)) throw Error(ErrorCode::kInvalidArgument, std::string("missing '") + key + "'");
  return number_or(body, key, 0.0);
}

std::string string_or(const json& body, const char* key, const std::string& fallback) {
  const auto it = body.find(key);
  if (it == body.end()) return fallback;
  if (!it->is_string()) throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a string");
  return it->get<std::string>();
}

ImageGrid grid_from_json(const json& g, int width, int height) {
  ImageGrid grid{0.0, 0.0, 0.1, width, height};
  if (!g.is_null()) {
    if (!g.is_object()) throw Error(ErrorCode::kInvalidArgument, "grid must be an object");
    grid.origin_x_mm = number_or(g, "origin_x_mm", 0.0);
    grid.origin_y_mm = number_or(g, "origin_y_mm", 0.0);
    grid.pitch_mm = number_or(g, "pitch_mm", 0.1);
    if (g.contains("width") || g.contains("height")) {
      grid.width_px = static_cast<int>(number_or(g, "width", width));
      grid.height_px = static_cast<int>(number_or(g, "height", height));
    }
  }
  grid.validate();
  return grid;
}

json grid_to_json(const ImageGrid& g) {
  return json{{"origin_x_mm", g.origin_x_mm}, {"origin_y_mm", g.origin_y_mm},
              {"pitch_mm", g.pitch_mm},       {"width", g.width_px},
              {"height", g.height_px}};
}

json ellipse_to_json(const Ellipse& e) {
  return json{{"cx", e.cx_mm}, {"cy", e.cy_mm}, {"a", e.a_mm}, {"b", e.b_mm}, {"theta", e.theta_rad}};
}

Ellipse ellipse_from_json(const json& e) {
  if (!e.is_object()) throw Error(ErrorCode::kInvalidArgument, "ellipse must be an object");
  return make_ellipse(required_number(e, "cx"), required_number(e, "cy"), required_number(e, "a"),
                      required_number(e, "b"), number_or(e, "theta", 0.0));
}

/// Mask raster onto a grid: labels <= 1 give a binary mask, otherwise a
/// dense multilabel mask.
LabelMask mask_from_json(const json& raster, const ImageGrid& grid) {
  const segment::MaskRaster m = segment::decode_mask_raster(raster, ErrorCode::kInvalidArgument);
  if (m.width != grid.width_px || m.height != grid.height_px) {
    throw Error(ErrorCode::kDimensionMismatch, "mask dimensions differ from the image");
  }
  const std::uint16_t top = m.labels.empty() ? 0 : *std::max_element(m.labels.begin(), m.labels.end());
  return LabelMask(grid, m.labels, top <= 1 ? MaskKind::kBinary : MaskKind::kMultilabel);
}

json stage_report(const std::string& name, const json& params, Clock::time_point t0) {
  return json{{"stage", name},
              {"params", params},
              {"wall_ms", std::chrono::duration<double, std::milli>(Clock::now() - t0).count()}};
}

segment::MaskEncoding mask_encoding_param(const httplib::Request& req) {
  const std::string enc = req.has_param("encoding") ? req.get_param_value("encoding") : "png-base64";
  if (enc == "png-base64") return segment::MaskEncoding::kPngBase64;
  if (enc == "u8le-base64") return segment::MaskEncoding::kU8leBase64;
  throw Error(ErrorCode::kInvalidArgument, "encoding must be png-base64 or u8le-base64");
}

struct Session {
  std::mutex mutex;
  Image2D image;
  std::vector<PromptPoint> prompts;

  explicit Session(Image2D img) : image(std::move(img)) {}
};

// Bounded pool: at most `max_jobs` jobs run at once, each on its own thread
// with a stop token that fires on timeout or shutdown.
class JobPool {
 public:
  explicit JobPool(int max_jobs) : slots_(std::max(1, max_jobs)) {}

  json run(const std::function<json(std::stop_token)>& job, double queue_timeout_s,
           double job_timeout_s) {
    if (shutting_down_) throw Error(ErrorCode::kBusy, "service is shutting down");
    if (!slots_.try_acquire_for(std::chrono::duration<double>(queue_timeout_s))) {
      throw Error(ErrorCode::kBusy, "all reconstruction workers are busy");
    }
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{slots_};

    std::promise<json> promise;
    std::future<json> future = promise.get_future();
    std::jthread worker([&job, &promise](std::stop_token stop) {
      try {
        promise.set_value(job(stop));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    });
    {
      std::lock_guard lock(mutex_);
      active_.insert(&worker);
    }
    const bool done = future.wait_for(std::chrono::duration<double>(job_timeout_s)) ==
                      std::future_status::ready;
    if (!done) worker.request_stop();
    future.wait();
    {
      std::lock_guard lock(mutex_);
      active_.erase(&worker);
    }
    if (!done) {
      try {
        future.get();
      } catch (...) {
      }
      throw Error(ErrorCode::kCancelled, "job exceeded the " + format_double(job_timeout_s) + " s timeout");
    }
    return future.get();
  }

  void cancel_all() {
    shutting_down_ = true;
    std::lock_guard lock(mutex_);
    for (std::jthread* t : active_) t->request_stop();
  }

 private:
  std::counting_semaphore<1024> slots_;
  std::mutex mutex_;
  std::set<std::jthread*> active_;
  std::atomic<bool> shutting_down_{false};
};

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  JobPool jobs;
  std::mutex sessions_mutex;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions;
  std::mt19937_64 id_rng{std::random_device{}()};
  int bound_port = -1;

  explicit Impl(ServiceConfig cfg) : config(std::move(cfg)), jobs(config.max_jobs) { routes(); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), std::string(error_code_name(e.code())), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "invalid_argument", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  std::shared_ptr<Session> session(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
    return it->second;
  }

  std::string add_session(Image2D image) {
    std::lock_guard lock(sessions_mutex);
    if (sessions.size() >= config.max_sessions) {
      throw Error(ErrorCode::kBusy, "session limit reached");
    }
    std::string id;
    do {
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id_rng()));
      id = buf;
    } while (sessions.count(id));
    sessions.emplace(id, std::make_shared<Session>(std::move(image)));
    return id;
  }

  // Image from {session_id} or {image raster, grid}.
  Image2D image_from_body(const json& body) {
    if (body.contains("session_id")) {
      const auto s = session(body.at("session_id").get<std::string>());
      std::lock_guard lock(s->mutex);
      return s->image;
    }
    if (!body.contains("image")) throw Error(ErrorCode::kInvalidArgument, "missing 'image' or 'session_id'");
    segment::ImageRaster r = segment::decode_image_raster(body["image"]);
    const ImageGrid grid = grid_from_json(body.value("grid", json()), r.width, r.height);
    if (grid.width_px != r.width || grid.height_px != r.height) {
      throw Error(ErrorCode::kDimensionMismatch, "grid dimensions differ from the image raster");
    }
    return Image2D(grid, std::move(r.values));
  }

  void routes() {
    server.set_payload_max_length(config.max_body_bytes);

    server.Get("/v1/healthz", guarded([this](const httplib::Request&, httplib::Response& res) {
      std::size_t n = 0;
      {
        std::lock_guard lock(sessions_mutex);
        n = sessions.size();
      }
      send_json(res, 200, json{{"status", "ok"}, {"protocol", 1}, {"sessions", n},
                               {"remote_backend", config.remote_endpoint.value_or("")}});
    }));

    server.Post("/v1/images", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<Image2D> image;
      if (looks_like_png(req.body)) {
        const GrayPng png = decode_gray_png(req.body);
        auto q = [&](const char* key, double fallback) {
          return req.has_param(key) ? parse_double(req.get_param_value(key)) : fallback;
        };
        const ImageGrid grid{q("origin_x_mm", 0.0), q("origin_y_mm", 0.0), q("pitch_mm", 0.1),
                             png.width, png.height};
        grid.validate();
        image.emplace(grid, std::vector<float>(png.pixels.begin(), png.pixels.end()));
      } else {
        ContainerObject obj = decode_container(req.body);
        if (!std::holds_alternative<Image2D>(obj)) {
          throw Error(ErrorCode::kInvalidArgument, "upload must be an image container or a PNG");
        }
        image.emplace(std::move(std::get<Image2D>(obj)));
      }
      const int w = image->width(), h = image->height();
      const json grid = grid_to_json(image->grid());
      const std::string id = add_session(std::move(*image));
      send_json(res, 201, json{{"session_id", id}, {"width", w}, {"height", h}, {"grid", grid}});
    }));

    server.Get(R"(/v1/images/([0-9a-f]+)/render)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = session(req.matches[1]);
      Image2D image = [&] {
        std::lock_guard lock(s->mutex);
        return s->image;
      }();
      const auto data = image.data();
      double lo = *std::min_element(data.begin(), data.end());
      double hi = *std::max_element(data.begin(), data.end());
      if (req.has_param("window")) {
        const std::string w = req.get_param_value("window");
        const auto comma = w.find(',');
        if (comma == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "window must be lo,hi");
        lo = parse_double(w.substr(0, comma));
        hi = parse_double(w.substr(comma + 1));
        if (!(hi > lo)) throw Error(ErrorCode::kInvalidArgument, "window needs hi > lo");
      }
      GrayPng png{image.width(), image.height(), 8, std::vector<std::uint16_t>(data.size(), 0)};
      if (hi > lo) {
        for (std::size_t i = 0; i < data.size(); ++i) {
          const double t = std::clamp((data[i] - lo) / (hi - lo), 0.0, 1.0);
          png.pixels[i] = static_cast<std::uint16_t>(std::lround(t * 255.0));
        }
      }
      res.status = 200;
      res.set_content(encode_gray_png(png), "image/png");
    }));

    server.Post(R"(/v1/images/([0-9a-f]+)/prompts)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = session(req.matches[1]);
      const json body = parse_body(req);
      const json& list = body.is_array() ? body : body.at("prompts");
      const std::vector<PromptPoint> prompts = segment::decode_prompts(list);
      std::string mode = req.has_param("mode") ? req.get_param_value("mode") : "append";
      if (body.is_object()) mode = string_or(body, "mode", mode);
      if (mode != "append" && mode != "replace") {
        throw Error(ErrorCode::kInvalidArgument, "mode must be append or replace");
      }
      std::lock_guard lock(s->mutex);
      for (const PromptPoint& p : prompts) validate_prompt(p, s->image.grid());
      if (mode == "replace") s->prompts.clear();
      s->prompts.insert(s->prompts.end(), prompts.begin(), prompts.end());
      send_json(res, 200, json{{"session_id", req.matches[1]},
                               {"count", s->prompts.size()},
                               {"prompts", segment::encode_prompts(s->prompts)}});
    }));

    server.Post(R"(/v1/images/([0-9a-f]+)/segment)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = session(req.matches[1]);
      const std::string backend = req.has_param("backend") ? req.get_param_value("backend") : "builtin";
      const segment::SegmentMode mode =
          segment::parse_mode(req.has_param("mode") ? req.get_param_value("mode") : "binary");
      const segment::MaskEncoding encoding = mask_encoding_param(req);
      std::optional<segment::SegmentRequest> request;
      {
        std::lock_guard lock(s->mutex);
        request.emplace(segment::SegmentRequest{s->image, s->prompts, mode});
      }
      std::optional<LabelMask> mask;
      double elapsed_ms = 0.0;
      std::string backend_name = backend;
      const auto t0 = Clock::now();
      if (backend == "builtin") {
        mask = segment::builtin_segment(*request, config.builtin);
        elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      } else if (backend == "remote") {
        if (!config.remote_endpoint) {
          throw Error(ErrorCode::kInvalidArgument, "no remote backend is configured");
        }
        segment::SegmentResult r = segment::remote_segment(*config.remote_endpoint, *request);
        mask = std::move(r.mask);
        elapsed_ms = r.backend_elapsed_ms;
        backend_name = "remote:" + r.backend;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "backend must be builtin or remote");
      }
      send_json(res, 200, json{{"session_id", req.matches[1]},
                               {"mask", segment::encode_mask_raster(*mask, encoding)},
                               {"num_labels", mask->num_labels()},
                               {"elapsed_ms", elapsed_ms},
                               {"backend", backend_name}});
    }));

    server.Post("/v1/pipeline/skinband", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto t0 = Clock::now();
      const json body = parse_body(req);
      const Image2D image = image_from_body(body);
      if (!body.contains("mask")) throw Error(ErrorCode::kInvalidArgument, "missing 'mask'");
      const LabelMask mask = mask_from_json(body["mask"], image.grid());
      const double depth = number_or(body, "depth_mm", 10.0);
      const double offset = number_or(body, "offset_mm", 0.0);
      const std::string mode = string_or(body, "mode", "remove");
      const LabelMask band = maskops::skin_band_mask(mask, depth, offset);
      const Image2D out = maskops::apply_mask(image, band, parse_mask_mode(mode));
      send_json(res, 200, json{{"image", segment::encode_raw_image_raster(out)},
                               {"band", segment::encode_mask_raster(band, segment::MaskEncoding::kPngBase64)},
                               {"report", stage_report("skin_band",
                                                       {{"depth_mm", depth}, {"offset_mm", offset}, {"mode", mode}},
                                                       t0)}});
    }));

    server.Post("/v1/pipeline/dualsos", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto t0 = Clock::now();
      const json body = parse_body(req);
      if (!body.contains("channels_paz")) throw Error(ErrorCode::kInvalidArgument, "missing 'channels_paz'");
      ContainerObject obj = decode_container(base64_decode(body["channels_paz"].get<std::string>()));
      if (!std::holds_alternative<ChannelData>(obj)) {
        throw Error(ErrorCode::kInvalidArgument, "channels_paz must hold a channel container");
      }
      const ChannelData channels = std::move(std::get<ChannelData>(obj));
      const std::string descriptor = string_or(body, "geometry", channels.geometry_descriptor());
      if (descriptor.empty()) throw Error(ErrorCode::kInvalidArgument, "missing 'geometry'");
      const ArrayGeometry geometry = parse_geometry_descriptor(descriptor);
      if (!body.contains("grid")) throw Error(ErrorCode::kInvalidArgument, "missing 'grid'");
      const json& g = body["grid"];
      const ImageGrid grid = grid_from_json(g, static_cast<int>(required_number(g, "width")),
                                            static_cast<int>(required_number(g, "height")));
      const double c_in = required_number(body, "c_in");
      const double c_out = required_number(body, "c_out");
      Ellipse ellipse;
      std::string source;
      if (body.contains("ellipse")) {
        ellipse = ellipse_from_json(body["ellipse"]);
        source = "explicit";
      } else if (body.contains("mask")) {
        ellipse = dualsos::fit_ellipse_from_mask(mask_from_json(body["mask"], grid));
        source = "fit-from-mask";
      } else {
        throw Error(ErrorCode::kInvalidArgument, "give 'ellipse' or 'mask'");
      }
      const json image_json = jobs.run(
          [&](std::stop_token stop) {
            recon::DasOptions das;
            das.stop = stop;
            return segment::encode_raw_image_raster(
                dualsos::das_dual_sos(channels, geometry, grid, ellipse, c_in, c_out, das));
          },
          config.queue_timeout_s, config.job_timeout_s);
      send_json(res, 200, json{{"image", image_json},
                               {"grid", grid_to_json(grid)},
                               {"ellipse", ellipse_to_json(ellipse)},
                               {"report", stage_report("dualsos",
                                                       {{"c_in", c_in}, {"c_out", c_out},
                                                        {"geometry", descriptor}, {"ellipse_source", source}},
                                                       t0)}});
    }));

    server.Post("/v1/pipeline/vessels", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto t0 = Clock::now();
      const json body = parse_body(req);
      const Image2D image = image_from_body(body);
      if (!body.contains("mask")) throw Error(ErrorCode::kInvalidArgument, "missing 'mask'");
      const LabelMask labels = mask_from_json(body["mask"], image.grid());
      maskops::VesselCriteria c;
      const json crit = body.value("criteria", json::object());
      c.area_min_mm2 = number_or(crit, "area_min_mm2", c.area_min_mm2);
      c.area_max_mm2 = number_or(crit, "area_max_mm2", c.area_max_mm2);
      c.intensity_rel_min = number_or(crit, "intensity_rel_min", c.intensity_rel_min);
      const LabelMask kept = maskops::refine_vessels(labels, image, c);
      json stats = json::array();
      if (kept.kind() == MaskKind::kMultilabel) {
        for (const RegionStats& r : maskops::region_stats(kept, image)) {
          stats.push_back({{"label", r.label}, {"area_px", r.area_px}, {"area_mm2", r.area_mm2},
                           {"mean_intensity", r.mean_intensity},
                           {"centroid_px", {r.centroid_px.x, r.centroid_px.y}}});
        }
      }
      send_json(res, 200, json{{"mask", segment::encode_mask_raster(kept, segment::MaskEncoding::kPngBase64)},
                               {"num_labels", kept.num_labels()},
                               {"regions", stats},
                               {"report", stage_report("vessels",
                                                       {{"area_min_mm2", c.area_min_mm2},
                                                        {"area_max_mm2", c.area_max_mm2},
                                                        {"intensity_rel_min", c.intensity_rel_min},
                                                        {"input_regions", labels.num_labels()}},
                                                       t0)}});
    }));
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
  Impl& s = *impl_;
  if (s.config.port == 0) {
    s.bound_port = s.server.bind_to_any_port(s.config.host);
  } else {
    s.bound_port = s.server.bind_to_port(s.config.host, s.config.port) ? s.config.port : -1;
  }
  if (s.bound_port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + s.config.host + ":" + std::to_string(s.config.port));
  }
  return s.bound_port;
}

void Service::serve() {
  if (impl_->bound_port < 0) bind();
  impl_->server.listen_after_bind();
}

void Service::stop() {
  impl_->jobs.cancel_all();
  impl_->server.stop();
}

}  // namespace pasam::app

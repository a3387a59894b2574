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

#include "pasam/core/geometry.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "pasam/core/error.hpp"
#include "pasam/core/text.hpp"

namespace pasam {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts(1);
  for (char ch : s) {
    if (ch == sep) {
      parts.emplace_back();
    } else {
      parts.back().push_back(ch);
    }
  }
  return parts;
}

[[noreturn]] void bad_descriptor(const std::string& d, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument,
              "bad geometry descriptor '" + d + "': " + why);
}

std::vector<Point2> arc_elements(int n, double radius_mm, double start_rad,
                                 double span_rad) {
  std::vector<Point2> elements;
  elements.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double phi = start_rad + span_rad * static_cast<double>(i) / n;
    elements.push_back({radius_mm * std::cos(phi), radius_mm * std::sin(phi)});
  }
  return elements;
}

void check_arc_args(long n, double radius_mm) {
  if (n < 1 || n > (1L << 20)) {
    throw Error(ErrorCode::kInvalidArgument, "element count out of range");
  }
  if (!(radius_mm > 0.0) || !std::isfinite(radius_mm)) {
    throw Error(ErrorCode::kInvalidArgument, "array radius must be > 0");
  }
}

ArrayGeometry parse_base(const std::string& descriptor,
                         const std::string& base) {
  const auto f = split(base, ':');
  try {
    if (f[0] == "ring" && f.size() == 3) {
      const long n = parse_long(f[1]);
      check_arc_args(n, parse_double(f[2]));
      return make_ring(static_cast<int>(n), parse_double(f[2]));
    }
    if (f[0] == "arc" && f.size() == 5) {
      const long n = parse_long(f[1]);
      check_arc_args(n, parse_double(f[2]));
      return make_arc(static_cast<int>(n), parse_double(f[2]),
                      parse_double(f[3]), parse_double(f[4]));
    }
  } catch (const Error& e) {
    bad_descriptor(descriptor, e.what());
  }
  bad_descriptor(descriptor, "expected ring:<n>:<r> or arc:<n>:<r>:<start>:<span>");
}

}  // namespace

ArrayGeometry make_ring(int n_elements, double radius_mm) {
  check_arc_args(n_elements, radius_mm);
  return ArrayGeometry(
      arc_elements(n_elements, radius_mm, 0.0, 2.0 * std::numbers::pi),
      "ring:" + std::to_string(n_elements) + ":" + format_double(radius_mm));
}

ArrayGeometry make_arc(int n_elements, double radius_mm, double start_deg,
                       double span_deg) {
  check_arc_args(n_elements, radius_mm);
  constexpr double kDeg = std::numbers::pi / 180.0;
  return ArrayGeometry(
      arc_elements(n_elements, radius_mm, start_deg * kDeg, span_deg * kDeg),
      "arc:" + std::to_string(n_elements) + ":" + format_double(radius_mm) +
          ":" + format_double(start_deg) + ":" + format_double(span_deg));
}

ArrayGeometry parse_geometry_descriptor(const std::string& descriptor) {
  const auto at = descriptor.find('@');
  ArrayGeometry base = parse_base(descriptor, descriptor.substr(0, at));
  if (at == std::string::npos) return base;

  const auto sel = split(descriptor.substr(at + 1), ':');
  if (sel[0] != "step" || sel.size() != 4) {
    bad_descriptor(descriptor, "only @step:<first>:<step>:<count> subsets are parseable");
  }
  long first = 0, step = 0, count = 0;
  try {
    first = parse_long(sel[1]);
    step = parse_long(sel[2]);
    count = parse_long(sel[3]);
  } catch (const Error& e) {
    bad_descriptor(descriptor, e.what());
  }
  const long n = static_cast<long>(base.size());
  if (first < 0 || step < 1 || count < 1 || first + step * (count - 1) >= n) {
    bad_descriptor(descriptor, "subset indices out of range");
  }
  std::vector<Point2> elements;
  for (long k = 0; k < count; ++k) elements.push_back(base[first + step * k]);
  return ArrayGeometry(std::move(elements), descriptor);
}

std::string subset_descriptor(const std::string& parent,
                              std::span<const std::size_t> indices) {
  if (indices.empty()) return parent + "@list";
  const std::size_t step = indices.size() > 1 ? indices[1] - indices[0] : 1;
  bool arithmetic = step >= 1;
  for (std::size_t k = 1; k < indices.size() && arithmetic; ++k) {
    arithmetic = indices[k] - indices[k - 1] == step;
  }
  // Nested subsets are not parseable; only annotate.
  if (!arithmetic || parent.find('@') != std::string::npos) {
    return parent + "@list";
  }
  return parent + "@step:" + std::to_string(indices[0]) + ":" +
         std::to_string(step) + ":" + std::to_string(indices.size());
}

ArrayGeometry load_geometry_file(const std::filesystem::path& path) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kIo,
                "cannot read geometry file " + path.string() + ": " + e.what());
  }
  const std::string descriptor =
      doc["descriptor"] ? doc["descriptor"].as<std::string>() : "custom";
  if (!doc["elements"]) return parse_geometry_descriptor(descriptor);
  std::vector<Point2> elements;
  try {
    for (const auto& e : doc["elements"]) {
      if (!e.IsSequence() || e.size() != 2) {
        throw Error(ErrorCode::kInvalidArgument,
                    "geometry element must be [x_mm, y_mm]");
      }
      elements.push_back({e[0].as<double>(), e[1].as<double>()});
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad geometry file " + path.string() + ": " + e.what());
  }
  return ArrayGeometry(std::move(elements), descriptor);
}

void write_geometry_file(const ArrayGeometry& geometry,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "descriptor: \"" << geometry.descriptor() << "\"\nelements:\n";
  for (const Point2& e : geometry.elements()) {
    out << "  - [" << format_double(e.x) << ", " << format_double(e.y) << "]\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

ArrayGeometry resolve_geometry(const std::string& file_or_descriptor) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(file_or_descriptor, ec)) {
    return load_geometry_file(file_or_descriptor);
  }
  return parse_geometry_descriptor(file_or_descriptor);
}

}  // namespace pasam

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

#include "pasam/core/types.hpp"
#include "pasam/recon/das.hpp"

namespace pasam::dualsos {

/// Second-moment ellipse of a filled binary mask, in world mm: center at the
/// foreground centroid, semi-axes 2*sqrt(eigenvalues) of the coordinate
/// covariance (exact for a uniformly filled ellipse).
///
/// Throws kTooFewPixels below 5 foreground pixels and kDegenerateMask when
/// the foreground is collinear.
Ellipse fit_ellipse_from_mask(const LabelMask& mask);

/// das_reconstruct with tof_dual delays. With c_in == c_out the result is
/// bit-identical to das_reconstruct at that speed.
Image2D das_dual_sos(const ChannelData& data, const ArrayGeometry& geometry,
                     const ImageGrid& grid, const Ellipse& boundary,
                     double c_in_m_s, double c_out_m_s,
                     const recon::DasOptions& options = {});

// Key/value text document: cx, cy, a, b (mm) and theta (rad).
std::string format_ellipse(const Ellipse& e);
Ellipse parse_ellipse(const std::string& text);
void write_ellipse_file(const Ellipse& e, const std::filesystem::path& path);
Ellipse read_ellipse_file(const std::filesystem::path& path);

}  // namespace pasam::dualsos

// Copyright 2026 The ifct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <string>

#include "ifct/volume.hpp"

namespace ifct {

enum class DiameterMethod { Feret, EquivSphere, BBox };

std::string to_string(DiameterMethod method);
DiameterMethod parse_diameter_method(const std::string& text);

/// Largest distance between two foreground voxel centres, in mm.
double diameter_feret_mm(const Mask& mask);
/// Diameter of the sphere with the mask's physical volume.
double diameter_equiv_sphere_mm(const Mask& mask);
/// Largest axis-aligned extent between voxel centres, in mm.
double diameter_bbox_mm(const Mask& mask);
double calc_mass_diameter_cm(const Mask& mask, DiameterMethod method);

double mean_intensity_hu(const Volume& vol, const Mask& mask);
double mass_volume_mm3(const Mask& mask);

/// Symmetric Hausdorff distance between the voxel-centre sets, in mm.
double hausdorff_mm(const Mask& a, const Mask& b);

/// Foreground voxels with at least one face neighbour that is background or
/// outside the grid.
Mask boundary_mask(const Mask& mask);

/// `mask` plus every background voxel not reachable from the grid border
/// through face-adjacent background.
Mask fill_cavities(const Mask& mask);

/// Hausdorff distance between the boundary of `shell` and the boundary of
/// its cavity-filled version. Zero for masks without a cavity.
double border_thickness_mm(const Mask& shell);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

}  // namespace ifct

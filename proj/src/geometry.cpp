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

#include "ifct/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "ifct/error.hpp"

namespace ifct {
namespace {

using Point = std::array<double, 3>;

void require_nonempty(const Mask& mask, const char* what) {
  if (mask.empty()) throw EmptyMask(std::string(what) + ": mask is empty");
}

double dist2(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

std::vector<Point> centers(const Mask& mask) {
  std::vector<Point> out;
  for (std::size_t n : mask.foreground()) {
    out.push_back(voxel_center_mm(mask.spacing(), voxel_index(mask.dims(), n)));
  }
  return out;
}

// Max over `from` of min over `to`, squared. Breaks out of the inner loop as
// soon as a point cannot raise the running maximum.
double directed_hausdorff2(const std::vector<Point>& from, const std::vector<Point>& to) {
  double cmax = 0.0;
  for (const Point& x : from) {
    double cmin = std::numeric_limits<double>::infinity();
    for (const Point& y : to) {
      const double d = dist2(x, y);
      if (d < cmin) {
        cmin = d;
        if (cmin <= cmax) break;
      }
    }
    if (cmin > cmax) cmax = cmin;
  }
  return cmax;
}

}  // namespace

std::string to_string(DiameterMethod method) {
  switch (method) {
    case DiameterMethod::Feret: return "feret";
    case DiameterMethod::EquivSphere: return "equiv_sphere";
    case DiameterMethod::BBox: return "bbox";
  }
  return "";
}

DiameterMethod parse_diameter_method(const std::string& text) {
  if (text == "feret") return DiameterMethod::Feret;
  if (text == "equiv_sphere") return DiameterMethod::EquivSphere;
  if (text == "bbox") return DiameterMethod::BBox;
  throw InvalidArgument("unknown diameter method '" + text + "'");
}

double diameter_feret_mm(const Mask& mask) {
  require_nonempty(mask, "diameter_feret_mm");
  // The farthest pair lies on the convex hull, and an interior voxel is the
  // midpoint of two face neighbours, so boundary voxels suffice.
  const std::vector<Point> pts = centers(boundary_mask(mask));
  double best = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::max(best, dist2(pts[a], pts[b]));
  }
  return std::sqrt(best);
}

double diameter_equiv_sphere_mm(const Mask& mask) {
  require_nonempty(mask, "diameter_equiv_sphere_mm");
  return std::cbrt(6.0 * mass_volume_mm3(mask) / std::numbers::pi);
}

double diameter_bbox_mm(const Mask& mask) {
  require_nonempty(mask, "diameter_bbox_mm");
  std::array<std::uint32_t, 3> lo{UINT32_MAX, UINT32_MAX, UINT32_MAX}, hi{0, 0, 0};
  for (std::size_t n : mask.foreground()) {
    const VoxelIndex v = voxel_index(mask.dims(), n);
    const std::array<std::uint32_t, 3> c{v.i, v.j, v.k};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  const Spacing& s = mask.spacing();
  return std::max({(hi[0] - lo[0]) * double(s.sx), (hi[1] - lo[1]) * double(s.sy), (hi[2] - lo[2]) * double(s.sz)});
}

double calc_mass_diameter_cm(const Mask& mask, DiameterMethod method) {
  switch (method) {
    case DiameterMethod::Feret: return diameter_feret_mm(mask) / 10.0;
    case DiameterMethod::EquivSphere: return diameter_equiv_sphere_mm(mask) / 10.0;
    case DiameterMethod::BBox: return diameter_bbox_mm(mask) / 10.0;
  }
  throw InvalidArgument("unknown diameter method");
}

double mean_intensity_hu(const Volume& vol, const Mask& mask) {
  require_same_grid(vol.grid(), mask.grid(), "mean_intensity_hu");
  require_nonempty(mask, "mean_intensity_hu");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t idx : mask.foreground()) {
    sum += vol[idx];
    ++n;
  }
  return sum / double(n);
}

double mass_volume_mm3(const Mask& mask) { return double(mask.popcount()) * voxel_volume_mm3(mask); }

double hausdorff_mm(const Mask& a, const Mask& b) {
  require_same_grid(a.grid(), b.grid(), "hausdorff_mm");
  require_nonempty(a, "hausdorff_mm");
  require_nonempty(b, "hausdorff_mm");
  std::vector<Point> pa = centers(a), pb = centers(b);
  // Random visiting order makes the early break effective on compact shapes.
  std::mt19937_64 rng(0x5eed);
  std::shuffle(pa.begin(), pa.end(), rng);
  std::shuffle(pb.begin(), pb.end(), rng);
  return std::sqrt(std::max(directed_hausdorff2(pa, pb), directed_hausdorff2(pb, pa)));
}

Mask boundary_mask(const Mask& mask) {
  const Dims& d = mask.dims();
  Mask out(mask.grid());
  for (std::size_t n : mask.foreground()) {
    const VoxelIndex v = voxel_index(d, n);
    const bool edge = v.i == 0 || v.j == 0 || v.k == 0 || v.i + 1 == d.nx || v.j + 1 == d.ny || v.k + 1 == d.nz;
    const std::size_t sx = 1, sy = d.nx, sz = std::size_t(d.nx) * d.ny;
    if (edge || !mask.test(n - sx) || !mask.test(n + sx) || !mask.test(n - sy) || !mask.test(n + sy) ||
        !mask.test(n - sz) || !mask.test(n + sz)) {
      out.set(n);
    }
  }
  return out;
}

Mask fill_cavities(const Mask& mask) {
  const Dims& d = mask.dims();
  std::vector<std::uint8_t> outside(mask.grid().size(), 0);
  std::deque<std::size_t> queue;
  auto seed = [&](std::size_t n) {
    if (!mask.test(n) && !outside[n]) {
      outside[n] = 1;
      queue.push_back(n);
    }
  };
  for (std::uint32_t k = 0; k < d.nz; ++k) {
    for (std::uint32_t j = 0; j < d.ny; ++j) {
      for (std::uint32_t i = 0; i < d.nx; ++i) {
        if (i == 0 || j == 0 || k == 0 || i + 1 == d.nx || j + 1 == d.ny || k + 1 == d.nz) {
          seed(linear_index(d, {i, j, k}));
        }
      }
    }
  }
  while (!queue.empty()) {
    const std::size_t n = queue.front();
    queue.pop_front();
    const VoxelIndex v = voxel_index(d, n);
    if (v.i > 0) seed(n - 1);
    if (v.i + 1 < d.nx) seed(n + 1);
    if (v.j > 0) seed(n - d.nx);
    if (v.j + 1 < d.ny) seed(n + d.nx);
    if (v.k > 0) seed(n - std::size_t(d.nx) * d.ny);
    if (v.k + 1 < d.nz) seed(n + std::size_t(d.nx) * d.ny);
  }
  Mask out(mask.grid());
  for (std::size_t n = 0; n < outside.size(); ++n) {
    if (!outside[n]) out.set(n);
  }
  return out;
}

double border_thickness_mm(const Mask& shell) {
  require_nonempty(shell, "border_thickness_mm");
  return hausdorff_mm(boundary_mask(shell), boundary_mask(fill_cavities(shell)));
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("cosine_similarity: dimensions " + std::to_string(u.size()) + " and " +
                            std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    dot += u[n] * v[n];
    nu += u[n] * u[n];
    nv += v[n] * v[n];
  }
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine_similarity: zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace ifct

/*
Copyright 2026 The binscene Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "binscene/geometry/convex_hull.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include <Eigen/Geometry>

#include "binscene/core/error.hpp"

namespace binscene::geometry {
namespace {

struct HullFace {
  Face v;
  Vec3 normal;
  double offset;
  bool alive;
};

HullFace MakeFace(const std::vector<Vec3>& p, std::int32_t a, std::int32_t b,
                  std::int32_t c) {
  HullFace f;
  f.v = {a, b, c};
  Vec3 n = (p[b] - p[a]).cross(p[c] - p[a]);
  const double len = n.norm();
  f.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  f.offset = f.normal.dot(p[a]);
  f.alive = true;
  return f;
}

std::uint64_t EdgeKey(std::int32_t a, std::int32_t b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

std::vector<Face> ConvexHull(const std::vector<Vec3>& points) {
  if (points.size() < 4) ThrowNumerical("degenerate hull: fewer than 4 points");
  const Aabb box = ComputeAabb(points);
  const double scale = std::max(box.extent().norm(), 1e-300);
  const double eps = 1e-10 * scale;
  const auto n = static_cast<std::int32_t>(points.size());

  // Initial simplex from extreme points.
  std::int32_t i0 = 0;
  for (std::int32_t i = 1; i < n; ++i) {
    if (points[i].x() < points[i0].x()) i0 = i;
  }
  std::int32_t i1 = i0;
  double best = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    const double d = (points[i] - points[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (best <= eps) ThrowNumerical("degenerate hull: all points coincide");
  const Vec3 axis = (points[i1] - points[i0]).normalized();
  std::int32_t i2 = i0;
  best = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    const Vec3 r = points[i] - points[i0];
    const double d = (r - axis * axis.dot(r)).norm();
    if (d > best) best = d, i2 = i;
  }
  if (best <= eps) ThrowNumerical("degenerate hull: all points collinear");
  const Vec3 plane_n =
      (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  std::int32_t i3 = i0;
  best = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    const double d = std::abs(plane_n.dot(points[i] - points[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) ThrowNumerical("degenerate hull: all points coplanar");

  std::vector<HullFace> faces;
  const Vec3 inside = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
  auto add_oriented = [&](std::int32_t a, std::int32_t b, std::int32_t c) {
    HullFace f = MakeFace(points, a, b, c);
    if (f.normal.dot(inside) - f.offset > 0.0) f = MakeFace(points, a, c, b);
    faces.push_back(f);
  };
  add_oriented(i0, i1, i2);
  add_oriented(i0, i1, i3);
  add_oriented(i0, i2, i3);
  add_oriented(i1, i2, i3);

  // Far points first: they carve most of the hull early, so later interior
  // points are rejected quickly.
  std::vector<std::int32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return (points[a] - inside).squaredNorm() > (points[b] - inside).squaredNorm();
  });

  std::vector<std::size_t> visible;
  std::unordered_set<std::uint64_t> visible_edges;
  std::size_t dead = 0;
  for (const std::int32_t p : order) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    visible.clear();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].normal.dot(points[p]) - faces[f].offset > eps) {
        visible.push_back(f);
      }
    }
    if (visible.empty()) continue;
    visible_edges.clear();
    for (auto f : visible) {
      const auto& v = faces[f].v;
      for (int k = 0; k < 3; ++k) visible_edges.insert(EdgeKey(v[k], v[(k + 1) % 3]));
    }
    std::vector<std::array<std::int32_t, 2>> horizon;
    for (auto f : visible) {
      const auto& v = faces[f].v;
      for (int k = 0; k < 3; ++k) {
        const auto a = v[k], b = v[(k + 1) % 3];
        if (!visible_edges.count(EdgeKey(b, a))) horizon.push_back({a, b});
      }
      faces[f].alive = false;
      ++dead;
    }
    for (const auto& e : horizon) faces.push_back(MakeFace(points, e[0], e[1], p));

    if (dead > 1024 && dead > faces.size() / 2) {
      std::erase_if(faces, [](const HullFace& f) { return !f.alive; });
      dead = 0;
    }
  }

  std::vector<Face> out;
  for (const auto& f : faces) {
    if (f.alive) out.push_back(f.v);
  }
  return out;
}

}  // namespace binscene::geometry

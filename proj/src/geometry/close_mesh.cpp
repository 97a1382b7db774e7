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

#include "binscene/geometry/close_mesh.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Geometry>
#include <spdlog/spdlog.h>

#include "binscene/core/error.hpp"
#include "binscene/geometry/convex_hull.hpp"

namespace binscene::geometry {
namespace {

std::uint64_t UndirectedKey(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

bool PointInTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                     double tol) {
  const Vec3 n = (b - a).cross(c - a);
  const double area2 = n.squaredNorm();
  if (area2 <= 0.0) return false;
  // Barycentric coordinates via signed sub-areas projected on the normal.
  const double u = n.dot((c - b).cross(p - b)) / area2;
  const double v = n.dot((a - c).cross(p - c)) / area2;
  const double w = 1.0 - u - v;
  return u >= -tol && v >= -tol && w >= -tol;
}

// True when every probe point of the hull face lies on a coplanar original
// face, i.e. the hull face would duplicate existing surface.
bool HullFaceCovered(const AnnotatedMesh& mesh, const Face& hull_face,
                     const std::vector<std::size_t>& coplanar_faces) {
  const Vec3& a = mesh.vertices[hull_face[0]];
  const Vec3& b = mesh.vertices[hull_face[1]];
  const Vec3& c = mesh.vertices[hull_face[2]];
  const Vec3 centroid = (a + b + c) / 3.0;
  const Vec3 probes[] = {centroid,
                         centroid + 0.9 * (a - centroid),
                         centroid + 0.9 * (b - centroid),
                         centroid + 0.9 * (c - centroid),
                         centroid + 0.9 * ((a + b) / 2.0 - centroid),
                         centroid + 0.9 * ((b + c) / 2.0 - centroid),
                         centroid + 0.9 * ((c + a) / 2.0 - centroid)};
  for (const Vec3& p : probes) {
    bool on_surface = false;
    for (auto f : coplanar_faces) {
      const auto& g = mesh.faces[f];
      if (PointInTriangle(p, mesh.vertices[g[0]], mesh.vertices[g[1]],
                          mesh.vertices[g[2]], 1e-9)) {
        on_surface = true;
        break;
      }
    }
    if (!on_surface) return false;
  }
  return true;
}

// Triangulates boundary loops shorter than `max_perimeter` with a fan from the
// loop's first vertex. Returns the number of loops closed.
std::size_t FillSmallHoles(AnnotatedMesh& mesh, double max_perimeter) {
  std::unordered_map<std::uint64_t, int> edge_count;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) ++edge_count[UndirectedKey(f[k], f[(k + 1) % 3])];
  }
  // Boundary half-edges, oriented as in their face; loops follow them.
  std::multimap<std::int32_t, std::int32_t> next;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const auto a = f[k], b = f[(k + 1) % 3];
      if (edge_count[UndirectedKey(a, b)] == 1) next.emplace(a, b);
    }
  }
  std::size_t filled = 0;
  while (!next.empty()) {
    std::vector<std::int32_t> loop;
    const std::int32_t start = next.begin()->first;
    std::int32_t cur = start;
    bool closed = false;
    while (true) {
      const auto it = next.find(cur);
      if (it == next.end()) break;
      loop.push_back(cur);
      const std::int32_t to = it->second;
      next.erase(it);
      if (to == start) {
        closed = true;
        break;
      }
      cur = to;
      if (loop.size() > mesh.vertices.size()) break;
    }
    if (!closed || loop.size() < 3) continue;
    double perimeter = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      perimeter +=
          (mesh.vertices[loop[k]] - mesh.vertices[loop[(k + 1) % loop.size()]]).norm();
    }
    if (perimeter >= max_perimeter) continue;
    // Reverse orientation relative to the boundary so new faces agree with
    // their neighbours.
    for (std::size_t k = 1; k + 1 < loop.size(); ++k) {
      mesh.faces.push_back({loop[0], loop[k + 1], loop[k]});
    }
    ++filled;
  }
  return filled;
}

}  // namespace

CloseResult CloseMeshWithReport(const AnnotatedMesh& mesh, const CloseOptions& options,
                                Warnings* warnings) {
  ValidateMesh(mesh);
  CloseResult result;
  result.mesh = mesh;
  result.hull_faces = ConvexHull(mesh.vertices);

  // Hull vertices are input vertices, so the nearest original vertex of each
  // is itself and labels carry over unchanged.
  for (const auto& h : result.hull_faces) {
    const Vec3& a = mesh.vertices[h[0]];
    const Vec3 normal =
        (mesh.vertices[h[1]] - a).cross(mesh.vertices[h[2]] - a).normalized();
    std::vector<std::size_t> coplanar;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const auto& g = mesh.faces[f];
      bool on_plane = true;
      for (auto v : g) {
        if (std::abs(normal.dot(mesh.vertices[v] - a)) > options.coplanar_tolerance) {
          on_plane = false;
          break;
        }
      }
      if (on_plane) coplanar.push_back(f);
    }
    if (!coplanar.empty() && HullFaceCovered(mesh, h, coplanar)) continue;
    result.mesh.faces.push_back(h);
    ++result.hull_faces_added;
  }
  result.holes_filled = FillSmallHoles(result.mesh, options.small_hole_perimeter);
  if (result.hull_faces_added > 0) {
    spdlog::info("closed outer surface with {} hull faces", result.hull_faces_added);
  }
  if (!IsWatertight(result.hull_faces)) {
    Warn(warnings, "convex hull is not edge-manifold");
  }
  return result;
}

AnnotatedMesh CloseMesh(const AnnotatedMesh& mesh, const CloseOptions& options,
                        Warnings* warnings) {
  return CloseMeshWithReport(mesh, options, warnings).mesh;
}

}  // namespace binscene::geometry

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

#include "binscene/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "binscene/core/error.hpp"

namespace binscene::geometry {

LabelId AnnotatedMesh::InternLabel(const std::string& name) {
  const auto it = std::find(label_names.begin(), label_names.end(), name);
  if (it != label_names.end()) {
    return static_cast<LabelId>(it - label_names.begin());
  }
  label_names.push_back(name);
  return static_cast<LabelId>(label_names.size() - 1);
}

bool Aabb::Contains(const Vec3& p, double tol) const {
  for (int k = 0; k < 3; ++k) {
    if (p[k] < min[k] - tol || p[k] > max[k] + tol) return false;
  }
  return true;
}

void ValidateMesh(const AnnotatedMesh& mesh) {
  if (mesh.vertices.empty() || mesh.faces.empty()) ThrowInvalidInput("empty mesh");
  if (mesh.vertex_labels.size() != mesh.vertices.size()) {
    ThrowInvalidInput("label count mismatch");
  }
  for (const auto& v : mesh.vertices) {
    if (!v.allFinite()) ThrowInvalidInput("non-finite vertex coordinate");
  }
  const auto n = static_cast<std::int64_t>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (auto i : f) {
      if (i < 0 || i >= n) ThrowInvalidInput("face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      ThrowInvalidInput("face references the same vertex twice");
    }
  }
  for (auto l : mesh.vertex_labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= mesh.label_names.size()) {
      ThrowInvalidInput("vertex label outside the label dictionary");
    }
  }
}

Aabb ComputeAabb(const std::vector<Vec3>& points) {
  Aabb box{Vec3::Constant(INFINITY), Vec3::Constant(-INFINITY)};
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

double FaceArea(const AnnotatedMesh& mesh, std::size_t face) {
  const auto& f = mesh.faces[face];
  const Vec3& a = mesh.vertices[f[0]];
  return 0.5 * (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a).norm();
}

AnnotatedMesh CleanMesh(const AnnotatedMesh& mesh, double merge_tolerance,
                        Warnings* warnings) {
  AnnotatedMesh out;
  out.label_names = mesh.label_names;
  std::vector<std::int32_t> remap(mesh.vertices.size());

  // Grid hash with cell = tolerance; candidates come from the 27 neighbours.
  struct CellHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& c) const {
      return static_cast<std::size_t>(c[0] * 73856093LL ^ c[1] * 19349663LL ^
                                      c[2] * 83492791LL);
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::int32_t>, CellHash>
      grid;
  const double cell = merge_tolerance > 0.0 ? merge_tolerance : 1e-12;
  std::size_t merged = 0;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& p = mesh.vertices[i];
    const std::array<std::int64_t, 3> key{
        static_cast<std::int64_t>(std::floor(p.x() / cell)),
        static_cast<std::int64_t>(std::floor(p.y() / cell)),
        static_cast<std::int64_t>(std::floor(p.z() / cell))};
    std::int32_t found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx) {
      for (int dy = -1; dy <= 1 && found < 0; ++dy) {
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          const auto it = grid.find({key[0] + dx, key[1] + dy, key[2] + dz});
          if (it == grid.end()) continue;
          for (auto j : it->second) {
            if ((out.vertices[j] - p).norm() <= merge_tolerance) {
              found = j;
              break;
            }
          }
        }
      }
    }
    if (found >= 0) {
      remap[i] = found;
      ++merged;
      continue;
    }
    const auto id = static_cast<std::int32_t>(out.vertices.size());
    out.vertices.push_back(p);
    out.vertex_labels.push_back(mesh.vertex_labels[i]);
    grid[key].push_back(id);
    remap[i] = id;
  }
  if (merged > 0) {
    Warn(warnings, "merged " + std::to_string(merged) + " duplicate vertices");
  }

  std::size_t dropped = 0;
  for (const auto& f : mesh.faces) {
    const Face g{remap[f[0]], remap[f[1]], remap[f[2]]};
    if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) {
      ++dropped;
      continue;
    }
    const Vec3& a = out.vertices[g[0]];
    const double twice_area =
        (out.vertices[g[1]] - a).cross(out.vertices[g[2]] - a).norm();
    if (!(twice_area > 1e-12)) {
      ++dropped;
      continue;
    }
    out.faces.push_back(g);
  }
  if (dropped > 0) {
    Warn(warnings, "dropped " + std::to_string(dropped) + " degenerate faces");
  }
  return out;
}

FaceLabeledMesh VertexToFaceLabels(const AnnotatedMesh& mesh) {
  FaceLabeledMesh out;
  static_cast<AnnotatedMesh&>(out) = mesh;
  out.face_labels.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) {
    const LabelId a = mesh.vertex_labels[f[0]];
    const LabelId b = mesh.vertex_labels[f[1]];
    const LabelId c = mesh.vertex_labels[f[2]];
    LabelId label;
    if (a == b || a == c) {
      label = a;
    } else if (b == c) {
      label = b;
    } else {
      const auto lowest = *std::min_element(f.begin(), f.end());
      label = mesh.vertex_labels[lowest];
    }
    out.face_labels.push_back(label);
  }
  return out;
}

std::vector<std::array<std::int32_t, 2>> UniqueEdges(const std::vector<Face>& faces) {
  std::vector<std::array<std::int32_t, 2>> edges;
  std::unordered_map<std::uint64_t, bool> seen;
  seen.reserve(faces.size() * 3);
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      auto a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      const auto key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      if (seen.emplace(key, true).second) edges.push_back({a, b});
    }
  }
  return edges;
}

std::size_t NonManifoldEdgeCount(const std::vector<Face>& faces) {
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      auto a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)];
    }
  }
  std::size_t bad = 0;
  for (const auto& [key, n] : count) {
    if (n != 2) ++bad;
  }
  return bad;
}

AnnotatedMesh CompactVertices(const AnnotatedMesh& mesh) {
  std::vector<std::int32_t> remap(mesh.vertices.size(), -1);
  for (const auto& f : mesh.faces) {
    for (auto i : f) remap[i] = 0;
  }
  AnnotatedMesh out;
  out.label_names = mesh.label_names;
  for (std::size_t i = 0; i < remap.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<std::int32_t>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[i]);
    out.vertex_labels.push_back(mesh.vertex_labels[i]);
  }
  out.faces.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) {
    out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  return out;
}

}  // namespace binscene::geometry

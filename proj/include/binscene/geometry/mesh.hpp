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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "binscene/core/log.hpp"

namespace binscene::geometry {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::int32_t, 3>;
using LabelId = std::int32_t;

// Triangle mesh with one semantic label per vertex. Labels are indices into
// `label_names`, the mesh's own label dictionary.
struct AnnotatedMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<LabelId> vertex_labels;
  std::vector<std::string> label_names;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
  const std::string& label_of_vertex(std::size_t v) const {
    return label_names[static_cast<std::size_t>(vertex_labels[v])];
  }
  // Id for `name`, appending it to the dictionary when absent.
  LabelId InternLabel(const std::string& name);
};

struct FaceLabeledMesh : AnnotatedMesh {
  std::vector<LabelId> face_labels;
};

struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  bool Contains(const Vec3& p, double tol = 0.0) const;
};

// Throws kInvalidInput naming the first violated invariant.
void ValidateMesh(const AnnotatedMesh& mesh);

Aabb ComputeAabb(const std::vector<Vec3>& points);

double FaceArea(const AnnotatedMesh& mesh, std::size_t face);

// Merges vertices closer than `merge_tolerance` (the first occurrence keeps
// its label), then drops faces that repeat a vertex or have zero area.
AnnotatedMesh CleanMesh(const AnnotatedMesh& mesh, double merge_tolerance,
                        Warnings* warnings = nullptr);

// Majority vote over the three vertex labels; a three-way tie takes the label
// of the face's lowest-index vertex.
FaceLabeledMesh VertexToFaceLabels(const AnnotatedMesh& mesh);

// Undirected edges (a < b) in first-seen order.
std::vector<std::array<std::int32_t, 2>> UniqueEdges(const std::vector<Face>& faces);

// Number of undirected edges whose incident face count differs from two.
std::size_t NonManifoldEdgeCount(const std::vector<Face>& faces);

inline bool IsWatertight(const std::vector<Face>& faces) {
  return !faces.empty() && NonManifoldEdgeCount(faces) == 0;
}

// Drops unreferenced vertices, preserving order of the survivors.
AnnotatedMesh CompactVertices(const AnnotatedMesh& mesh);

}  // namespace binscene::geometry

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

#include <vector>

#include "binscene/geometry/mesh.hpp"

namespace binscene::geometry {

struct CloseOptions {
  // Boundary loops shorter than this are triangulated shut.
  double small_hole_perimeter = 0.5;
  // Distance below which a hull face counts as lying on an original face.
  double coplanar_tolerance = 1e-6;
};

struct CloseResult {
  AnnotatedMesh mesh;
  // Full hull over the input vertices (indices into mesh.vertices).
  std::vector<Face> hull_faces;
  std::size_t hull_faces_added = 0;
  std::size_t holes_filled = 0;
};

// Union of the mesh with its convex hull, followed by small-hole filling.
// Hull faces already covered by coplanar original faces are not duplicated.
CloseResult CloseMeshWithReport(const AnnotatedMesh& mesh,
                                const CloseOptions& options = {},
                                Warnings* warnings = nullptr);

AnnotatedMesh CloseMesh(const AnnotatedMesh& mesh,
                        const CloseOptions& options = {},
                        Warnings* warnings = nullptr);

}  // namespace binscene::geometry

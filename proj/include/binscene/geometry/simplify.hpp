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

#include "binscene/geometry/mesh.hpp"

namespace binscene::geometry {

// Quadric-error edge collapse until face_count <= ceil(target_ratio * faces),
// never below 4 faces. The surviving vertex of each collapse takes the label
// of whichever endpoint had the smaller quadric error (ties: lower index).
AnnotatedMesh Simplify(const AnnotatedMesh& mesh, double target_ratio,
                       Warnings* warnings = nullptr);

std::size_t SimplifyTargetFaces(std::size_t face_count, double target_ratio);

}  // namespace binscene::geometry

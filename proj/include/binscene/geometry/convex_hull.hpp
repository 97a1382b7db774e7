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

// Outward-oriented triangulated convex hull of `points`; face indices refer to
// `points`. Points on or inside the hull (within a scale-relative tolerance)
// are not used as hull vertices. Throws kNumerical "degenerate hull" when the
// points span fewer than three dimensions.
std::vector<Face> ConvexHull(const std::vector<Vec3>& points);

}  // namespace binscene::geometry

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

#include <cstdint>
#include <optional>
#include <vector>

#include "binscene/geometry/mesh.hpp"

namespace binscene::raytracer {

using geometry::Vec3;

struct Hit {
  double t = 0.0;
  std::int32_t face = -1;
  Vec3 normal = Vec3::Zero();  // unit geometric normal from the face winding
};

// Triangle bounding-volume hierarchy: binned-SAH build, stack traversal.
class Bvh {
 public:
  Bvh(std::vector<Vec3> vertices, const std::vector<geometry::Face>& faces);

  // Nearest hit with t in (t_min, t_max).
  std::optional<Hit> Intersect(const Vec3& origin, const Vec3& dir, double t_min,
                               double t_max) const;
  bool Occluded(const Vec3& from, const Vec3& to, double eps) const;

  // Number of surface crossings along the ray, duplicate hits at shared
  // edges counted once.
  int CountCrossings(const Vec3& origin, const Vec3& dir) const;

  // Unsigned distance from p to the closest triangle.
  double Distance(const Vec3& p) const;

  // Majority vote of parity tests along three skewed directions.
  bool Contains(const Vec3& p) const;

  std::size_t triangle_count() const { return tris_.size(); }
  const geometry::Aabb& bounds() const { return bounds_; }
  double scale() const { return scale_; }

 private:
  struct Tri {
    Vec3 a, e1, e2;
    Vec3 normal;
    std::int32_t face;
  };
  struct Node {
    Vec3 lo, hi;
    std::int32_t left = -1;   // children, or first triangle for leaves
    std::int32_t right = -1;
    std::int32_t count = 0;   // > 0 for leaves
  };

  std::int32_t Build(std::vector<std::int32_t>& order, std::int32_t begin, std::int32_t end,
                     int depth);
  bool IntersectTri(const Tri& tri, const Vec3& origin, const Vec3& dir, double t_min,
                    double t_max, double* t) const;

  std::vector<Tri> tris_;
  std::vector<Node> nodes_;
  std::vector<Vec3> centroids_;
  geometry::Aabb bounds_;
  double scale_ = 1.0;
};

double PointTriangleDistance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace binscene::raytracer

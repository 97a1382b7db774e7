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

#include "binscene/raytracer/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "binscene/core/error.hpp"

namespace binscene::raytracer {

namespace {

constexpr int kLeafSize = 4;
constexpr int kBins = 12;
constexpr int kStackSize = 160;
constexpr int kMaxSahDepth = 48;
constexpr double kInf = std::numeric_limits<double>::infinity();

double SurfaceArea(const Vec3& lo, const Vec3& hi) {
  const Vec3 d = (hi - lo).cwiseMax(0.0);
  return 2.0 * (d.x() * d.y() + d.y() * d.z() + d.z() * d.x());
}

bool SlabTest(const Vec3& lo, const Vec3& hi, const Vec3& origin, const Vec3& inv_dir,
              double t_min, double t_max) {
  for (int k = 0; k < 3; ++k) {
    double t0 = (lo[k] - origin[k]) * inv_dir[k];
    double t1 = (hi[k] - origin[k]) * inv_dir[k];
    if (t0 > t1) std::swap(t0, t1);
    // NaN from 0 * inf leaves the interval unchanged.
    if (t0 > t_min) t_min = t0;
    if (t1 < t_max) t_max = t1;
    if (t_min > t_max) return false;
  }
  return true;
}

double BoxDistanceSq(const Vec3& lo, const Vec3& hi, const Vec3& p) {
  const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
  return d.squaredNorm();
}

}  // namespace

double PointTriangleDistance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Closest point by Voronoi region, as in Ericson's Real-Time Collision Detection.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + ab * (d1 / (d1 - d3)))).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + ac * (d2 / (d2 - d6)))).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + (c - b) * w)).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

Bvh::Bvh(std::vector<Vec3> vertices, const std::vector<geometry::Face>& faces) {
  if (faces.empty()) ThrowInvalidInput("cannot build a BVH over an empty mesh");
  tris_.reserve(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec3& a = vertices[faces[f][0]];
    const Vec3& b = vertices[faces[f][1]];
    const Vec3& c = vertices[faces[f][2]];
    Tri t{a, b - a, c - a, Vec3::Zero(), static_cast<std::int32_t>(f)};
    const Vec3 n = t.e1.cross(t.e2);
    const double len = n.norm();
    if (len == 0.0) continue;
    t.normal = n / len;
    tris_.push_back(t);
    centroids_.push_back((a + b + c) / 3.0);
  }
  if (tris_.empty()) ThrowInvalidInput("BVH: every face is degenerate");
  bounds_ = geometry::ComputeAabb(vertices);
  scale_ = std::max(1e-9, bounds_.extent().maxCoeff());
  std::vector<std::int32_t> order(tris_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
  nodes_.reserve(2 * tris_.size());
  Build(order, 0, static_cast<std::int32_t>(order.size()), 0);
  std::vector<Tri> sorted;
  sorted.reserve(tris_.size());
  for (auto i : order) sorted.push_back(tris_[static_cast<std::size_t>(i)]);
  tris_ = std::move(sorted);
  centroids_.clear();
}

std::int32_t Bvh::Build(std::vector<std::int32_t>& order, std::int32_t begin, std::int32_t end,
                       int depth) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Vec3 lo = Vec3::Constant(kInf), hi = Vec3::Constant(-kInf);
  Vec3 clo = lo, chi = hi;
  for (std::int32_t i = begin; i < end; ++i) {
    const Tri& t = tris_[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    for (const Vec3& v : {t.a, Vec3(t.a + t.e1), Vec3(t.a + t.e2)}) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const Vec3& c = centroids_[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    clo = clo.cwiseMin(c);
    chi = chi.cwiseMax(c);
  }
  nodes_[static_cast<std::size_t>(index)].lo = lo;
  nodes_[static_cast<std::size_t>(index)].hi = hi;
  const std::int32_t count = end - begin;
  const Vec3 cext = chi - clo;
  int axis = 0;
  cext.maxCoeff(&axis);
  if (count <= kLeafSize || cext[axis] <= 0.0) {
    nodes_[static_cast<std::size_t>(index)].left = begin;
    nodes_[static_cast<std::size_t>(index)].count = count;
    return index;
  }

  // Binned surface-area heuristic along the widest centroid axis.
  struct Bin {
    Vec3 lo = Vec3::Constant(kInf), hi = Vec3::Constant(-kInf);
    int count = 0;
  };
  std::array<Bin, kBins> bins;
  const auto bin_of = [&](std::int32_t tri) {
    const double u = (centroids_[static_cast<std::size_t>(tri)][axis] - clo[axis]) / cext[axis];
    return std::min(kBins - 1, static_cast<int>(u * kBins));
  };
  for (std::int32_t i = begin; i < end; ++i) {
    const std::int32_t tri = order[static_cast<std::size_t>(i)];
    Bin& b = bins[static_cast<std::size_t>(bin_of(tri))];
    const Tri& t = tris_[static_cast<std::size_t>(tri)];
    for (const Vec3& v : {t.a, Vec3(t.a + t.e1), Vec3(t.a + t.e2)}) {
      b.lo = b.lo.cwiseMin(v);
      b.hi = b.hi.cwiseMax(v);
    }
    ++b.count;
  }
  double best_cost = kInf;
  int best_split = kBins / 2;
  for (int s = 1; s < kBins; ++s) {
    Bin l, r;
    for (int k = 0; k < s; ++k) {
      l.lo = l.lo.cwiseMin(bins[static_cast<std::size_t>(k)].lo);
      l.hi = l.hi.cwiseMax(bins[static_cast<std::size_t>(k)].hi);
      l.count += bins[static_cast<std::size_t>(k)].count;
    }
    for (int k = s; k < kBins; ++k) {
      r.lo = r.lo.cwiseMin(bins[static_cast<std::size_t>(k)].lo);
      r.hi = r.hi.cwiseMax(bins[static_cast<std::size_t>(k)].hi);
      r.count += bins[static_cast<std::size_t>(k)].count;
    }
    if (l.count == 0 || r.count == 0) continue;
    const double cost = SurfaceArea(l.lo, l.hi) * l.count + SurfaceArea(r.lo, r.hi) * r.count;
    if (cost < best_cost) {
      best_cost = cost;
      best_split = s;
    }
  }
  auto* first = order.data() + begin;
  auto* last = order.data() + end;
  auto* mid = std::partition(first, last, [&](std::int32_t tri) { return bin_of(tri) < best_split; });
  // Median split when SAH degenerates or the tree grows too deep for the
  // fixed traversal stacks.
  if (mid == first || mid == last || depth > kMaxSahDepth) {
    mid = first + count / 2;
    std::nth_element(first, mid, last, [&](std::int32_t a, std::int32_t b) {
      return centroids_[static_cast<std::size_t>(a)][axis] < centroids_[static_cast<std::size_t>(b)][axis];
    });
  }
  const auto split = static_cast<std::int32_t>(mid - order.data());
  const std::int32_t left = Build(order, begin, split, depth + 1);
  const std::int32_t right = Build(order, split, end, depth + 1);
  nodes_[static_cast<std::size_t>(index)].left = left;
  nodes_[static_cast<std::size_t>(index)].right = right;
  return index;
}

bool Bvh::IntersectTri(const Tri& tri, const Vec3& origin, const Vec3& dir, double t_min,
                       double t_max, double* t) const {
  // Moller-Trumbore.
  const Vec3 p = dir.cross(tri.e2);
  const double det = tri.e1.dot(p);
  if (std::abs(det) < 1e-300) return false;
  const double inv = 1.0 / det;
  const Vec3 s = origin - tri.a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(tri.e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double tt = tri.e2.dot(q) * inv;
  if (tt <= t_min || tt >= t_max) return false;
  *t = tt;
  return true;
}

std::optional<Hit> Bvh::Intersect(const Vec3& origin, const Vec3& dir, double t_min,
                                  double t_max) const {
  const Vec3 inv_dir = dir.cwiseInverse();
  std::optional<Hit> best;
  std::int32_t stack[kStackSize];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (!SlabTest(node.lo, node.hi, origin, inv_dir, t_min, t_max)) continue;
    if (node.count > 0) {
      for (std::int32_t i = node.left; i < node.left + node.count; ++i) {
        const Tri& tri = tris_[static_cast<std::size_t>(i)];
        double t;
        if (IntersectTri(tri, origin, dir, t_min, t_max, &t)) {
          t_max = t;
          best = Hit{t, tri.face, tri.normal};
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  return best;
}

bool Bvh::Occluded(const Vec3& from, const Vec3& to, double eps) const {
  const Vec3 d = to - from;
  const double len = d.norm();
  if (len <= 2.0 * eps) return false;
  return Intersect(from, d / len, eps, len - eps).has_value();
}

int Bvh::CountCrossings(const Vec3& origin, const Vec3& dir) const {
  const Vec3 inv_dir = dir.cwiseInverse();
  std::vector<double> ts;
  std::int32_t stack[kStackSize];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (!SlabTest(node.lo, node.hi, origin, inv_dir, 0.0, kInf)) continue;
    if (node.count > 0) {
      for (std::int32_t i = node.left; i < node.left + node.count; ++i) {
        double t;
        if (IntersectTri(tris_[static_cast<std::size_t>(i)], origin, dir, 0.0, kInf, &t)) {
          ts.push_back(t);
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  std::sort(ts.begin(), ts.end());
  const double merge = 1e-9 * scale_;
  int count = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i == 0 || ts[i] - ts[i - 1] > merge) ++count;
  }
  return count;
}

double Bvh::Distance(const Vec3& p) const {
  double best = kInf;
  std::int32_t stack[kStackSize];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (BoxDistanceSq(node.lo, node.hi, p) >= best * best) continue;
    if (node.count > 0) {
      for (std::int32_t i = node.left; i < node.left + node.count; ++i) {
        const Tri& t = tris_[static_cast<std::size_t>(i)];
        best = std::min(best, PointTriangleDistance(p, t.a, t.a + t.e1, t.a + t.e2));
      }
      continue;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    // Visit the nearer child first.
    if (BoxDistanceSq(l.lo, l.hi, p) < BoxDistanceSq(r.lo, r.hi, p)) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

bool Bvh::Contains(const Vec3& p) const {
  if (!bounds_.Contains(p)) return false;
  static const Vec3 kDirs[3] = {Vec3(0.5773, 0.5774, 0.5775).normalized(),
                                Vec3(-0.6123, 0.2587, 0.7471).normalized(),
                                Vec3(0.1317, -0.8911, 0.4342).normalized()};
  int votes = 0;
  for (const Vec3& d : kDirs) votes += CountCrossings(p, d) % 2;
  return votes >= 2;
}

}  // namespace binscene::raytracer

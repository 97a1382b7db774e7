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

#include "binscene/geometry/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

#include <Eigen/Dense>

#include "binscene/core/error.hpp"

namespace binscene::geometry {
namespace {

using Quadric = Eigen::Matrix4d;

double Evaluate(const Quadric& q, const Vec3& p) {
  const Eigen::Vector4d h(p.x(), p.y(), p.z(), 1.0);
  return h.dot(q * h);
}

Quadric PlaneQuadric(const Vec3& normal, const Vec3& point, double weight) {
  const Eigen::Vector4d plane(normal.x(), normal.y(), normal.z(), -normal.dot(point));
  return weight * plane * plane.transpose();
}

struct Candidate {
  double cost;
  std::int32_t u;
  std::int32_t v;
  std::uint32_t stamp_u;
  std::uint32_t stamp_v;
  Vec3 position;

  bool operator>(const Candidate& o) const {
    if (cost != o.cost) return cost > o.cost;
    if (u != o.u) return u > o.u;
    return v > o.v;
  }
};

class EdgeCollapser {
 public:
  explicit EdgeCollapser(const AnnotatedMesh& mesh)
      : positions_(mesh.vertices),
        labels_(mesh.vertex_labels),
        faces_(mesh.faces),
        face_alive_(mesh.faces.size(), true),
        vertex_faces_(mesh.vertices.size()),
        quadrics_(mesh.vertices.size(), Quadric::Zero()),
        stamps_(mesh.vertices.size(), 0),
        alive_faces_(mesh.faces.size()) {
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      for (auto v : faces_[f]) vertex_faces_[v].push_back(static_cast<std::int32_t>(f));
    }
    std::unordered_map<std::uint64_t, int> edge_count;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto& g = faces_[f];
      const Vec3 cross =
          (positions_[g[1]] - positions_[g[0]]).cross(positions_[g[2]] - positions_[g[0]]);
      const double area = 0.5 * cross.norm();
      if (area <= 0.0) continue;
      const Quadric k = PlaneQuadric(cross.normalized(), positions_[g[0]], area);
      for (auto v : g) quadrics_[v] += k;
      for (int e = 0; e < 3; ++e) ++edge_count[Key(g[e], g[(e + 1) % 3])];
    }
    // Open borders get a perpendicular constraint plane so they do not shrink.
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const auto& g = faces_[f];
      const Vec3 n =
          (positions_[g[1]] - positions_[g[0]]).cross(positions_[g[2]] - positions_[g[0]]);
      if (n.norm() <= 0.0) continue;
      for (int e = 0; e < 3; ++e) {
        const auto a = g[e], b = g[(e + 1) % 3];
        if (edge_count[Key(a, b)] != 1) continue;
        const Vec3 edge = positions_[b] - positions_[a];
        const Vec3 side = edge.cross(n).normalized();
        const Quadric k = PlaneQuadric(side, positions_[a], 100.0 * edge.squaredNorm());
        quadrics_[a] += k;
        quadrics_[b] += k;
      }
    }
  }

  void Run(std::size_t target_faces) {
    for (int pass = 0; pass < 2 && alive_faces_ > target_faces; ++pass) {
      // The second pass drops the fold-over check so the target is reachable
      // on meshes where every remaining collapse would flip a face.
      check_flips_ = pass == 0;
      queue_ = {};
      for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (!face_alive_[f]) continue;
        const auto& g = faces_[f];
        for (int e = 0; e < 3; ++e) {
          const auto a = g[e], b = g[(e + 1) % 3];
          if (a < b) Push(a, b);
        }
      }
      while (alive_faces_ > target_faces && !queue_.empty()) {
        const Candidate c = queue_.top();
        queue_.pop();
        if (stamps_[c.u] != c.stamp_u || stamps_[c.v] != c.stamp_v) continue;
        if (vertex_faces_[c.u].empty() || vertex_faces_[c.v].empty()) continue;
        Collapse(c);
      }
    }
  }

  AnnotatedMesh Result(const std::vector<std::string>& label_names) const {
    AnnotatedMesh out;
    out.vertices = positions_;
    out.vertex_labels = labels_;
    out.label_names = label_names;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (face_alive_[f]) out.faces.push_back(faces_[f]);
    }
    return CompactVertices(out);
  }

  std::size_t alive_faces() const { return alive_faces_; }

 private:
  static std::uint64_t Key(std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }

  std::vector<std::int32_t> Neighbors(std::int32_t v) const {
    std::vector<std::int32_t> out;
    for (auto f : vertex_faces_[v]) {
      for (auto w : faces_[f]) {
        if (w != v) out.push_back(w);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void Push(std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    const Quadric q = quadrics_[a] + quadrics_[b];
    Eigen::Matrix3d m = q.topLeftCorner<3, 3>();
    const Vec3 rhs = -q.topRightCorner<3, 1>();
    Vec3 best = 0.5 * (positions_[a] + positions_[b]);
    double best_cost = Evaluate(q, best);
    Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
    if (lu.isInvertible() && std::abs(lu.determinant()) > 1e-12 * m.norm() * m.norm() * m.norm()) {
      const Vec3 opt = lu.solve(rhs);
      // Keep the optimum only near the edge; far solutions come from nearly
      // singular systems.
      const double reach = 2.0 * (positions_[a] - positions_[b]).norm() + 1e-9;
      if (opt.allFinite() && (opt - best).norm() <= reach) {
        const double cost = Evaluate(q, opt);
        if (cost < best_cost) best = opt, best_cost = cost;
      }
    }
    for (const Vec3& p : {positions_[a], positions_[b]}) {
      const double cost = Evaluate(q, p);
      if (cost < best_cost) best = p, best_cost = cost;
    }
    queue_.push({std::max(best_cost, 0.0), a, b, stamps_[a], stamps_[b], best});
  }

  // Link condition: the edge's endpoints may only share the vertices opposite
  // the edge in its incident faces; otherwise the collapse pinches the surface.
  bool LinkConditionHolds(std::int32_t u, std::int32_t v) const {
    const auto nu = Neighbors(u);
    const auto nv = Neighbors(v);
    std::vector<std::int32_t> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(),
                          std::back_inserter(common));
    std::size_t shared_faces = 0;
    for (auto f : vertex_faces_[u]) {
      const auto& g = faces_[f];
      if (std::find(g.begin(), g.end(), v) != g.end()) ++shared_faces;
    }
    return shared_faces > 0 && common.size() == shared_faces;
  }

  bool FlipsAnyFace(std::int32_t u, std::int32_t v, const Vec3& target) const {
    for (auto moved : {u, v}) {
      for (auto f : vertex_faces_[moved]) {
        const auto& g = faces_[f];
        if (std::find(g.begin(), g.end(), u) != g.end() &&
            std::find(g.begin(), g.end(), v) != g.end()) {
          continue;
        }
        std::array<Vec3, 3> p{positions_[g[0]], positions_[g[1]], positions_[g[2]]};
        const Vec3 before = (p[1] - p[0]).cross(p[2] - p[0]);
        for (int k = 0; k < 3; ++k) {
          if (g[k] == moved) p[k] = target;
        }
        const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
        if (before.dot(after) <= 0.0) return true;
      }
    }
    return false;
  }

  void Collapse(const Candidate& c) {
    const std::int32_t u = c.u, v = c.v;
    if (!LinkConditionHolds(u, v)) return;
    if (check_flips_ && FlipsAnyFace(u, v, c.position)) return;

    const double err_u = Evaluate(quadrics_[u], positions_[u]);
    const double err_v = Evaluate(quadrics_[v], positions_[v]);
    // u < v, so ties resolve to u's label.
    labels_[u] = err_v < err_u ? labels_[v] : labels_[u];
    positions_[u] = c.position;
    quadrics_[u] += quadrics_[v];

    for (auto f : vertex_faces_[v]) {
      auto& g = faces_[f];
      if (std::find(g.begin(), g.end(), u) != g.end()) {
        face_alive_[f] = false;
        --alive_faces_;
        continue;
      }
      for (auto& w : g) {
        if (w == v) w = u;
      }
      vertex_faces_[u].push_back(f);
    }
    vertex_faces_[v].clear();
    auto& u_faces = vertex_faces_[u];
    std::erase_if(u_faces, [&](std::int32_t f) { return !face_alive_[f]; });
    std::sort(u_faces.begin(), u_faces.end());
    u_faces.erase(std::unique(u_faces.begin(), u_faces.end()), u_faces.end());
    const std::vector<std::int32_t> ring = Neighbors(u);
    for (auto w : ring) {
      std::erase_if(vertex_faces_[w], [&](std::int32_t f) { return !face_alive_[f]; });
    }
    // Only edges incident to u changed cost; the stamps retire the old ones.
    ++stamps_[u];
    ++stamps_[v];
    for (auto w : ring) Push(u, w);
  }

  std::vector<Vec3> positions_;
  std::vector<LabelId> labels_;
  std::vector<Face> faces_;
  std::vector<bool> face_alive_;
  std::vector<std::vector<std::int32_t>> vertex_faces_;
  std::vector<Quadric> quadrics_;
  std::vector<std::uint32_t> stamps_;
  std::size_t alive_faces_;
  bool check_flips_ = true;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue_;
};

}  // namespace

std::size_t SimplifyTargetFaces(std::size_t face_count, double target_ratio) {
  const double exact = target_ratio * static_cast<double>(face_count);
  // Guard against 0.6 * 10 style round-off pushing ceil up by one.
  return static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

AnnotatedMesh Simplify(const AnnotatedMesh& mesh, double target_ratio,
                       Warnings* warnings) {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    ThrowInvalidInput("target_ratio must be in (0, 1]");
  }
  ValidateMesh(mesh);
  if (mesh.faces.size() < 8) ThrowInvalidInput("simplify needs at least 8 faces");
  if (target_ratio == 1.0) return mesh;
  std::size_t target = SimplifyTargetFaces(mesh.faces.size(), target_ratio);
  if (target < 4) {
    Warn(warnings, "simplification target below 4 faces; clamped to 4");
    target = 4;
  }
  EdgeCollapser collapser(mesh);
  collapser.Run(target);
  if (collapser.alive_faces() > target) {
    Warn(warnings, "simplification stopped at " + std::to_string(collapser.alive_faces()) +
                       " faces (target " + std::to_string(target) + ")");
  }
  return collapser.Result(mesh.label_names);
}

}  // namespace binscene::geometry

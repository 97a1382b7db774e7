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

#include "binscene/scene_graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binscene/core/error.hpp"
#include "binscene/geometry/mesh.hpp"

namespace binscene::scene_graph {

void ValidateGraph(const SceneGraph& graph) {
  if (graph.features.cols() != kNodeFeatureDim) {
    ThrowInvalidInput("graph features must have 5 columns");
  }
  if (!graph.features.allFinite()) ThrowInvalidInput("graph features not finite");
  const auto n = static_cast<std::int32_t>(graph.features.rows());
  for (const auto& e : graph.edges) {
    if (e[0] < 0 || e[1] < 0 || e[0] >= n || e[1] >= n) {
      ThrowInvalidInput("edge index out of range");
    }
    if (e[0] == e[1]) ThrowInvalidInput("self loop in edge list");
  }
}

EdgeList CanonicalEdges(EdgeList edges) {
  for (auto& e : edges) {
    if (e[0] > e[1]) std::swap(e[0], e[1]);
  }
  std::erase_if(edges, [](const Edge& e) { return e[0] == e[1]; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

SceneGraph BuildGraph(const materials::MaterialAnnotatedMesh& mesh, bool normalize) {
  materials::ValidateMaterialMesh(mesh);
  SceneGraph graph;
  const std::size_t n = mesh.vertices.size();
  if (normalize && n > 0) graph.frame_offset = geometry::ComputeAabb(mesh.vertices).min;
  graph.features.resize(static_cast<Eigen::Index>(n), kNodeFeatureDim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Eigen::Vector3d p = mesh.vertices[i] - graph.frame_offset;
    graph.features.row(r) << p.x(), p.y(), p.z(), mesh.absorption[i], mesh.scattering[i];
  }
  EdgeList edges;
  edges.reserve(mesh.faces.size() * 3);
  for (const auto& f : mesh.faces) {
    edges.push_back({f[0], f[1]});
    edges.push_back({f[1], f[2]});
    edges.push_back({f[2], f[0]});
  }
  graph.edges = CanonicalEdges(std::move(edges));
  return graph;
}

std::vector<std::vector<std::int32_t>> Neighbours(const EdgeList& edges,
                                                  std::size_t node_count) {
  std::vector<std::vector<std::int32_t>> adj(node_count);
  for (const auto& e : edges) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

Eigen::MatrixXd GcnLayer(const Eigen::MatrixXd& features, const EdgeList& edges,
                         const Eigen::MatrixXd& weight) {
  if (features.cols() != weight.rows()) {
    ThrowInvalidInput("gcn shape mismatch: features have " +
                      std::to_string(features.cols()) + " columns, weight has " +
                      std::to_string(weight.rows()) + " rows");
  }
  const Eigen::Index n = features.rows();
  for (const auto& e : edges) {
    if (e[0] < 0 || e[1] < 0 || e[0] >= n || e[1] >= n || e[0] == e[1]) {
      ThrowInvalidInput("gcn edge index out of range");
    }
  }
  // Degree of A + I.
  Eigen::VectorXd deg = Eigen::VectorXd::Ones(n);
  for (const auto& e : edges) {
    deg[e[0]] += 1.0;
    deg[e[1]] += 1.0;
  }
  const Eigen::VectorXd inv_sqrt = deg.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd xw = features * weight;
  Eigen::MatrixXd out(n, weight.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = xw.row(i) * (inv_sqrt[i] * inv_sqrt[i]);
  for (const auto& e : edges) {
    const double w = inv_sqrt[e[0]] * inv_sqrt[e[1]];
    out.row(e[0]) += w * xw.row(e[1]);
    out.row(e[1]) += w * xw.row(e[0]);
  }
  return out.cwiseMax(0.0);
}

EdgeList SquareAdjacency(const EdgeList& edges, std::size_t node_count) {
  const auto adj = Neighbours(edges, node_count);
  EdgeList out;
  for (std::size_t i = 0; i < node_count; ++i) {
    std::vector<std::int32_t> reach;
    for (auto j : adj[i]) {
      for (auto k : adj[j]) {
        if (static_cast<std::size_t>(k) > i) reach.push_back(k);
      }
    }
    std::sort(reach.begin(), reach.end());
    reach.erase(std::unique(reach.begin(), reach.end()), reach.end());
    for (auto k : reach) out.push_back({static_cast<std::int32_t>(i), k});
  }
  return out;
}

std::size_t PooledSize(std::size_t node_count, double keep) {
  if (!(keep > 0.0 && keep <= 1.0)) ThrowInvalidInput("pool keep ratio must be in (0, 1]");
  const double raw = keep * static_cast<double>(node_count);
  // 0.6 * 10 evaluates to 6.000000000000001; do not round that up to 7.
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(k, node_count > 0 ? 1 : 0, node_count);
}

PoolResult TopNPool(const Eigen::MatrixXd& features, const EdgeList& edges,
                    const Eigen::VectorXd& score_vector, double keep) {
  if (score_vector.size() != features.cols()) ThrowInvalidInput("pool score vector shape mismatch");
  const double norm = score_vector.norm();
  if (!(norm > 0.0)) ThrowNumerical("pool score vector has zero norm");
  const auto n = static_cast<std::size_t>(features.rows());
  const std::size_t k = PooledSize(n, keep);

  PoolResult result;
  result.scores = features * score_vector / norm;
  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return result.scores[a] > result.scores[b];
  });
  result.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(result.kept.begin(), result.kept.end());

  std::vector<std::int32_t> remap(n, -1);
  result.features.resize(static_cast<Eigen::Index>(k), features.cols());
  for (std::size_t r = 0; r < k; ++r) {
    const auto src = result.kept[r];
    remap[src] = static_cast<std::int32_t>(r);
    result.features.row(static_cast<Eigen::Index>(r)) =
        features.row(src) * std::tanh(result.scores[src]);
  }
  for (const auto& e : SquareAdjacency(edges, n)) {
    const auto a = remap[e[0]];
    const auto b = remap[e[1]];
    if (a >= 0 && b >= 0) result.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  result.edges = CanonicalEdges(std::move(result.edges));
  return result;
}

}  // namespace binscene::scene_graph

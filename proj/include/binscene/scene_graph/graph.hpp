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
#include <vector>

#include <Eigen/Core>

#include "binscene/materials/materials.hpp"

namespace binscene::scene_graph {

using Edge = std::array<std::int32_t, 2>;
using EdgeList = std::vector<Edge>;  // undirected, a < b, no self loops

inline constexpr int kNodeFeatureDim = 5;

struct SceneGraph {
  Eigen::MatrixXd features;  // N x 5 rows [x, y, z, ab, sc]
  EdgeList edges;
  // Subtracted from mesh coordinates when normalizing; apply the same shift
  // to source and listener positions.
  Eigen::Vector3d frame_offset = Eigen::Vector3d::Zero();

  std::size_t node_count() const { return static_cast<std::size_t>(features.rows()); }
  Eigen::Vector3d ToSceneFrame(const Eigen::Vector3d& p) const { return p - frame_offset; }
};

void ValidateGraph(const SceneGraph& graph);

SceneGraph BuildGraph(const materials::MaterialAnnotatedMesh& mesh, bool normalize);

// Canonical form: a < b, sorted, deduplicated, self loops removed.
EdgeList CanonicalEdges(EdgeList edges);

// Symmetric neighbour lists (CSR-style vectors) of an undirected edge list.
std::vector<std::vector<std::int32_t>> Neighbours(const EdgeList& edges,
                                                  std::size_t node_count);

// relu(D^-1/2 (A + I) D^-1/2 X W), evaluated over the edge list.
Eigen::MatrixXd GcnLayer(const Eigen::MatrixXd& features, const EdgeList& edges,
                         const Eigen::MatrixXd& weight);

// Edges of the boolean square of the adjacency matrix, diagonal dropped.
EdgeList SquareAdjacency(const EdgeList& edges, std::size_t node_count);

// ceil(keep * n) with a guard against round-off in keep * n.
std::size_t PooledSize(std::size_t node_count, double keep);

struct PoolResult {
  Eigen::MatrixXd features;
  EdgeList edges;
  std::vector<std::int32_t> kept;  // input row index of each output row
  Eigen::VectorXd scores;          // all input-node scores
};

// Keeps the top ceil(keep * N) nodes by score X p / |p| (ties: lower index),
// gates kept rows by tanh(score), and reconnects them through A^2.
PoolResult TopNPool(const Eigen::MatrixXd& features, const EdgeList& edges,
                    const Eigen::VectorXd& score_vector, double keep);

}  // namespace binscene::scene_graph

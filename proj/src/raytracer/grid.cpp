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

#include <cmath>
#include <numeric>

#include "binscene/core/error.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/raytracer/raytracer.hpp"

namespace binscene::raytracer {

std::vector<Vec3> GridPositions(const geometry::AnnotatedMesh& mesh, double spacing,
                                double clearance) {
  geometry::ValidateMesh(mesh);
  if (!(spacing > 0.0)) ThrowInvalidInput("grid spacing must be positive");
  if (!(clearance >= 0.0)) ThrowInvalidInput("grid clearance must be non-negative");
  const Bvh bvh(mesh.vertices, mesh.faces);
  const geometry::Aabb box = bvh.bounds();
  const Vec3 ext = box.extent();
  int counts[3];
  for (int k = 0; k < 3; ++k) counts[k] = static_cast<int>(std::floor(ext[k] / spacing + 1e-9)) + 1;

  std::vector<Vec3> out;
  for (int i = 0; i < counts[0]; ++i) {
    for (int j = 0; j < counts[1]; ++j) {
      for (int k = 0; k < counts[2]; ++k) {
        const Vec3 p = box.min + spacing * Vec3(i, j, k);
        if (bvh.Distance(p) < clearance - 1e-9) continue;
        if (!bvh.Contains(p)) continue;
        out.push_back(p);
      }
    }
  }
  if (out.empty()) ThrowInvalidInput("zero valid positions");
  return out;
}

SourceListenerSplit SplitSourcesListeners(const std::vector<Vec3>& positions, int n_sources,
                                          std::uint64_t seed) {
  if (positions.empty()) ThrowInvalidInput("no positions to split");
  const std::size_t n = positions.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, n_sources)), n / 2);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates; written out so the draw is identical on every
  // standard library.
  Rng rng(MixSeed(seed, 0x5B17));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> is_source(n, false);
  SourceListenerSplit split;
  for (std::size_t i = 0; i < k; ++i) {
    split.sources.push_back(positions[order[i]]);
    is_source[order[i]] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_source[i]) split.listeners.push_back(positions[i]);
  }
  return split;
}

}  // namespace binscene::raytracer

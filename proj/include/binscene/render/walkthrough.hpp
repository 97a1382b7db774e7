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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binscene/core/bir.hpp"
#include "binscene/geometry/mesh.hpp"
#include "binscene/render/convolve.hpp"

namespace binscene::render {

struct PathPoint {
  double time = 0.0;  // seconds
  geometry::Vec3 position = geometry::Vec3::Zero();
};

struct WalkSource {
  geometry::Vec3 position = geometry::Vec3::Zero();
  std::string audio;  // dry WAV path
};

struct WalkthroughSpec {
  std::string scene;
  std::vector<WalkSource> sources;
  std::vector<PathPoint> path;
  double update_rate = 10.0;  // BIR updates per second
  double crossfade_ms = 100.0;
};

// Relative audio paths are resolved against `base_dir` when it is non-empty.
WalkthroughSpec WalkthroughSpecFromJson(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json WalkthroughSpecToJson(const WalkthroughSpec& spec);

// Timestamps strictly increasing, rates positive, positions inside `bounds`.
void ValidateWalkthroughSpec(const WalkthroughSpec& spec, const std::optional<geometry::Aabb>& bounds = {});

// Linear interpolation along the path, held constant past either end.
geometry::Vec3 PathPosition(const std::vector<PathPoint>& path, double time);

// Input-side crossfade weight of frame k at sample n. Frame k nominally
// covers [k P, (k + 1) P) and ramps linearly over `crossfade` samples centred
// on each interior boundary; the weights of all frames sum to 1.
double FrameWeight(long k, long frames, double n, double period, double crossfade);

using BirProvider = std::function<Bir(const geometry::Vec3& source, const geometry::Vec3& listener)>;

struct RenderOptions {
  std::optional<geometry::Aabb> bounds;
  bool normalize_on_clip = true;
};

struct RenderResult {
  StereoAudio audio;
  bool normalized = false;  // peak exceeded full scale and was scaled to -1 dBFS
  double gain = 1.0;
};

// dry[i] belongs to spec.sources[i]; all share `dry_rate`.
RenderResult RenderWalkthrough(const WalkthroughSpec& spec, const std::vector<std::vector<double>>& dry,
                               double dry_rate, const BirProvider& provider, const RenderOptions& options = {});

}  // namespace binscene::render

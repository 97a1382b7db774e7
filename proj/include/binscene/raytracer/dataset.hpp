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
#include <string>

#include <nlohmann/json.hpp>

#include "binscene/raytracer/raytracer.hpp"

namespace binscene::raytracer {

struct DatasetConfig {
  std::string scene_id = "scene";
  double spacing = 1.0;
  double clearance = 0.2;
  int n_sources = 10;
  SimConfig sim;
  HeadModel head;
};

nlohmann::json DatasetConfigToJson(const DatasetConfig& cfg);

// Writes one 2-channel float WAV per (source, listener) pair and
// manifest.json into out_dir; returns the manifest. Positions are in the
// mesh frame.
nlohmann::json GenerateDataset(const materials::MaterialAnnotatedMesh& mesh,
                               const DatasetConfig& cfg, const std::string& out_dir,
                               std::uint64_t seed, Warnings* warnings = nullptr);

}  // namespace binscene::raytracer

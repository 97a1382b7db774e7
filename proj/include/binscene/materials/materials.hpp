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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "binscene/core/log.hpp"
#include "binscene/geometry/mesh.hpp"

namespace binscene::materials {

inline constexpr int kBandCount = 8;
inline constexpr std::array<double, kBandCount> kBandCenters = {
    62.5, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0};

using BandCoefficients = std::array<double, kBandCount>;

struct MaterialEntry {
  std::string name;
  BandCoefficients absorption{};
};

struct MaterialDatabase {
  std::vector<MaterialEntry> entries;
  // Optional sentence-style embeddings keyed by name. Used for both database
  // entries and query labels by the embedding-cosine matcher.
  std::map<std::string, std::vector<double>> embeddings;

  const MaterialEntry* Find(const std::string& name) const;
};

// Throws kInvalidInput on out-of-range coefficients, duplicate names, or
// embeddings of differing dimension.
void ValidateDatabase(const MaterialDatabase& db);

// CSV `name,a62,a125,a250,a500,a1000,a2000,a4000,a8000` (header optional) or
// JSON: either [{"name":..., "absorption":[8]}] or {"name": [8], ...}.
MaterialDatabase LoadMaterialDatabase(const std::string& path,
                                      const std::string& embeddings_path = "");

// JSON map name -> number array.
std::map<std::string, std::vector<double>> LoadEmbeddings(const std::string& path);

enum class MatchStrategy { kExact, kTokenOverlap, kEmbeddingCosine };

MatchStrategy ParseMatchStrategy(const std::string& name);

// Lowercase, '_' and '-' become spaces, whitespace collapsed and trimmed.
std::string NormalizeLabel(const std::string& label);

double JaccardSimilarity(const std::string& a, const std::string& b);

// kExact: identical normalized name, else falls through to kTokenOverlap.
// kTokenOverlap: highest Jaccard similarity of lowercase token sets; no match
//   when every similarity is zero.
// kEmbeddingCosine: highest cosine similarity; throws kInvalidInput when the
//   query label or any entry lacks an embedding.
// Ties resolve to the lexicographically smallest entry name.
std::optional<MaterialEntry> MatchLabel(const std::string& label,
                                        const MaterialDatabase& db,
                                        MatchStrategy strategy);

enum class BandAverageMode { kMid, kFull };

BandAverageMode ParseBandAverageMode(const std::string& name);

// kMid: mean of the 500 Hz and 1 kHz bands. kFull: mean of all eight.
double BandAverage(const BandCoefficients& absorption, BandAverageMode mode);

struct ScatteringPrior {
  double mean = 0.3;
  double stddev = 0.15;
  double clamp_lo = 0.01;
  double clamp_hi = 0.99;
};

void ValidatePrior(const ScatteringPrior& prior);

// One clamped Normal(mean, stddev) draw; deterministic in `seed`.
double SampleScattering(const ScatteringPrior& prior, std::uint64_t seed);

struct MaterialAnnotatedMesh : geometry::FaceLabeledMesh {
  std::vector<double> absorption;  // per-vertex band-averaged `ab`
  std::vector<double> scattering;  // per-vertex `sc`, constant per scene
  std::vector<BandCoefficients> band_absorption;  // per face
  double scene_scattering = 0.0;
};

inline const MaterialEntry& DefaultMaterial() {
  static const MaterialEntry kDefault{"default", {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}};
  return kDefault;
}

struct AssignOptions {
  BandAverageMode mode = BandAverageMode::kMid;
  // First strategy tried; the chain continues exact -> token-overlap ->
  // embedding-cosine (when embeddings exist) -> default material.
  MatchStrategy strategy = MatchStrategy::kExact;
  ScatteringPrior prior;
  std::uint64_t seed = 0;
};

// Resolves a label through the strategy chain. Returns nullopt when nothing
// matched and the default material applies.
std::optional<MaterialEntry> ResolveLabel(const std::string& label,
                                          const MaterialDatabase& db,
                                          MatchStrategy first);

// One warning per distinct label that fell back to the default material.
MaterialAnnotatedMesh AssignMaterials(const geometry::AnnotatedMesh& mesh,
                                      const MaterialDatabase& db,
                                      const AssignOptions& options,
                                      Warnings* warnings = nullptr);

void ValidateMaterialMesh(const MaterialAnnotatedMesh& mesh);

// PLY with per-vertex label/ab/sc and per-face a0..a7, plus label dictionary
// JSON {"labels": [...], "scene_scattering": sc}.
void WriteMaterialMesh(const MaterialAnnotatedMesh& mesh, const std::string& ply_path,
                       const std::string& labels_path);
MaterialAnnotatedMesh ReadMaterialMesh(const std::string& ply_path,
                                       const std::string& labels_path);

}  // namespace binscene::materials

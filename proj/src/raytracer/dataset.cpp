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

#include "binscene/raytracer/dataset.hpp"

#include <filesystem>
#include <fmt/format.h>

#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"
#include "binscene/core/parallel.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/core/wav.hpp"

namespace binscene::raytracer {

nlohmann::json DatasetConfigToJson(const DatasetConfig& cfg) {
  return {{"scene", cfg.scene_id},
          {"spacing", cfg.spacing},
          {"clearance", cfg.clearance},
          {"n_sources", cfg.n_sources},
          {"sim", SimConfigToJson(cfg.sim)},
          {"head", {{"ear_separation", cfg.head.ear_separation}, {"ild_max_db", cfg.head.ild_max_db}}}};
}

nlohmann::json GenerateDataset(const materials::MaterialAnnotatedMesh& mesh,
                               const DatasetConfig& cfg, const std::string& out_dir,
                               std::uint64_t seed, Warnings* warnings) {
  const auto positions = GridPositions(mesh, cfg.spacing, cfg.clearance);
  const auto split = SplitSourcesListeners(positions, cfg.n_sources, seed);
  if (split.sources.empty() || split.listeners.empty()) {
    ThrowInvalidInput("need at least two grid positions for a source and a listener");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) ThrowIo("cannot create " + out_dir + ": " + ec.message());

  const AcousticScene scene(mesh);
  struct Pair {
    Vec3 src, lst;
    std::uint64_t seed;
    std::string wav;
  };
  std::vector<Pair> pairs;
  for (const auto& s : split.sources) {
    for (const auto& l : split.listeners) {
      const auto index = pairs.size();
      pairs.push_back({s, l, MixSeed(seed, index), fmt::format("pair_{:05d}.wav", index)});
    }
  }

  // Pairs run in parallel; each trace is single-threaded and seeded by its
  // pair index, so the output does not depend on scheduling.
  SimConfig pair_cfg = cfg.sim;
  pair_cfg.threads = 1;
  std::vector<Warnings> pair_warnings(pairs.size());
  ParallelFor(pairs.size(), cfg.sim.threads, [&](std::size_t i) {
    const Pair& p = pairs[i];
    const Bir bir = SimulatePair(scene, p.src, p.lst, pair_cfg, cfg.head, p.seed, &pair_warnings[i]);
    WriteBirWav((std::filesystem::path(out_dir) / p.wav).string(), bir);
  });
  for (const auto& w : pair_warnings) {
    for (const auto& m : w.messages()) Warn(warnings, m);
  }

  nlohmann::json manifest;
  manifest["scene"] = cfg.scene_id;
  manifest["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs) {
    manifest["pairs"].push_back({{"src", {p.src.x(), p.src.y(), p.src.z()}},
                                 {"lst", {p.lst.x(), p.lst.y(), p.lst.z()}},
                                 {"wav", p.wav},
                                 {"seed", p.seed}});
  }
  manifest["config_hash"] = HashJson(DatasetConfigToJson(cfg));
  WriteJsonFile((std::filesystem::path(out_dir) / "manifest.json").string(), manifest);
  return manifest;
}

}  // namespace binscene::raytracer

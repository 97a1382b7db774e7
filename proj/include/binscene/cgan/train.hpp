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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binscene/cgan/graph_ops.hpp"
#include "binscene/cgan/losses.hpp"
#include "binscene/cgan/networks.hpp"

namespace binscene::cgan {

struct TrainConfig {
  double lambda_bir = 1.0;
  double lambda_ed = 1.0;
  double lambda_mse = 1.0;
  double lr = 8e-5;
  double lr_decay = 0.7;
  int decay_every = 7;  // epochs
  int batch = 96;
  int epochs = 100;
  double rms_rho = 0.99;
  double rms_eps = 1e-8;
  std::uint64_t seed = 0;
  bool non_saturating = false;
  // Backpropagate into the scene encoder for graphs up to this many nodes;
  // larger scenes, or joint_encoder = false, use the stored latents.
  bool joint_encoder = true;
  int max_joint_nodes = 512;
};

void ValidateTrainConfig(const TrainConfig& cfg);
nlohmann::json TrainConfigToJson(const TrainConfig& cfg);
// Missing keys keep their defaults.
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

// lr * decay^floor(epoch / decay_every), epochs counted from 0.
double LearningRate(const TrainConfig& cfg, int epoch);

class RmsProp {
 public:
  RmsProp(double rho, double eps) : rho_(rho), eps_(eps) {}
  void Step(ParamSet& set, double lr);

 private:
  double rho_;
  double eps_;
  std::vector<std::vector<double>> mean_square_;
};

struct ObjectiveWeights {
  double gan = 1.0;
  double bir = 1.0;
  double ed = 1.0;
  double mse = 1.0;
  bool non_saturating = false;
};

// Batch means of the individual terms; `root` is the weighted sum on the tape.
struct ObjectiveTerms {
  double l_cgan = 0.0;
  double l_bir = 0.0;
  double l_ed = 0.0;
  double l_mse = 0.0;
  double total = 0.0;
  Tape::Id root = -1;
};

// Batch mean of L_CGAN + λ_BIR L_BIR + λ_ED L_ED + λ_MSE L_MSE. Without a
// discriminator the GAN term is left out.
ObjectiveTerms GeneratorObjective(Tape& t, const std::vector<Tape::Id>& conds,
                                  const std::vector<const codec::PreprocessedBir*>& refs, Generator& g,
                                  Discriminator* d, const ObjectiveWeights& w);

struct TrainRecord {
  int scene = -1;  // index into TrainSet::graphs, or -1
  std::vector<double> latent;
  geometry::Vec3 source = geometry::Vec3::Zero();
  geometry::Vec3 listener = geometry::Vec3::Zero();
  codec::PreprocessedBir bir;
};

struct TrainSet {
  std::vector<TrainRecord> records;
  std::vector<scene_graph::SceneGraph> graphs;
};

struct TrainState {
  Generator generator;
  Discriminator discriminator;
  std::optional<EncoderWeights> encoder;
};

struct HistoryRow {
  int step = 0;
  int epoch = 0;
  double l_cgan = 0.0;
  double l_bir = 0.0;
  double l_ed = 0.0;
  double l_mse = 0.0;
  double l_d = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  TrainState state;
  std::vector<HistoryRow> history;
};

// Alternating D-step (ascent on L_D) and G-step (descent on L_G) per batch.
// Single-threaded and deterministic for a given seed.
TrainResult Train(const TrainSet& data, TrainState init, const TrainConfig& cfg,
                  const std::function<void(const HistoryRow&)>& on_step = {});

std::string HistoryCsv(const std::vector<HistoryRow>& history);

}  // namespace binscene::cgan

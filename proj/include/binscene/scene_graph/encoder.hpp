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
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "binscene/core/tensor_archive.hpp"
#include "binscene/scene_graph/graph.hpp"

namespace binscene::scene_graph {

struct EncoderConfig {
  std::vector<int> layer_widths = {32, 32, 32};
  int readout_hidden = 64;
  int latent_dim = 8;
  double keep_ratio = 0.6;
};

nlohmann::json EncoderConfigToJson(const EncoderConfig& config);
EncoderConfig EncoderConfigFromJson(const nlohmann::json& j);

// Readout input is 2 * sum(layer_widths): all layer means, then all maxes.
struct GraphEncoderParams {
  EncoderConfig config;
  std::vector<Eigen::MatrixXd> layer_weights;  // d_in x d_out
  std::vector<Eigen::VectorXd> pool_scores;    // d_out
  Eigen::MatrixXd readout_w1;                  // hidden x readout_in
  Eigen::VectorXd readout_b1;
  Eigen::MatrixXd readout_w2;                  // latent x hidden
  Eigen::VectorXd readout_b2;

  int readout_input_dim() const;
};

// Glorot-uniform weights, zero biases, unit-variance pooling vectors.
GraphEncoderParams InitEncoderParams(const EncoderConfig& config, std::uint64_t seed);

void ValidateEncoderParams(const GraphEncoderParams& params);

using SceneLatent = Eigen::VectorXd;

// Three (gcn -> pool) stages with per-stage channel mean/max readout, then
// the two-layer ReLU readout. Throws kInvalidInput for graphs under 3 nodes.
SceneLatent EncodeScene(const SceneGraph& graph, const GraphEncoderParams& params);

std::vector<NamedTensor> EncoderTensors(const GraphEncoderParams& params);
GraphEncoderParams EncoderFromTensors(const EncoderConfig& config,
                                      const std::vector<NamedTensor>& tensors);

void SaveEncoderParams(const std::string& prefix, const GraphEncoderParams& params);
GraphEncoderParams LoadEncoderParams(const std::string& prefix);

void WriteLatentJson(const std::string& path, const SceneLatent& latent);
SceneLatent ReadLatentJson(const std::string& path);

}  // namespace binscene::scene_graph

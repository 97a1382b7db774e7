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

#include <nlohmann/json.hpp>

#include "binscene/cgan/autodiff.hpp"
#include "binscene/codec/preprocess.hpp"
#include "binscene/geometry/mesh.hpp"
#include "binscene/scene_graph/encoder.hpp"

namespace binscene::cgan {

// Condition = scene latent ++ source position ++ listener position.
inline constexpr int kPositionDims = 3;

struct GeneratorConfig {
  int cond_dim = 14;
  int base_channels = 32;
  // Output channels and strides of the transposed-convolution stages; the
  // last stage must emit the two ears. Kernel 2s, padding s/2, so each stage
  // multiplies the length by s exactly.
  std::vector<int> channels = {32, 16, 8, 2};
  std::vector<int> strides = {8, 4, 4, 4};
  codec::BirLayout layout = codec::kFullLayout;

  int upsampling() const;
  int base_length() const;
};

struct DiscriminatorConfig {
  int cond_dim = 14;
  std::vector<int> channels = {8, 16, 32, 32};
  int kernel = 4;
  int stride = 2;
  int pad = 1;
  double slope = 0.2;
  codec::BirLayout layout = codec::kFullLayout;

  int feature_length() const;
};

void ValidateGeneratorConfig(const GeneratorConfig& cfg);
void ValidateDiscriminatorConfig(const DiscriminatorConfig& cfg);

nlohmann::json GeneratorConfigToJson(const GeneratorConfig& cfg);
GeneratorConfig GeneratorConfigFromJson(const nlohmann::json& j);
nlohmann::json DiscriminatorConfigToJson(const DiscriminatorConfig& cfg);
DiscriminatorConfig DiscriminatorConfigFromJson(const nlohmann::json& j);

struct ParamSet {
  std::vector<Param> params;

  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  std::size_t count() const;
  void ZeroGrad();
};

struct Generator {
  GeneratorConfig config;
  ParamSet weights;
};

struct Discriminator {
  DiscriminatorConfig config;
  ParamSet weights;
};

Generator InitGenerator(const GeneratorConfig& cfg, std::uint64_t seed);
Discriminator InitDiscriminator(const DiscriminatorConfig& cfg, std::uint64_t seed);

std::vector<double> MakeCondition(const scene_graph::SceneLatent& latent, const geometry::Vec3& source,
                                  const geometry::Vec3& listener);

// cond [cond_dim] -> [2, total]
Tape::Id GeneratorForward(Tape& t, Tape::Id cond, Generator& g);
// bir [2, total], cond [cond_dim] -> logit [1]
Tape::Id DiscriminatorForward(Tape& t, Tape::Id bir, Tape::Id cond, Discriminator& d);

// Inference without a tape.
codec::PreprocessedBir Generate(const Generator& g, const std::vector<double>& cond);
double DiscriminatorLogit(const Discriminator& d, const std::vector<double>& bir_flat,
                          const std::vector<double>& cond);

std::vector<NamedTensor> ToTensors(const ParamSet& set);
void AssignTensors(ParamSet& set, const std::vector<NamedTensor>& tensors);

}  // namespace binscene::cgan

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

#include "binscene/cgan/checkpoint.hpp"

#include "binscene/core/error.hpp"
#include "binscene/core/tensor_archive.hpp"

namespace binscene::cgan {

void SaveCheckpoint(const std::string& prefix, const TrainState& state, const TrainConfig& cfg) {
  std::vector<NamedTensor> tensors = ToTensors(state.generator.weights);
  for (auto& t : ToTensors(state.discriminator.weights)) tensors.push_back(std::move(t));
  nlohmann::json meta = {{"generator", GeneratorConfigToJson(state.generator.config)},
                         {"discriminator", DiscriminatorConfigToJson(state.discriminator.config)},
                         {"train", TrainConfigToJson(cfg)},
                         {"encoder", nullptr}};
  if (state.encoder) {
    meta["encoder"] = scene_graph::EncoderConfigToJson(state.encoder->config);
    for (auto& t : ToTensors(state.encoder->weights)) tensors.push_back(std::move(t));
  }
  SaveTensorArchive(prefix, tensors, meta);
}

Checkpoint LoadCheckpoint(const std::string& prefix) {
  const LoadedArchive archive = LoadTensorArchive(prefix);
  const auto& meta = archive.meta;
  if (!meta.contains("generator") || !meta.contains("discriminator")) {
    ThrowInvalidInput("checkpoint " + prefix + " lacks network configs");
  }
  Checkpoint ck;
  ck.train = TrainConfigFromJson(meta.value("train", nlohmann::json::object()));
  ck.state.generator = InitGenerator(GeneratorConfigFromJson(meta.at("generator")), 0);
  AssignTensors(ck.state.generator.weights, archive.tensors);
  ck.state.discriminator = InitDiscriminator(DiscriminatorConfigFromJson(meta.at("discriminator")), 0);
  AssignTensors(ck.state.discriminator.weights, archive.tensors);
  if (meta.contains("encoder") && !meta.at("encoder").is_null()) {
    const auto config = scene_graph::EncoderConfigFromJson(meta.at("encoder"));
    ck.state.encoder = ToEncoderWeights(scene_graph::EncoderFromTensors(config, archive.tensors));
  }
  return ck;
}

}  // namespace binscene::cgan

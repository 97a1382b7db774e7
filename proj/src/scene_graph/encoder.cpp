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

#include "binscene/scene_graph/encoder.hpp"

#include <cmath>
#include <numeric>

#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"
#include "binscene/core/rng.hpp"

namespace binscene::scene_graph {

namespace {

Eigen::MatrixXd GlorotUniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * Uniform01(rng) - 1.0) * limit;
  }
  return m;
}

void CheckShape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    ThrowInvalidInput(name + " has shape " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                      "x" + std::to_string(cols));
  }
  if (!m.allFinite()) ThrowInvalidInput(name + " is not finite");
}

NamedTensor ToTensor(const std::string& name, const Eigen::MatrixXd& m) {
  NamedTensor t{name, {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, {}};
  t.values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.values.push_back(m(i, j));
  }
  return t;
}

Eigen::MatrixXd FromTensor(const NamedTensor& t) {
  if (t.shape.size() != 2 || t.shape[0] * t.shape[1] != t.values.size()) {
    ThrowInvalidInput("tensor " + t.name + " is not a matrix");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1]));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t.values[k++];
  }
  return m;
}

const NamedTensor& FindTensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  ThrowInvalidInput("missing tensor " + name);
}


}  // namespace

nlohmann::json EncoderConfigToJson(const EncoderConfig& c) {
  return {{"layer_widths", c.layer_widths},
          {"readout_hidden", c.readout_hidden},
          {"latent_dim", c.latent_dim},
          {"keep_ratio", c.keep_ratio}};
}

EncoderConfig EncoderConfigFromJson(const nlohmann::json& j) {
  EncoderConfig c;
  c.layer_widths = j.at("layer_widths").get<std::vector<int>>();
  c.readout_hidden = j.at("readout_hidden").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.keep_ratio = j.at("keep_ratio").get<double>();
  return c;
}

int GraphEncoderParams::readout_input_dim() const {
  return 2 * std::accumulate(config.layer_widths.begin(), config.layer_widths.end(), 0);
}

GraphEncoderParams InitEncoderParams(const EncoderConfig& config, std::uint64_t seed) {
  if (config.layer_widths.empty() || config.readout_hidden <= 0 || config.latent_dim <= 0) {
    ThrowInvalidInput("encoder config has empty dimensions");
  }
  GraphEncoderParams params;
  params.config = config;
  Rng rng(MixSeed(seed, 0x6E0));
  std::normal_distribution<double> normal(0.0, 1.0);
  int in = kNodeFeatureDim;
  for (int width : config.layer_widths) {
    if (width <= 0) ThrowInvalidInput("encoder layer width must be positive");
    params.layer_weights.push_back(GlorotUniform(in, width, rng));
    Eigen::VectorXd p(width);
    for (auto& v : p) v = normal(rng);
    params.pool_scores.push_back(p);
    in = width;
  }
  params.readout_w1 = GlorotUniform(config.readout_hidden, params.readout_input_dim(), rng);
  params.readout_b1 = Eigen::VectorXd::Zero(config.readout_hidden);
  params.readout_w2 = GlorotUniform(config.latent_dim, config.readout_hidden, rng);
  params.readout_b2 = Eigen::VectorXd::Zero(config.latent_dim);
  return params;
}

void ValidateEncoderParams(const GraphEncoderParams& params) {
  const auto& c = params.config;
  if (params.layer_weights.size() != c.layer_widths.size() ||
      params.pool_scores.size() != c.layer_widths.size()) {
    ThrowInvalidInput("encoder layer count mismatch");
  }
  Eigen::Index in = kNodeFeatureDim;
  for (std::size_t l = 0; l < c.layer_widths.size(); ++l) {
    const std::string tag = std::to_string(l);
    CheckShape(params.layer_weights[l], in, c.layer_widths[l], "gcn weight " + tag);
    CheckShape(params.pool_scores[l], c.layer_widths[l], 1, "pool vector " + tag);
    in = c.layer_widths[l];
  }
  CheckShape(params.readout_w1, c.readout_hidden, params.readout_input_dim(), "readout w1");
  CheckShape(params.readout_b1, c.readout_hidden, 1, "readout b1");
  CheckShape(params.readout_w2, c.latent_dim, c.readout_hidden, "readout w2");
  CheckShape(params.readout_b2, c.latent_dim, 1, "readout b2");
}

SceneLatent EncodeScene(const SceneGraph& graph, const GraphEncoderParams& params) {
  ValidateGraph(graph);
  ValidateEncoderParams(params);
  if (graph.node_count() < 3) {
    ThrowInvalidInput("graph too small: " + std::to_string(graph.node_count()) +
                      " nodes, need at least 3");
  }
  const std::size_t layers = params.layer_weights.size();
  Eigen::VectorXd readout(params.readout_input_dim());
  Eigen::Index mean_at = 0;
  Eigen::Index max_at = readout.size() / 2;

  Eigen::MatrixXd x = graph.features;
  EdgeList edges = graph.edges;
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::MatrixXd h = GcnLayer(x, edges, params.layer_weights[l]);
    PoolResult pooled = TopNPool(h, edges, params.pool_scores[l], params.config.keep_ratio);
    const Eigen::Index w = pooled.features.cols();
    readout.segment(mean_at, w) = pooled.features.colwise().mean().transpose();
    readout.segment(max_at, w) = pooled.features.colwise().maxCoeff().transpose();
    mean_at += w;
    max_at += w;
    x = std::move(pooled.features);
    edges = std::move(pooled.edges);
  }
  const Eigen::VectorXd hidden =
      (params.readout_w1 * readout + params.readout_b1).cwiseMax(0.0);
  SceneLatent latent = params.readout_w2 * hidden + params.readout_b2;
  if (!latent.allFinite()) ThrowNumerical("scene latent is not finite");
  return latent;
}

std::vector<NamedTensor> EncoderTensors(const GraphEncoderParams& params) {
  std::vector<NamedTensor> out;
  for (std::size_t l = 0; l < params.layer_weights.size(); ++l) {
    out.push_back(ToTensor("encoder.gcn" + std::to_string(l) + ".weight", params.layer_weights[l]));
    out.push_back(ToTensor("encoder.pool" + std::to_string(l) + ".score", params.pool_scores[l]));
  }
  out.push_back(ToTensor("encoder.readout0.weight", params.readout_w1));
  out.push_back(ToTensor("encoder.readout0.bias", params.readout_b1));
  out.push_back(ToTensor("encoder.readout1.weight", params.readout_w2));
  out.push_back(ToTensor("encoder.readout1.bias", params.readout_b2));
  return out;
}

GraphEncoderParams EncoderFromTensors(const EncoderConfig& config,
                                      const std::vector<NamedTensor>& tensors) {
  GraphEncoderParams params;
  params.config = config;
  for (std::size_t l = 0; l < config.layer_widths.size(); ++l) {
    params.layer_weights.push_back(
        FromTensor(FindTensor(tensors, "encoder.gcn" + std::to_string(l) + ".weight")));
    params.pool_scores.push_back(
        FromTensor(FindTensor(tensors, "encoder.pool" + std::to_string(l) + ".score")).col(0));
  }
  params.readout_w1 = FromTensor(FindTensor(tensors, "encoder.readout0.weight"));
  params.readout_b1 = FromTensor(FindTensor(tensors, "encoder.readout0.bias")).col(0);
  params.readout_w2 = FromTensor(FindTensor(tensors, "encoder.readout1.weight"));
  params.readout_b2 = FromTensor(FindTensor(tensors, "encoder.readout1.bias")).col(0);
  ValidateEncoderParams(params);
  return params;
}

void SaveEncoderParams(const std::string& prefix, const GraphEncoderParams& params) {
  ValidateEncoderParams(params);
  SaveTensorArchive(prefix, EncoderTensors(params), {{"encoder", EncoderConfigToJson(params.config)}});
}

GraphEncoderParams LoadEncoderParams(const std::string& prefix) {
  const LoadedArchive archive = LoadTensorArchive(prefix);
  if (!archive.meta.contains("encoder")) ThrowInvalidInput(prefix + ": no encoder config");
  return EncoderFromTensors(EncoderConfigFromJson(archive.meta.at("encoder")), archive.tensors);
}

void WriteLatentJson(const std::string& path, const SceneLatent& latent) {
  WriteJsonFile(path, std::vector<double>(latent.data(), latent.data() + latent.size()));
}

SceneLatent ReadLatentJson(const std::string& path) {
  const auto j = ReadJsonFile(path);
  if (!j.is_array()) ThrowInvalidInput(path + ": latent must be a JSON array");
  const auto values = j.get<std::vector<double>>();
  SceneLatent latent = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                         static_cast<Eigen::Index>(values.size()));
  if (!latent.allFinite()) ThrowInvalidInput(path + ": latent not finite");
  return latent;
}

}  // namespace binscene::scene_graph

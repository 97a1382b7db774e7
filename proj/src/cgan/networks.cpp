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

#include "binscene/cgan/networks.hpp"

#include <algorithm>
#include <cmath>

#include "binscene/core/error.hpp"
#include "binscene/core/rng.hpp"

namespace binscene::cgan {

int GeneratorConfig::upsampling() const {
  int f = 1;
  for (int s : strides) f *= s;
  return f;
}

int GeneratorConfig::base_length() const {
  const int up = upsampling();
  return (layout.total() + up - 1) / up;
}

int DiscriminatorConfig::feature_length() const {
  int len = layout.total();
  for (std::size_t l = 0; l < channels.size(); ++l) len = kernel::ConvLength(len, kernel, stride, pad);
  return len;
}

void ValidateGeneratorConfig(const GeneratorConfig& cfg) {
  if (cfg.cond_dim <= 0 || cfg.base_channels <= 0) ThrowInvalidInput("generator: bad dimensions");
  if (cfg.channels.empty() || cfg.channels.size() != cfg.strides.size()) {
    ThrowInvalidInput("generator: channels and strides must have the same nonzero length");
  }
  if (cfg.channels.back() != 2) ThrowInvalidInput("generator: last stage must have 2 channels");
  for (int c : cfg.channels) {
    if (c <= 0) ThrowInvalidInput("generator: channel counts must be positive");
  }
  for (int s : cfg.strides) {
    if (s < 2 || s % 2 != 0) ThrowInvalidInput("generator: strides must be even and at least 2");
  }
  if (cfg.layout.body <= 0 || cfg.layout.sd_block <= 0) ThrowInvalidInput("generator: bad layout");
}

void ValidateDiscriminatorConfig(const DiscriminatorConfig& cfg) {
  if (cfg.cond_dim <= 0 || cfg.channels.empty()) ThrowInvalidInput("discriminator: bad dimensions");
  if (cfg.kernel <= 0 || cfg.stride <= 0 || cfg.pad < 0) ThrowInvalidInput("discriminator: bad conv geometry");
  if (cfg.layout.body <= 0 || cfg.layout.sd_block <= 0) ThrowInvalidInput("discriminator: bad layout");
  int len = cfg.layout.total();
  for (int c : cfg.channels) {
    if (c <= 0) ThrowInvalidInput("discriminator: channel counts must be positive");
    len = kernel::ConvLength(len, cfg.kernel, cfg.stride, cfg.pad);
    if (len <= 0) ThrowInvalidInput("discriminator: input too short for the conv stack");
  }
}

namespace {

nlohmann::json LayoutToJson(const codec::BirLayout& l) { return {{"body", l.body}, {"sd_block", l.sd_block}}; }

codec::BirLayout LayoutFromJson(const nlohmann::json& j) {
  return {j.at("body").get<int>(), j.at("sd_block").get<int>()};
}

}  // namespace

nlohmann::json GeneratorConfigToJson(const GeneratorConfig& cfg) {
  return {{"cond_dim", cfg.cond_dim},
          {"base_channels", cfg.base_channels},
          {"channels", cfg.channels},
          {"strides", cfg.strides},
          {"layout", LayoutToJson(cfg.layout)}};
}

GeneratorConfig GeneratorConfigFromJson(const nlohmann::json& j) {
  GeneratorConfig cfg;
  cfg.cond_dim = j.value("cond_dim", cfg.cond_dim);
  cfg.base_channels = j.value("base_channels", cfg.base_channels);
  cfg.channels = j.value("channels", cfg.channels);
  cfg.strides = j.value("strides", cfg.strides);
  if (j.contains("layout")) cfg.layout = LayoutFromJson(j.at("layout"));
  ValidateGeneratorConfig(cfg);
  return cfg;
}

nlohmann::json DiscriminatorConfigToJson(const DiscriminatorConfig& cfg) {
  return {{"cond_dim", cfg.cond_dim}, {"channels", cfg.channels}, {"kernel", cfg.kernel},
          {"stride", cfg.stride},     {"pad", cfg.pad},           {"slope", cfg.slope},
          {"layout", LayoutToJson(cfg.layout)}};
}

DiscriminatorConfig DiscriminatorConfigFromJson(const nlohmann::json& j) {
  DiscriminatorConfig cfg;
  cfg.cond_dim = j.value("cond_dim", cfg.cond_dim);
  cfg.channels = j.value("channels", cfg.channels);
  cfg.kernel = j.value("kernel", cfg.kernel);
  cfg.stride = j.value("stride", cfg.stride);
  cfg.pad = j.value("pad", cfg.pad);
  cfg.slope = j.value("slope", cfg.slope);
  if (j.contains("layout")) cfg.layout = LayoutFromJson(j.at("layout"));
  ValidateDiscriminatorConfig(cfg);
  return cfg;
}

Param& ParamSet::at(const std::string& name) {
  for (auto& p : params) {
    if (p.name == name) return p;
  }
  ThrowInvalidInput("unknown parameter " + name);
}

const Param& ParamSet::at(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  ThrowInvalidInput("unknown parameter " + name);
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

void ParamSet::ZeroGrad() {
  for (auto& p : params) p.ZeroGrad();
}

namespace {

constexpr double kReluBias = 0.01;

// Uniform with variance gain2 / fan_in.
void FillUniform(Param& p, double fan_in, double gain2, Rng& rng) {
  const double limit = std::sqrt(3.0 * gain2 / fan_in);
  for (auto& v : p.value) v = (2.0 * Uniform01(rng) - 1.0) * limit;
}

std::string GName(std::size_t l, const char* part) {
  return "generator.up" + std::to_string(l) + "." + part;
}

}  // namespace

Generator InitGenerator(const GeneratorConfig& cfg, std::uint64_t seed) {
  ValidateGeneratorConfig(cfg);
  Generator g{cfg, {}};
  Rng rng(MixSeed(seed, 0x6E7));
  const int width = cfg.base_channels * cfg.base_length();
  Param fc_w("generator.fc.weight", {width, cfg.cond_dim});
  FillUniform(fc_w, cfg.cond_dim, 2.0, rng);
  g.weights.params.push_back(std::move(fc_w));
  Param fc_b("generator.fc.bias", {width});
  std::fill(fc_b.value.begin(), fc_b.value.end(), kReluBias);
  g.weights.params.push_back(std::move(fc_b));
  int cin = cfg.base_channels;
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const int s = cfg.strides[l];
    const int cout = cfg.channels[l];
    const bool last = l + 1 == cfg.channels.size();
    Param w(GName(l, "weight"), {cin, cout, 2 * s});
    // Each output sample sees cin * (2s / s) taps.
    FillUniform(w, 2.0 * cin, last ? 1.0 : 2.0, rng);
    g.weights.params.push_back(std::move(w));
    Param b(GName(l, "bias"), {cout});
    // A zero bias puts units fed by all-zero windows exactly on the ReLU kink.
    if (!last) std::fill(b.value.begin(), b.value.end(), kReluBias);
    g.weights.params.push_back(std::move(b));
    cin = cout;
  }
  return g;
}

Discriminator InitDiscriminator(const DiscriminatorConfig& cfg, std::uint64_t seed) {
  ValidateDiscriminatorConfig(cfg);
  Discriminator d{cfg, {}};
  Rng rng(MixSeed(seed, 0xD15));
  const double leaky_gain2 = 2.0 / (1.0 + cfg.slope * cfg.slope);
  int cin = 2 + cfg.cond_dim;
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const int cout = cfg.channels[l];
    Param w("discriminator.conv" + std::to_string(l) + ".weight", {cout, cin, cfg.kernel});
    FillUniform(w, static_cast<double>(cin * cfg.kernel), leaky_gain2, rng);
    d.weights.params.push_back(std::move(w));
    d.weights.params.emplace_back("discriminator.conv" + std::to_string(l) + ".bias", std::vector<int>{cout});
    cin = cout;
  }
  const int features = cin * cfg.feature_length();
  Param head("discriminator.head.weight", {1, features});
  FillUniform(head, features, 1.0, rng);
  d.weights.params.push_back(std::move(head));
  d.weights.params.emplace_back("discriminator.head.bias", std::vector<int>{1});
  return d;
}

std::vector<double> MakeCondition(const scene_graph::SceneLatent& latent, const geometry::Vec3& source,
                                  const geometry::Vec3& listener) {
  std::vector<double> c(latent.data(), latent.data() + latent.size());
  for (int i = 0; i < kPositionDims; ++i) c.push_back(source[i]);
  for (int i = 0; i < kPositionDims; ++i) c.push_back(listener[i]);
  for (double v : c) {
    if (!std::isfinite(v)) ThrowInvalidInput("condition vector is not finite");
  }
  return c;
}

Tape::Id GeneratorForward(Tape& t, Tape::Id cond, Generator& g) {
  const auto& cfg = g.config;
  if (t.value(cond).size() != static_cast<std::size_t>(cfg.cond_dim)) {
    ThrowInvalidInput("generator: condition has the wrong length");
  }
  auto& w = g.weights;
  Tape::Id h = op::Affine(t, cond, t.Use(w.at("generator.fc.weight")), t.Use(w.at("generator.fc.bias")));
  h = op::Relu(t, h);
  h = op::Reshape(t, h, {cfg.base_channels, cfg.base_length()});
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const int s = cfg.strides[l];
    h = op::ConvTranspose1d(t, h, t.Use(w.at(GName(l, "weight"))), t.Use(w.at(GName(l, "bias"))), s,
                            s / 2);
    if (l + 1 < cfg.channels.size()) h = op::Relu(t, h);
  }
  return op::Crop(t, h, cfg.layout.total());
}

Tape::Id DiscriminatorForward(Tape& t, Tape::Id bir, Tape::Id cond, Discriminator& d) {
  const auto& cfg = d.config;
  const auto& shape = t.shape(bir);
  if (shape.size() != 2 || shape[0] != 2 || shape[1] != cfg.layout.total()) {
    ThrowInvalidInput("discriminator: input must be [2, total]");
  }
  if (t.value(cond).size() != static_cast<std::size_t>(cfg.cond_dim)) {
    ThrowInvalidInput("discriminator: condition has the wrong length");
  }
  auto& w = d.weights;
  Tape::Id h = op::ConcatRows(t, bir, op::Broadcast(t, cond, cfg.layout.total()));
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const std::string stem = "discriminator.conv" + std::to_string(l);
    h = op::Conv1d(t, h, t.Use(w.at(stem + ".weight")), t.Use(w.at(stem + ".bias")), cfg.stride, cfg.pad);
    h = op::LeakyRelu(t, h, cfg.slope);
  }
  h = op::Reshape(t, h, {static_cast<int>(t.value(h).size())});
  return op::Affine(t, h, t.Use(w.at("discriminator.head.weight")), t.Use(w.at("discriminator.head.bias")));
}

namespace {

void LeakyInPlace(std::vector<double>& v, double slope) {
  for (auto& x : v) {
    if (x < 0.0) x *= slope;
  }
}

}  // namespace

codec::PreprocessedBir Generate(const Generator& g, const std::vector<double>& cond) {
  const auto& cfg = g.config;
  if (cond.size() != static_cast<std::size_t>(cfg.cond_dim)) {
    ThrowInvalidInput("generator: condition has the wrong length");
  }
  const auto& w = g.weights;
  int channels = cfg.base_channels;
  int len = cfg.base_length();
  std::vector<double> h(static_cast<std::size_t>(channels * len));
  kernel::Affine(w.at("generator.fc.weight").value.data(), w.at("generator.fc.bias").value.data(), cond.data(),
                 channels * len, cfg.cond_dim, h.data());
  LeakyInPlace(h, 0.0);
  std::vector<double> next;
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const int s = cfg.strides[l];
    const int cout = cfg.channels[l];
    const int out_len = kernel::ConvTransposeLength(len, 2 * s, s, s / 2);
    next.assign(static_cast<std::size_t>(cout * out_len), 0.0);
    kernel::ConvTranspose1d(h.data(), channels, len, w.at(GName(l, "weight")).value.data(),
                            w.at(GName(l, "bias")).value.data(), cout, 2 * s, s, s / 2, next.data());
    if (l + 1 < cfg.channels.size()) LeakyInPlace(next, 0.0);
    h.swap(next);
    channels = cout;
    len = out_len;
  }
  const int total = cfg.layout.total();
  codec::PreprocessedBir out;
  out.layout = cfg.layout;
  out.left.assign(h.begin(), h.begin() + total);
  out.right.assign(h.begin() + len, h.begin() + len + total);
  return out;
}

double DiscriminatorLogit(const Discriminator& d, const std::vector<double>& bir_flat,
                          const std::vector<double>& cond) {
  const auto& cfg = d.config;
  const int total = cfg.layout.total();
  if (bir_flat.size() != static_cast<std::size_t>(2 * total) ||
      cond.size() != static_cast<std::size_t>(cfg.cond_dim)) {
    ThrowInvalidInput("discriminator: input shape mismatch");
  }
  int channels = 2 + cfg.cond_dim;
  int len = total;
  std::vector<double> h(bir_flat);
  for (double c : cond) h.insert(h.end(), static_cast<std::size_t>(total), c);
  std::vector<double> next;
  const auto& w = d.weights;
  for (std::size_t l = 0; l < cfg.channels.size(); ++l) {
    const std::string stem = "discriminator.conv" + std::to_string(l);
    const int cout = cfg.channels[l];
    const int out_len = kernel::ConvLength(len, cfg.kernel, cfg.stride, cfg.pad);
    next.assign(static_cast<std::size_t>(cout * out_len), 0.0);
    kernel::Conv1d(h.data(), channels, len, w.at(stem + ".weight").value.data(), w.at(stem + ".bias").value.data(),
                   cout, cfg.kernel, cfg.stride, cfg.pad, next.data());
    LeakyInPlace(next, cfg.slope);
    h.swap(next);
    channels = cout;
    len = out_len;
  }
  double logit = 0.0;
  kernel::Affine(w.at("discriminator.head.weight").value.data(), w.at("discriminator.head.bias").value.data(),
                 h.data(), 1, channels * len, &logit);
  return logit;
}

std::vector<NamedTensor> ToTensors(const ParamSet& set) {
  std::vector<NamedTensor> out;
  for (const auto& p : set.params) {
    NamedTensor t;
    t.name = p.name;
    for (int d : p.shape) t.shape.push_back(static_cast<std::size_t>(d));
    t.values = p.value;
    out.push_back(std::move(t));
  }
  return out;
}

void AssignTensors(ParamSet& set, const std::vector<NamedTensor>& tensors) {
  for (auto& p : set.params) {
    const NamedTensor* found = nullptr;
    for (const auto& t : tensors) {
      if (t.name == p.name) found = &t;
    }
    if (!found) ThrowInvalidInput("checkpoint is missing tensor " + p.name);
    std::vector<int> shape;
    for (auto d : found->shape) shape.push_back(static_cast<int>(d));
    if (shape != p.shape) ThrowInvalidInput("checkpoint tensor " + p.name + " has the wrong shape");
    for (double v : found->values) {
      if (!std::isfinite(v)) ThrowInvalidInput("checkpoint tensor " + p.name + " is not finite");
    }
    p.value = found->values;
    p.ZeroGrad();
  }
}

}  // namespace binscene::cgan

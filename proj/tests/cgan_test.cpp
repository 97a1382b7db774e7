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

#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "binscene/cgan/autodiff.hpp"
#include "binscene/cgan/checkpoint.hpp"
#include "binscene/cgan/grad_check.hpp"
#include "binscene/cgan/graph_ops.hpp"
#include "binscene/cgan/losses.hpp"
#include "binscene/cgan/networks.hpp"
#include "binscene/cgan/train.hpp"
#include "binscene/codec/decay.hpp"
#include "binscene/core/error.hpp"
#include "binscene/core/rng.hpp"
#include "support/temp_dir.hpp"

namespace binscene::cgan {
namespace {

using binscene::testing::TempDir;
using codec::PreprocessedBir;

GeneratorConfig TinyGenerator() {
  GeneratorConfig cfg;
  cfg.base_channels = 4;
  cfg.channels = {4, 4, 2};
  cfg.strides = {4, 4, 4};
  cfg.layout = codec::kDeskLayout;
  return cfg;
}

DiscriminatorConfig TinyDiscriminator() {
  DiscriminatorConfig cfg;
  cfg.channels = {4, 4};
  cfg.layout = codec::kDeskLayout;
  return cfg;
}

std::vector<double> RandomVector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (2.0 * Uniform01(rng) - 1.0);
  return v;
}

// Decaying noise in the body and a constant SD block, like a real record.
PreprocessedBir SyntheticBir(const codec::BirLayout& layout, std::uint64_t seed, double sd = 0.02) {
  PreprocessedBir p;
  p.layout = layout;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int ear = 0; ear < 2; ++ear) {
    auto& c = p.channel(ear);
    c.resize(static_cast<std::size_t>(layout.total()));
    for (int i = 0; i < layout.body; ++i) c[static_cast<std::size_t>(i)] = normal(rng) * std::exp(-3.0 * i / layout.body);
    for (int i = layout.body; i < layout.total(); ++i) c[static_cast<std::size_t>(i)] = sd;
  }
  return p;
}

std::vector<double> Condition(std::uint64_t seed) { return RandomVector(14, seed, 2.0); }

struct FdReport {
  double worst = 0.0;
  std::string where;
};

// Central differences of a scalar tape function against Backward, over every
// coordinate of `params`.
FdReport CompareWithFiniteDifferences(const std::function<Tape::Id(Tape&)>& build, const std::vector<Param*>& params,
                                      double h = 1e-6) {
  for (auto* p : params) p->ZeroGrad();
  {
    Tape t;
    t.Backward(build(t));
  }
  FdReport rep;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      Tape up;
      const double fu = up.scalar(build(up));
      p->value[i] = saved - h;
      Tape down;
      const double fd = down.scalar(build(down));
      p->value[i] = saved;
      const double n = (fu - fd) / (2 * h);
      const double a = p->grad[i];
      if (std::abs(a) + std::abs(n) < 1e-10) continue;
      // Below ~1e-4 the difference quotient is dominated by roundoff.
      const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-4});
      if (err > rep.worst) {
        rep.worst = err;
        rep.where = p->name + "[" + std::to_string(i) + "] a=" + std::to_string(a) + " n=" + std::to_string(n);
      }
    }
  }
  return rep;
}

TEST(Kernels, ConvTransposeMatchesDefinition) {
  const int cin = 3, cout = 2, len = 5, k = 4, s = 2, pad = 1;
  const auto x = RandomVector(cin * len, 1), w = RandomVector(cin * cout * k, 2), b = RandomVector(cout, 3);
  const int out_len = kernel::ConvTransposeLength(len, k, s, pad);
  ASSERT_EQ(out_len, (len - 1) * s - 2 * pad + k);
  std::vector<double> y(static_cast<std::size_t>(cout * out_len));
  kernel::ConvTranspose1d(x.data(), cin, len, w.data(), b.data(), cout, k, s, pad, y.data());
  std::vector<double> ref(y.size());
  for (int co = 0; co < cout; ++co) {
    for (int o = 0; o < out_len; ++o) ref[static_cast<std::size_t>(co * out_len + o)] = b[static_cast<std::size_t>(co)];
  }
  for (int ci = 0; ci < cin; ++ci) {
    for (int i = 0; i < len; ++i) {
      for (int co = 0; co < cout; ++co) {
        for (int j = 0; j < k; ++j) {
          const int o = i * s - pad + j;
          if (o < 0 || o >= out_len) continue;
          ref[static_cast<std::size_t>(co * out_len + o)] +=
              x[static_cast<std::size_t>(ci * len + i)] * w[static_cast<std::size_t>((ci * cout + co) * k + j)];
        }
      }
    }
  }
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
}

TEST(Kernels, ConvMatchesDefinition) {
  const int cin = 2, cout = 3, len = 9, k = 4, s = 2, pad = 1;
  const auto x = RandomVector(cin * len, 4), w = RandomVector(cout * cin * k, 5), b = RandomVector(cout, 6);
  const int out_len = kernel::ConvLength(len, k, s, pad);
  ASSERT_EQ(out_len, (len + 2 * pad - k) / s + 1);
  std::vector<double> y(static_cast<std::size_t>(cout * out_len));
  kernel::Conv1d(x.data(), cin, len, w.data(), b.data(), cout, k, s, pad, y.data());
  for (int co = 0; co < cout; ++co) {
    for (int o = 0; o < out_len; ++o) {
      double ref = b[static_cast<std::size_t>(co)];
      for (int ci = 0; ci < cin; ++ci) {
        for (int j = 0; j < k; ++j) {
          const int i = o * s - pad + j;
          if (i < 0 || i >= len) continue;
          ref += x[static_cast<std::size_t>(ci * len + i)] * w[static_cast<std::size_t>((co * cin + ci) * k + j)];
        }
      }
      EXPECT_NEAR(y[static_cast<std::size_t>(co * out_len + o)], ref, 1e-12);
    }
  }
}

TEST(Autodiff, OpsMatchFiniteDifferences) {
  Param x("x", {3, 6}), wt("wt", {3, 2, 4}), bt("bt", {2}), wc("wc", {2, 4, 4}), bc("bc", {2});
  Param wa("wa", {1, 24}), ba("ba", {1}), v("v", {2});
  const std::vector<Param*> params = {&x, &wt, &bt, &wc, &bc, &wa, &ba, &v};
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = RandomVector(params[i]->size(), 100 + i);
  const auto build = [&](Tape& t) {
    Tape::Id h = op::ConvTranspose1d(t, t.Use(x), t.Use(wt), t.Use(bt), 2, 1);  // [2, 12]
    h = op::LeakyRelu(t, h, 0.2);
    h = op::ConcatRows(t, h, op::Broadcast(t, t.Use(v), 12));  // [4, 12]
    h = op::Conv1d(t, h, t.Use(wc), t.Use(bc), 2, 1);           // [2, 6]
    h = op::Relu(t, op::Add(t, h, op::Scale(t, h, 0.5)));
    h = op::Crop(t, h, 5);
    const Tape::Id tail = op::Crop(t, op::Reshape(t, t.Use(x), {1, 18}), 14);
    h = op::Reshape(t, op::Concat(t, {h, tail}), {24});
    const Tape::Id y = op::Affine(t, h, t.Use(wa), t.Use(ba));
    return op::WeightedSum(t, {y}, {1.0});
  };
  const auto rep = CompareWithFiniteDifferences(build, params);
  EXPECT_LT(rep.worst, 1e-6) << rep.where;
}

TEST(Generator, DefaultConfigEmitsFullLayout) {
  const GeneratorConfig cfg;
  EXPECT_EQ(cfg.upsampling(), 512);
  EXPECT_EQ(cfg.base_length(), 8);
  const auto g = InitGenerator(cfg, 1);
  const auto out = Generate(g, Condition(2));
  EXPECT_EQ(out.left.size(), 4096u);
  EXPECT_EQ(out.right.size(), 4096u);
}

TEST(Generator, DeterministicForSeed) {
  const auto a = Generate(InitGenerator(TinyGenerator(), 5), Condition(1));
  const auto b = Generate(InitGenerator(TinyGenerator(), 5), Condition(1));
  const auto c = Generate(InitGenerator(TinyGenerator(), 6), Condition(1));
  EXPECT_EQ(a.left, b.left);
  EXPECT_EQ(a.right, b.right);
  EXPECT_NE(a.left, c.left);
  EXPECT_EQ(a.left.size(), 544u);
}

TEST(Generator, ZeroWeightsGiveLastBiasImage) {
  auto g = InitGenerator(TinyGenerator(), 3);
  for (auto& p : g.weights.params) std::fill(p.value.begin(), p.value.end(), 0.0);
  g.weights.at("generator.up2.bias").value = {0.3, -0.2};
  const auto out = Generate(g, Condition(4));
  for (double v : out.left) EXPECT_DOUBLE_EQ(v, 0.3);
  for (double v : out.right) EXPECT_DOUBLE_EQ(v, -0.2);
}

TEST(Generator, TapeForwardMatchesInference) {
  auto g = InitGenerator(TinyGenerator(), 8);
  auto d = InitDiscriminator(TinyDiscriminator(), 9);
  const auto cond = Condition(10);
  Tape t;
  const Tape::Id c = t.Constant(cond, {14});
  const Tape::Id out = GeneratorForward(t, c, g);
  EXPECT_EQ(t.shape(out), (std::vector<int>{2, 544}));
  const auto flat = FlattenBir(Generate(g, cond));
  ASSERT_EQ(t.value(out).size(), flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) EXPECT_NEAR(t.value(out)[i], flat[i], 1e-12);
  const Tape::Id logit = DiscriminatorForward(t, out, c, d);
  EXPECT_NEAR(t.scalar(logit), DiscriminatorLogit(d, flat, cond), 1e-12);
}

TEST(Generator, WrongConditionLengthThrows) {
  const auto g = InitGenerator(TinyGenerator(), 1);
  EXPECT_THROW(Generate(g, RandomVector(13, 1)), Error);
}

TEST(NetworkConfig, Validation) {
  auto g = TinyGenerator();
  g.channels.back() = 3;
  EXPECT_THROW(ValidateGeneratorConfig(g), Error);
  g = TinyGenerator();
  g.strides[1] = 3;
  EXPECT_THROW(ValidateGeneratorConfig(g), Error);
  g = TinyGenerator();
  g.strides.pop_back();
  EXPECT_THROW(ValidateGeneratorConfig(g), Error);
  EXPECT_NO_THROW(ValidateGeneratorConfig(TinyGenerator()));
  EXPECT_NO_THROW(ValidateDiscriminatorConfig(TinyDiscriminator()));
}

TEST(NetworkConfig, JsonRoundTrip) {
  const auto g = GeneratorConfigFromJson(GeneratorConfigToJson(TinyGenerator()));
  EXPECT_EQ(g.channels, TinyGenerator().channels);
  EXPECT_EQ(g.strides, TinyGenerator().strides);
  EXPECT_EQ(g.layout.body, 512);
  const auto d = DiscriminatorConfigFromJson(DiscriminatorConfigToJson(TinyDiscriminator()));
  EXPECT_EQ(d.channels, TinyDiscriminator().channels);
  EXPECT_EQ(d.layout.sd_block, 32);
}

TEST(LossMse, MatchesDefinition) {
  const auto a = SyntheticBir(codec::kDeskLayout, 1), b = SyntheticBir(codec::kDeskLayout, 2);
  EXPECT_EQ(LossMse(a, a), 0.0);
  auto c = a;
  for (auto& v : c.left) v += 1.0;
  for (auto& v : c.right) v += 1.0;
  EXPECT_NEAR(LossMse(c, a), 1.0, 1e-12);
  double ref = 0.0;
  for (int ear = 0; ear < 2; ++ear) {
    for (std::size_t i = 0; i < a.left.size(); ++i) ref += std::pow(a.channel(ear)[i] - b.channel(ear)[i], 2);
  }
  EXPECT_NEAR(LossMse(a, b), ref / (2.0 * 544.0), 1e-12);
}

TEST(LossBir, IdentityAndCommonModeAreZero) {
  const auto a = SyntheticBir(codec::kDeskLayout, 3);
  EXPECT_EQ(LossBir(a, a), 0.0);
  auto b = a;
  for (std::size_t i = 0; i < b.left.size(); ++i) {
    const double shift = std::sin(0.1 * static_cast<double>(i));
    b.left[i] += shift;
    b.right[i] += shift;
  }
  EXPECT_NEAR(LossBir(b, a), 0.0, 1e-24);
}

TEST(LossBir, UnitDifferenceGivesOne) {
  PreprocessedBir ref;
  ref.layout = codec::kDeskLayout;
  ref.left.assign(544, 0.0);
  ref.right.assign(544, 0.0);
  auto gen = ref;
  for (int i = 0; i < 512; ++i) {
    const double x = i % 3 == 0 ? 1.0 : -1.0;
    gen.left[static_cast<std::size_t>(i)] = 0.5 * x;
    gen.right[static_cast<std::size_t>(i)] = -0.5 * x;
  }
  // The SD block is outside the loss.
  for (int i = 512; i < 544; ++i) gen.left[static_cast<std::size_t>(i)] = 9.0;
  EXPECT_NEAR(LossBir(gen, ref), 1.0, 1e-12);
}

TEST(LossEd, CenterBinsAtCodecRate) {
  // 125 Hz spacing at 16 kHz with a 128-sample window.
  EXPECT_EQ(CenterBins(codec::StftConfig{}), (std::vector<int>{1, 4, 8, 16, 32}));
  EXPECT_EQ(EdLossConfig{}.bins, CenterBins(codec::StftConfig{}));
}

TEST(LossEd, AllBinsWhenEmpty) {
  const auto a = SyntheticBir(codec::kDeskLayout, 7);
  auto b = a;
  for (auto& v : b.left) v *= 3.0;
  EdLossConfig cfg;
  cfg.bins.clear();
  // Only the left channel moved: half of the uniform (2 log 3)^2 offset.
  const double expected = std::pow(2.0 * std::log(3.0), 2) / 2.0;
  EXPECT_NEAR(LossEd(b, a, cfg), expected, 1e-6 * expected);
}

TEST(LossEd, IdentityIsZero) {
  const auto a = SyntheticBir(codec::kDeskLayout, 4);
  EXPECT_NEAR(LossEd(a, a), 0.0, 1e-20);
}

TEST(LossEd, GainGivesSquaredLogOfPower) {
  const auto a = SyntheticBir(codec::kDeskLayout, 5);
  auto b = a;
  for (auto& v : b.left) v *= 2.0;
  for (auto& v : b.right) v *= 2.0;
  const double expected = std::pow(2.0 * std::log(2.0), 2);
  EXPECT_NEAR(LossEd(b, a), expected, 1e-6 * expected);
}

TEST(LossEd, MatchesReliefOracle) {
  const auto ref = SyntheticBir(codec::kDeskLayout, 6);
  auto gen = ref;
  // Truncating the tail empties the late frames, which the log ratio weights heavily.
  for (std::size_t i = 300; i < 512; ++i) {
    gen.left[i] = 0.0;
    gen.right[i] *= 0.5;
  }
  double oracle = 0.0;
  for (int ear = 0; ear < 2; ++ear) {
    const std::span<const double> g(gen.channel(ear).data(), 512), r(ref.channel(ear).data(), 512);
    const Eigen::MatrixXd eg = codec::EdRelief(g), er = codec::EdRelief(r);
    double sum = 0.0;
    for (int c : {1, 4, 8, 16, 32}) {
      sum += ((er.col(c).array() + kEdEpsilon).log() - (eg.col(c).array() + kEdEpsilon).log()).square().sum();
    }
    oracle += sum / (5.0 * static_cast<double>(eg.rows())) / 2.0;
  }
  EXPECT_NEAR(LossEd(gen, ref), oracle, 1e-9 * oracle);
  // Zeroed late frames sit at log(eps), far from the reference.
  EXPECT_GT(LossEd(gen, ref), 10.0);
}

TEST(GanTerms, FromProbabilities) {
  const auto half = GanTermsFromProbabilities(0.5, 0.5);
  EXPECT_NEAR(half.l_cgan, std::log(0.5), 1e-15);
  EXPECT_NEAR(half.l_d, 2.0 * std::log(0.5), 1e-15);
  const auto sure = GanTermsFromProbabilities(0.0, 1.0);
  EXPECT_NEAR(sure.l_cgan, std::log(kProbabilityClamp), 1e-9);
  EXPECT_NEAR(sure.l_d, 2.0 * std::log(kProbabilityClamp), 1e-9);
  EXPECT_TRUE(std::isfinite(sure.l_d));
}

TEST(GanTerms, TapeTerms) {
  Tape t;
  const Tape::Id z = t.Constant({0.7}, {1});
  const double d = Sigmoid(0.7);
  EXPECT_NEAR(t.scalar(op::FakeTerm(t, z, false)), std::log(1.0 - d), 1e-12);
  EXPECT_NEAR(t.scalar(op::FakeTerm(t, z, true)), -std::log(d), 1e-12);
  EXPECT_NEAR(t.scalar(op::RealTerm(t, z)), std::log(d), 1e-12);
  EXPECT_NEAR(Sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_EQ(Sigmoid(800.0), 1.0);
}

struct Batch {
  std::vector<std::vector<double>> conds;
  std::vector<PreprocessedBir> refs;
};

Batch RandomBatch(int n, std::uint64_t seed) {
  Batch b;
  for (int i = 0; i < n; ++i) {
    b.conds.push_back(Condition(seed * 100 + static_cast<std::uint64_t>(i)));
    b.refs.push_back(SyntheticBir(codec::kDeskLayout, seed * 100 + 50 + static_cast<std::uint64_t>(i)));
  }
  return b;
}

ObjectiveTerms Objective(Tape& t, const Batch& b, Generator& g, Discriminator* d, const ObjectiveWeights& w) {
  std::vector<Tape::Id> conds;
  std::vector<const PreprocessedBir*> refs;
  for (std::size_t i = 0; i < b.conds.size(); ++i) {
    conds.push_back(t.Constant(b.conds[i], {14}));
    refs.push_back(&b.refs[i]);
  }
  return GeneratorObjective(t, conds, refs, g, d, w);
}

TEST(GeneratorObjective, ZeroDiscriminatorGivesLogHalf) {
  auto g = InitGenerator(TinyGenerator(), 1);
  auto d = InitDiscriminator(TinyDiscriminator(), 2);
  for (auto& p : d.weights.params) std::fill(p.value.begin(), p.value.end(), 0.0);
  const auto b = RandomBatch(3, 1);
  Tape t;
  const auto terms = Objective(t, b, g, &d, {1.0, 0.0, 0.0, 0.0, false});
  EXPECT_NEAR(terms.l_cgan, std::log(0.5), 1e-15);
  EXPECT_NEAR(terms.total, std::log(0.5), 1e-15);
  EXPECT_NEAR(t.scalar(terms.root), terms.total, 1e-15);
}

TEST(GeneratorObjective, MatchesTermByTermOracle) {
  auto g = InitGenerator(TinyGenerator(), 3);
  auto d = InitDiscriminator(TinyDiscriminator(), 4);
  const auto b = RandomBatch(4, 2);
  const ObjectiveWeights w{1.0, 0.5, 2.0, 3.0, false};
  Tape t;
  const auto terms = Objective(t, b, g, &d, w);
  double cgan = 0, bir = 0, ed = 0, mse = 0;
  for (std::size_t i = 0; i < b.conds.size(); ++i) {
    const auto gen = Generate(g, b.conds[i]);
    const double p = ClampProbability(Sigmoid(DiscriminatorLogit(d, FlattenBir(gen), b.conds[i])));
    cgan += std::log(1.0 - p) / 4.0;
    bir += LossBir(gen, b.refs[i]) / 4.0;
    ed += LossEd(gen, b.refs[i]) / 4.0;
    mse += LossMse(gen, b.refs[i]) / 4.0;
  }
  EXPECT_NEAR(terms.l_cgan, cgan, 1e-12);
  EXPECT_NEAR(terms.l_bir, bir, 1e-12);
  EXPECT_NEAR(terms.l_ed, ed, 1e-9 * ed);
  EXPECT_NEAR(terms.l_mse, mse, 1e-12);
  const double total = cgan + 0.5 * bir + 2.0 * ed + 3.0 * mse;
  EXPECT_NEAR(terms.total, total, 1e-9 * std::abs(total));
  EXPECT_NEAR(t.scalar(terms.root), terms.total, 1e-12);
}

TEST(GeneratorObjective, NoDiscriminatorDropsGanTerm) {
  auto g = InitGenerator(TinyGenerator(), 5);
  const auto b = RandomBatch(2, 3);
  Tape t;
  const auto terms = Objective(t, b, g, nullptr, {1.0, 0.0, 0.0, 1.0, false});
  EXPECT_EQ(terms.l_cgan, 0.0);
  EXPECT_NEAR(terms.total, terms.l_mse, 1e-15);
}

TEST(GeneratorObjective, GradientStepDescends) {
  auto g = InitGenerator(TinyGenerator(), 6);
  const auto b = RandomBatch(2, 4);
  const ObjectiveWeights w{0.0, 1.0, 0.1, 1.0, false};
  double before = 0.0;
  {
    Tape t;
    const auto terms = Objective(t, b, g, nullptr, w);
    before = terms.total;
    g.weights.ZeroGrad();
    t.Backward(terms.root);
  }
  double norm2 = 0.0;
  for (const auto& p : g.weights.params) {
    for (double v : p.grad) norm2 += v * v;
  }
  ASSERT_GT(norm2, 0.0);
  const double step = 1e-3 / std::sqrt(norm2);
  for (auto& p : g.weights.params) {
    for (std::size_t i = 0; i < p.size(); ++i) p.value[i] -= step * p.grad[i];
  }
  Tape t;
  EXPECT_LT(Objective(t, b, g, nullptr, w).total, before);
}

TEST(Optimizer, LearningRateSchedule) {
  const TrainConfig cfg;
  EXPECT_DOUBLE_EQ(LearningRate(cfg, 0), 8e-5);
  EXPECT_DOUBLE_EQ(LearningRate(cfg, 6), 8e-5);
  EXPECT_NEAR(LearningRate(cfg, 7), 5.6e-5, 1e-18);
  EXPECT_NEAR(LearningRate(cfg, 14), 3.92e-5, 1e-18);
}

TEST(Optimizer, RmsPropFirstStep) {
  ParamSet set;
  set.params.emplace_back("w", std::vector<int>{3});
  set.params[0].value = {1.0, 1.0, 1.0};
  set.params[0].grad = {2.0, -0.5, 0.0};
  RmsProp opt(0.99, 1e-8);
  opt.Step(set, 0.01);
  // v = (1 - rho) g^2, so the first update is lr g / (|g| sqrt(1 - rho) + eps).
  const auto& v = set.params[0].value;
  EXPECT_NEAR(v[0], 1.0 - 0.01 * 2.0 / (2.0 * 0.1 + 1e-8), 1e-12);
  EXPECT_NEAR(v[1], 1.0 + 0.01 * 0.5 / (0.5 * 0.1 + 1e-8), 1e-12);
  EXPECT_EQ(v[2], 1.0);
}

TEST(TrainConfig, JsonAndValidation) {
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.batch = 7;
  cfg.non_saturating = true;
  const auto back = TrainConfigFromJson(TrainConfigToJson(cfg));
  EXPECT_EQ(back.lr, 1e-3);
  EXPECT_EQ(back.batch, 7);
  EXPECT_TRUE(back.non_saturating);
  EXPECT_EQ(TrainConfigFromJson(nlohmann::json::object()).epochs, 100);
  EXPECT_NO_THROW(ValidateTrainConfig(cfg));
  for (const auto& mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& c) { c.lr = 0.0; }, [](TrainConfig& c) { c.batch = 0; },
           [](TrainConfig& c) { c.rms_rho = 1.0; }, [](TrainConfig& c) { c.lambda_ed = -1.0; }}) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(ValidateTrainConfig(bad), Error);
  }
}

TrainSet LatentTrainSet(int n) {
  TrainSet data;
  for (int i = 0; i < n; ++i) {
    TrainRecord r;
    r.latent = RandomVector(8, 300 + static_cast<std::uint64_t>(i));
    r.source = {1.0 + i, 2.0, 1.5};
    r.listener = {3.0, 1.0 + 0.5 * i, 1.5};
    r.bir = SyntheticBir(codec::kDeskLayout, 400 + static_cast<std::uint64_t>(i));
    data.records.push_back(std::move(r));
  }
  return data;
}

TrainState TinyState(std::uint64_t seed) {
  return {InitGenerator(TinyGenerator(), seed), InitDiscriminator(TinyDiscriminator(), seed + 1), std::nullopt};
}

TrainConfig QuickConfig() {
  TrainConfig cfg;
  cfg.batch = 2;
  cfg.epochs = 2;
  cfg.lr = 1e-3;
  cfg.seed = 11;
  return cfg;
}

TEST(Train, StepCountAndDeterminism) {
  const auto data = LatentTrainSet(3);
  int callbacks = 0;
  const auto a = Train(data, TinyState(1), QuickConfig(), [&](const HistoryRow&) { ++callbacks; });
  const auto b = Train(data, TinyState(1), QuickConfig());
  ASSERT_EQ(a.history.size(), 4u);
  EXPECT_EQ(callbacks, 4);
  EXPECT_EQ(a.history.back().step, 3);
  EXPECT_EQ(a.history.back().epoch, 1);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].l_mse, b.history[i].l_mse);
    EXPECT_EQ(a.history[i].l_d, b.history[i].l_d);
  }
  const auto& wa = a.state.generator.weights.params, &wb = b.state.generator.weights.params;
  for (std::size_t i = 0; i < wa.size(); ++i) EXPECT_EQ(wa[i].value, wb[i].value);
  // Training moved the weights.
  EXPECT_NE(wa[0].value, TinyState(1).generator.weights.params[0].value);
}

TEST(Train, NonFiniteWeightAborts) {
  auto init = TinyState(2);
  init.generator.weights.at("generator.fc.weight").value[0] = std::nan("");
  try {
    Train(LatentTrainSet(2), init, QuickConfig());
    FAIL() << "expected a numerical error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumerical);
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
}

TEST(Train, RejectsLayoutMismatch) {
  auto data = LatentTrainSet(2);
  data.records[0].bir = SyntheticBir(codec::kFullLayout, 1);
  EXPECT_THROW(Train(data, TinyState(3), QuickConfig()), Error);
}

TEST(HistoryCsv, HeaderAndRows) {
  HistoryRow r;
  r.step = 4;
  r.lr = 0.5;
  const auto csv = HistoryCsv({r});
  EXPECT_EQ(csv.rfind("step,L_CGAN,L_BIR,L_ED,L_MSE,L_D,lr\n", 0), 0u);
  EXPECT_NE(csv.find("\n4,"), std::string::npos);
}

TEST(GradCheck, MseOnly) {
  auto g = InitGenerator(TinyGenerator(), 21);
  const auto b = RandomBatch(2, 5);
  GradCheckOptions opt;
  opt.weights = {0.0, 0.0, 0.0, 1.0, false};
  const auto rep = GradCheck(g, nullptr, b.conds, b.refs, opt);
  EXPECT_EQ(rep.checked + rep.excluded, 128);
  EXPECT_LT(rep.max_relative_error, 1e-5);
}

TEST(GradCheck, BirOnly) {
  auto g = InitGenerator(TinyGenerator(), 22);
  const auto b = RandomBatch(2, 6);
  GradCheckOptions opt;
  opt.weights = {0.0, 1.0, 0.0, 0.0, false};
  EXPECT_LT(GradCheck(g, nullptr, b.conds, b.refs, opt).max_relative_error, 1e-5);
}

TEST(GradCheck, EdOnly) {
  auto g = InitGenerator(TinyGenerator(), 23);
  const auto b = RandomBatch(2, 7);
  GradCheckOptions opt;
  opt.weights = {0.0, 0.0, 1.0, 0.0, false};
  EXPECT_LT(GradCheck(g, nullptr, b.conds, b.refs, opt).max_relative_error, 1e-3);
}

TEST(GradCheck, FullObjectiveWithFrozenDiscriminator) {
  auto g = InitGenerator(TinyGenerator(), 24);
  auto d = InitDiscriminator(TinyDiscriminator(), 25);
  const auto before = d.weights.params[0].value;
  const auto b = RandomBatch(2, 8);
  GradCheckOptions opt;
  opt.weights = {1.0, 1.0, 1.0, 1.0, false};
  EXPECT_LT(GradCheck(g, &d, b.conds, b.refs, opt).max_relative_error, 1e-3);
  opt.weights.non_saturating = true;
  EXPECT_LT(GradCheck(g, &d, b.conds, b.refs, opt).max_relative_error, 1e-3);
  EXPECT_EQ(d.weights.params[0].value, before);
}

TEST(GradCheck, DeadUnitsAreExcluded) {
  auto g = InitGenerator(TinyGenerator(), 26);
  auto& bias = g.weights.at("generator.fc.bias").value;
  std::fill(bias.begin(), bias.end(), -1e3);
  const auto b = RandomBatch(2, 9);
  GradCheckOptions opt;
  opt.weights = {0.0, 0.0, 0.0, 1.0, false};
  const auto rep = GradCheck(g, nullptr, b.conds, b.refs, opt);
  EXPECT_GT(rep.excluded, 0);
  EXPECT_LT(rep.max_relative_error, 1e-5);
}

scene_graph::SceneGraph SmallGraph(std::uint64_t seed) {
  Rng rng(seed);
  scene_graph::SceneGraph g;
  const int n = 9;
  g.features.resize(n, scene_graph::kNodeFeatureDim);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < scene_graph::kNodeFeatureDim; ++c) g.features(i, c) = 2.0 * Uniform01(rng) - 0.5;
  }
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
  g.edges.push_back({0, n - 1});
  g.edges.push_back({2, 6});
  return g;
}

scene_graph::EncoderConfig SmallEncoder() {
  scene_graph::EncoderConfig cfg;
  cfg.layer_widths = {4, 4, 4};
  cfg.readout_hidden = 6;
  cfg.latent_dim = 8;
  return cfg;
}

TEST(EncoderTape, ValueMatchesEncodeScene) {
  const auto graph = SmallGraph(1);
  const auto params = scene_graph::InitEncoderParams(SmallEncoder(), 2);
  auto enc = ToEncoderWeights(params);
  Tape t;
  const Tape::Id z = EncodeSceneForward(t, graph, enc);
  const auto ref = scene_graph::EncodeScene(graph, params);
  ASSERT_EQ(t.value(z).size(), static_cast<std::size_t>(ref.size()));
  for (Eigen::Index i = 0; i < ref.size(); ++i) EXPECT_NEAR(t.value(z)[static_cast<std::size_t>(i)], ref(i), 1e-12);
  const auto back = FromEncoderWeights(enc);
  EXPECT_TRUE(back.readout_w1.isApprox(params.readout_w1));
  EXPECT_TRUE(back.pool_scores[1].isApprox(params.pool_scores[1]));
}

TEST(EncoderTape, GradientsMatchFiniteDifferences) {
  const auto graph = SmallGraph(3);
  auto enc = ToEncoderWeights(scene_graph::InitEncoderParams(SmallEncoder(), 4));
  // Nonzero readout biases keep the hidden units off the ReLU kink.
  for (auto& p : enc.weights.params) {
    if (p.name.find("readout0.bias") != std::string::npos) std::fill(p.value.begin(), p.value.end(), 0.05);
  }
  const auto c = RandomVector(8, 5);
  std::vector<Param*> params;
  for (auto& p : enc.weights.params) params.push_back(&p);
  const auto build = [&](Tape& t) {
    const Tape::Id z = EncodeSceneForward(t, graph, enc);
    const Tape::Id w = t.Constant(c, {1, 8});
    return op::Affine(t, op::Reshape(t, z, {8}), w, t.Constant({0.0}, {1}));
  };
  const auto rep = CompareWithFiniteDifferences(build, params);
  EXPECT_LT(rep.worst, 1e-5) << rep.where;
}

TEST(Train, JointEncoderUpdatesEncoder) {
  TrainSet data;
  data.graphs.push_back(SmallGraph(7));
  for (int i = 0; i < 2; ++i) {
    TrainRecord r;
    r.scene = 0;
    r.source = {1.0, 1.0 + i, 1.0};
    r.listener = {2.0, 1.0, 1.0};
    r.bir = SyntheticBir(codec::kDeskLayout, 500 + static_cast<std::uint64_t>(i));
    data.records.push_back(std::move(r));
  }
  auto init = TinyState(4);
  init.encoder = ToEncoderWeights(scene_graph::InitEncoderParams(SmallEncoder(), 8));
  const auto before = init.encoder->weights.params;
  auto cfg = QuickConfig();
  const auto result = Train(data, init, cfg);
  ASSERT_TRUE(result.state.encoder.has_value());
  bool moved = false;
  for (std::size_t i = 0; i < before.size(); ++i) moved = moved || result.state.encoder->weights.params[i].value != before[i].value;
  EXPECT_TRUE(moved);

  // Frozen: stored latents are then required.
  cfg.joint_encoder = false;
  EXPECT_THROW(Train(data, init, cfg), Error);
}

TEST(Checkpoint, RoundTrip) {
  TempDir dir;
  auto state = TinyState(9);
  state.encoder = ToEncoderWeights(scene_graph::InitEncoderParams(SmallEncoder(), 10));
  TrainConfig cfg;
  cfg.lr = 2e-4;
  SaveCheckpoint(dir.file("ck"), state, cfg);
  const auto back = LoadCheckpoint(dir.file("ck"));
  EXPECT_EQ(back.train.lr, 2e-4);
  EXPECT_EQ(back.state.generator.config.channels, TinyGenerator().channels);
  const auto cond = Condition(3);
  EXPECT_EQ(FlattenBir(Generate(back.state.generator, cond)), FlattenBir(Generate(state.generator, cond)));
  const auto flat = FlattenBir(SyntheticBir(codec::kDeskLayout, 2));
  EXPECT_EQ(DiscriminatorLogit(back.state.discriminator, flat, cond), DiscriminatorLogit(state.discriminator, flat, cond));
  ASSERT_TRUE(back.state.encoder.has_value());
  EXPECT_EQ(back.state.encoder->weights.count(), state.encoder->weights.count());
  EXPECT_THROW(LoadCheckpoint(dir.file("missing")), Error);
}

}  // namespace
}  // namespace binscene::cgan

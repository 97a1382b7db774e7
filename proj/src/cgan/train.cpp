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

#include "binscene/cgan/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "binscene/core/error.hpp"
#include "binscene/core/rng.hpp"

namespace binscene::cgan {

void ValidateTrainConfig(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) ThrowInvalidInput("train: lr must be positive");
  if (!(cfg.lambda_bir >= 0.0 && cfg.lambda_ed >= 0.0 && cfg.lambda_mse >= 0.0)) {
    ThrowInvalidInput("train: loss weights must be non-negative");
  }
  if (!(cfg.lr_decay > 0.0) || cfg.decay_every <= 0) ThrowInvalidInput("train: bad learning-rate schedule");
  if (cfg.batch <= 0 || cfg.epochs < 0) ThrowInvalidInput("train: batch must be positive, epochs non-negative");
  if (!(cfg.rms_rho >= 0.0 && cfg.rms_rho < 1.0) || !(cfg.rms_eps > 0.0)) {
    ThrowInvalidInput("train: bad RMSprop constants");
  }
}

nlohmann::json TrainConfigToJson(const TrainConfig& cfg) {
  return {{"lambda_bir", cfg.lambda_bir},
          {"lambda_ed", cfg.lambda_ed},
          {"lambda_mse", cfg.lambda_mse},
          {"lr", cfg.lr},
          {"lr_decay", cfg.lr_decay},
          {"decay_every", cfg.decay_every},
          {"batch", cfg.batch},
          {"epochs", cfg.epochs},
          {"rms_rho", cfg.rms_rho},
          {"rms_eps", cfg.rms_eps},
          {"seed", cfg.seed},
          {"non_saturating", cfg.non_saturating},
          {"joint_encoder", cfg.joint_encoder},
          {"max_joint_nodes", cfg.max_joint_nodes}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.lambda_bir = j.value("lambda_bir", c.lambda_bir);
  c.lambda_ed = j.value("lambda_ed", c.lambda_ed);
  c.lambda_mse = j.value("lambda_mse", c.lambda_mse);
  c.lr = j.value("lr", c.lr);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.decay_every = j.value("decay_every", c.decay_every);
  c.batch = j.value("batch", c.batch);
  c.epochs = j.value("epochs", c.epochs);
  c.rms_rho = j.value("rms_rho", c.rms_rho);
  c.rms_eps = j.value("rms_eps", c.rms_eps);
  c.seed = j.value("seed", c.seed);
  c.non_saturating = j.value("non_saturating", c.non_saturating);
  c.joint_encoder = j.value("joint_encoder", c.joint_encoder);
  c.max_joint_nodes = j.value("max_joint_nodes", c.max_joint_nodes);
  ValidateTrainConfig(c);
  return c;
}

double LearningRate(const TrainConfig& cfg, int epoch) {
  return cfg.lr * std::pow(cfg.lr_decay, epoch / cfg.decay_every);
}

void RmsProp::Step(ParamSet& set, double lr) {
  if (mean_square_.size() != set.params.size()) {
    mean_square_.clear();
    for (const auto& p : set.params) mean_square_.emplace_back(p.size(), 0.0);
  }
  for (std::size_t k = 0; k < set.params.size(); ++k) {
    auto& p = set.params[k];
    auto& v = mean_square_[k];
    if (p.grad.size() != p.size()) continue;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      v[i] = rho_ * v[i] + (1.0 - rho_) * g * g;
      p.value[i] -= lr * g / (std::sqrt(v[i]) + eps_);
    }
  }
}

ObjectiveTerms GeneratorObjective(Tape& t, const std::vector<Tape::Id>& conds,
                                  const std::vector<const codec::PreprocessedBir*>& refs, Generator& g,
                                  Discriminator* d, const ObjectiveWeights& w) {
  if (conds.empty() || conds.size() != refs.size()) ThrowInvalidInput("objective: empty or mismatched batch");
  const int body = g.config.layout.body;
  const double inv = 1.0 / static_cast<double>(conds.size());
  ObjectiveTerms terms;
  std::vector<Tape::Id> nodes;
  std::vector<double> weights;
  auto add = [&](Tape::Id id, double weight, double& sum) {
    sum += t.scalar(id) * inv;
    nodes.push_back(id);
    weights.push_back(weight * inv);
  };
  for (std::size_t i = 0; i < conds.size(); ++i) {
    if (refs[i]->layout.total() != g.config.layout.total()) ThrowInvalidInput("objective: reference layout mismatch");
    const Tape::Id gen = GeneratorForward(t, conds[i], g);
    std::vector<double> ref = FlattenBir(*refs[i]);
    if (d) add(op::FakeTerm(t, DiscriminatorForward(t, gen, conds[i], *d), w.non_saturating), w.gan, terms.l_cgan);
    add(op::BirLoss(t, gen, ref, body), w.bir, terms.l_bir);
    add(op::EdLoss(t, gen, ref, body, {}), w.ed, terms.l_ed);
    add(op::MseLoss(t, gen, std::move(ref)), w.mse, terms.l_mse);
  }
  terms.root = op::WeightedSum(t, nodes, weights);
  terms.total = t.scalar(terms.root);
  return terms;
}

namespace {

void CheckFinite(double v, const char* term, int step) {
  if (!std::isfinite(v)) ThrowNumerical(fmt::format("non-finite {} at step {}", term, step));
}

void CheckParams(const ParamSet& set, const char* what, int step) {
  for (const auto& p : set.params) {
    for (double v : p.value) {
      if (!std::isfinite(v)) ThrowNumerical(fmt::format("non-finite {} weight {} after step {}", what, p.name, step));
    }
  }
}

std::vector<double> PositionsOf(const TrainRecord& r) {
  return {r.source[0], r.source[1], r.source[2], r.listener[0], r.listener[1], r.listener[2]};
}

}  // namespace

TrainResult Train(const TrainSet& data, TrainState init, const TrainConfig& cfg,
                  const std::function<void(const HistoryRow&)>& on_step) {
  ValidateTrainConfig(cfg);
  if (data.records.empty()) ThrowInvalidInput("train: empty dataset");
  TrainResult result{std::move(init), {}};
  auto& st = result.state;
  const auto& layout = st.generator.config.layout;
  if (st.discriminator.config.layout.total() != layout.total()) {
    ThrowInvalidInput("train: generator and discriminator layouts differ");
  }
  const int latent_dim = st.generator.config.cond_dim - 2 * kPositionDims;
  for (const auto& r : data.records) {
    if (r.bir.layout.body != layout.body || r.bir.layout.sd_block != layout.sd_block) {
      ThrowInvalidInput("train: record layout does not match the generator");
    }
    codec::ValidatePreprocessed(r.bir);
    if (r.scene >= static_cast<int>(data.graphs.size())) ThrowInvalidInput("train: record scene index out of range");
    if (r.scene < 0 && r.latent.size() != static_cast<std::size_t>(latent_dim)) {
      ThrowInvalidInput("train: record latent has the wrong length");
    }
  }
  // Scenes whose latent is recomputed (and trained) through the encoder.
  std::vector<bool> joint(data.graphs.size(), false);
  if (st.encoder && cfg.joint_encoder) {
    if (st.encoder->config.latent_dim != latent_dim) ThrowInvalidInput("train: encoder latent size mismatch");
    for (std::size_t s = 0; s < data.graphs.size(); ++s) {
      joint[s] = data.graphs[s].node_count() <= static_cast<std::size_t>(cfg.max_joint_nodes);
    }
  }
  for (const auto& r : data.records) {
    if (r.scene >= 0 && !joint[static_cast<std::size_t>(r.scene)] &&
        r.latent.size() != static_cast<std::size_t>(latent_dim)) {
      ThrowInvalidInput("train: record needs a stored latent when its scene is not jointly encoded");
    }
  }

  RmsProp g_opt(cfg.rms_rho, cfg.rms_eps);
  RmsProp e_opt(cfg.rms_rho, cfg.rms_eps);
  RmsProp d_opt(cfg.rms_rho, cfg.rms_eps);
  const ObjectiveWeights weights{1.0, cfg.lambda_bir, cfg.lambda_ed, cfg.lambda_mse, cfg.non_saturating};
  const std::size_t n = data.records.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), n);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  std::vector<std::size_t> order(n);
  int step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(MixSeed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = LearningRate(cfg, epoch);
    for (std::size_t b = 0; b < steps_per_epoch; ++b, ++step) {
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(n, begin + batch);
      std::vector<const TrainRecord*> recs;
      for (std::size_t i = begin; i < end; ++i) recs.push_back(&data.records[order[i]]);
      const double inv = 1.0 / static_cast<double>(recs.size());

      // Conditions from the current encoder, as plain values.
      std::map<int, std::vector<double>> latents;
      if (st.encoder) {
        const auto params = FromEncoderWeights(*st.encoder);
        for (const auto* r : recs) {
          if (r->scene >= 0 && joint[static_cast<std::size_t>(r->scene)] && !latents.count(r->scene)) {
            const auto z = scene_graph::EncodeScene(data.graphs[static_cast<std::size_t>(r->scene)], params);
            latents[r->scene] = std::vector<double>(z.data(), z.data() + z.size());
          }
        }
      }
      auto condition_of = [&](const TrainRecord& r) {
        std::vector<double> c = latents.count(r.scene) ? latents.at(r.scene) : r.latent;
        const auto pos = PositionsOf(r);
        c.insert(c.end(), pos.begin(), pos.end());
        return c;
      };

      HistoryRow row;
      row.step = step;
      row.epoch = epoch;
      row.lr = lr;

      // D-step: ascend L_D = log D(real) + log(1 - D(G(y))).
      {
        Tape t;
        std::vector<Tape::Id> terms;
        for (const auto* r : recs) {
          const auto cond = condition_of(*r);
          const Tape::Id c = t.Constant(cond, {static_cast<int>(cond.size())});
          const Tape::Id real = t.Constant(FlattenBir(r->bir), {2, layout.total()});
          // Not validated: a non-finite fake must surface as a non-finite L_D.
          auto gen = Generate(st.generator, cond);
          gen.left.insert(gen.left.end(), gen.right.begin(), gen.right.end());
          const Tape::Id fake = t.Constant(std::move(gen.left), {2, layout.total()});
          terms.push_back(op::RealTerm(t, DiscriminatorForward(t, real, c, st.discriminator)));
          terms.push_back(op::FakeTerm(t, DiscriminatorForward(t, fake, c, st.discriminator), false));
        }
        const Tape::Id root = op::WeightedSum(t, terms, std::vector<double>(terms.size(), -inv));
        row.l_d = -t.scalar(root);
        CheckFinite(row.l_d, "L_D", step);
        st.discriminator.weights.ZeroGrad();
        t.Backward(root);
        d_opt.Step(st.discriminator.weights, lr);
        CheckParams(st.discriminator.weights, "discriminator", step);
      }

      // G-step: descend L_G, through the encoder for jointly trained scenes.
      {
        Tape t;
        std::map<int, Tape::Id> scene_latents;
        std::vector<Tape::Id> conds;
        std::vector<const codec::PreprocessedBir*> refs;
        for (const auto* r : recs) {
          Tape::Id c;
          if (latents.count(r->scene)) {
            if (!scene_latents.count(r->scene)) {
              scene_latents[r->scene] =
                  EncodeSceneForward(t, data.graphs[static_cast<std::size_t>(r->scene)], *st.encoder);
            }
            const auto pos = PositionsOf(*r);
            c = op::Concat(t, {scene_latents.at(r->scene), t.Constant(pos, {static_cast<int>(pos.size())})});
          } else {
            const auto cond = condition_of(*r);
            c = t.Constant(cond, {static_cast<int>(cond.size())});
          }
          conds.push_back(c);
          refs.push_back(&r->bir);
        }
        const ObjectiveTerms terms = GeneratorObjective(t, conds, refs, st.generator, &st.discriminator, weights);
        row.l_cgan = terms.l_cgan;
        row.l_bir = terms.l_bir;
        row.l_ed = terms.l_ed;
        row.l_mse = terms.l_mse;
        CheckFinite(row.l_cgan, "L_CGAN", step);
        CheckFinite(row.l_bir, "L_BIR", step);
        CheckFinite(row.l_ed, "L_ED", step);
        CheckFinite(row.l_mse, "L_MSE", step);
        st.generator.weights.ZeroGrad();
        if (st.encoder) st.encoder->weights.ZeroGrad();
        t.Backward(terms.root);
        g_opt.Step(st.generator.weights, lr);
        CheckParams(st.generator.weights, "generator", step);
        if (!scene_latents.empty()) {
          e_opt.Step(st.encoder->weights, lr);
          CheckParams(st.encoder->weights, "encoder", step);
        }
        // The discriminator saw this tape too; its gradients are not applied.
        st.discriminator.weights.ZeroGrad();
      }

      result.history.push_back(row);
      if (on_step) on_step(row);
    }
  }
  return result;
}

std::string HistoryCsv(const std::vector<HistoryRow>& history) {
  std::string out = "step,L_CGAN,L_BIR,L_ED,L_MSE,L_D,lr\n";
  for (const auto& r : history) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.step, r.l_cgan, r.l_bir, r.l_ed,
                       r.l_mse, r.l_d, r.lr);
  }
  return out;
}

}  // namespace binscene::cgan

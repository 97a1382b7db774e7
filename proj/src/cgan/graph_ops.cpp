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

#include "binscene/cgan/graph_ops.hpp"

#include <cmath>

#include "binscene/core/error.hpp"

namespace binscene::cgan {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EncoderWeights ToEncoderWeights(const scene_graph::GraphEncoderParams& params) {
  scene_graph::ValidateEncoderParams(params);
  EncoderWeights enc{params.config, {}};
  for (auto& t : scene_graph::EncoderTensors(params)) {
    std::vector<int> shape;
    for (auto d : t.shape) shape.push_back(static_cast<int>(d));
    Param p(t.name, shape);
    p.value = std::move(t.values);
    enc.weights.params.push_back(std::move(p));
  }
  return enc;
}

scene_graph::GraphEncoderParams FromEncoderWeights(const EncoderWeights& weights) {
  return scene_graph::EncoderFromTensors(weights.config, ToTensors(weights.weights));
}

namespace op {

namespace {

Eigen::Map<const RowMatrix> AsMatrix(const Tape& t, Id id) {
  const auto& s = t.shape(id);
  if (s.size() != 2) ThrowInvalidInput("graph op expects a matrix");
  return {t.value(id).data(), s[0], s[1]};
}

// A_norm m with A_norm = D^-1/2 (A + I) D^-1/2, symmetric.
RowMatrix Propagate(const RowMatrix& m, const scene_graph::EdgeList& edges) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd deg = Eigen::VectorXd::Ones(n);
  for (const auto& e : edges) {
    deg[e[0]] += 1.0;
    deg[e[1]] += 1.0;
  }
  const Eigen::VectorXd inv_sqrt = deg.cwiseSqrt().cwiseInverse();
  RowMatrix out(n, m.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = m.row(i) * (inv_sqrt[i] * inv_sqrt[i]);
  for (const auto& e : edges) {
    const double w = inv_sqrt[e[0]] * inv_sqrt[e[1]];
    out.row(e[0]) += w * m.row(e[1]);
    out.row(e[1]) += w * m.row(e[0]);
  }
  return out;
}

std::vector<double> Flat(const RowMatrix& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace

Id Gcn(Tape& t, Id x, const scene_graph::EdgeList& edges, Id w) {
  const Eigen::MatrixXd xv = AsMatrix(t, x);
  const Eigen::MatrixXd wv = AsMatrix(t, w);
  const RowMatrix y = scene_graph::GcnLayer(xv, edges, wv);
  const int n = static_cast<int>(y.rows()), dout = static_cast<int>(y.cols());
  return t.Push(Flat(y), {n, dout}, [x, w, edges](Tape& tp, Id self) {
    const auto yv = AsMatrix(tp, self);
    RowMatrix g = Eigen::Map<const RowMatrix>(tp.grad(self).data(), yv.rows(), yv.cols());
    g = g.cwiseProduct((yv.array() > 0.0).cast<double>().matrix());
    const RowMatrix xm = AsMatrix(tp, x);
    const RowMatrix wm = AsMatrix(tp, w);
    const RowMatrix gw = Propagate(xm, edges).transpose() * g;
    const RowMatrix gx = Propagate(g * wm.transpose(), edges);
    auto& gwb = tp.grad(w);
    auto& gxb = tp.grad(x);
    for (Eigen::Index i = 0; i < gw.size(); ++i) gwb[static_cast<std::size_t>(i)] += gw.data()[i];
    for (Eigen::Index i = 0; i < gx.size(); ++i) gxb[static_cast<std::size_t>(i)] += gx.data()[i];
  });
}

Id TopNPool(Tape& t, Id x, const scene_graph::EdgeList& edges, Id p, double keep,
            scene_graph::EdgeList* edges_out) {
  const Eigen::MatrixXd xv = AsMatrix(t, x);
  const Eigen::Map<const Eigen::VectorXd> pv(t.value(p).data(), static_cast<Eigen::Index>(t.value(p).size()));
  scene_graph::PoolResult pooled = scene_graph::TopNPool(xv, edges, pv, keep);
  if (edges_out) *edges_out = pooled.edges;
  const RowMatrix y = pooled.features;
  const int k = static_cast<int>(y.rows()), d = static_cast<int>(y.cols());
  std::vector<double> scores;
  for (auto i : pooled.kept) scores.push_back(pooled.scores[i]);
  return t.Push(Flat(y), {k, d},
                [x, p, kept = std::move(pooled.kept), scores = std::move(scores)](Tape& tp, Id self) {
    const auto& g = tp.grad(self);
    const auto& xv = tp.value(x);
    const auto& pv = tp.value(p);
    const std::size_t d = pv.size();
    double norm2 = 0.0;
    for (double v : pv) norm2 += v * v;
    const double norm = std::sqrt(norm2);
    auto& gx = tp.grad(x);
    auto& gp = tp.grad(p);
    for (std::size_t r = 0; r < kept.size(); ++r) {
      const double* xi = xv.data() + static_cast<std::size_t>(kept[r]) * d;
      const double* gr = g.data() + r * d;
      double* gxi = gx.data() + static_cast<std::size_t>(kept[r]) * d;
      const double gate = std::tanh(scores[r]);
      // y_r = x_i tanh(s_i), s_i = x_i . p / |p|
      double gs = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        gxi[j] += gr[j] * gate;
        gs += gr[j] * xi[j];
      }
      gs *= 1.0 - gate * gate;
      const double s = scores[r];
      for (std::size_t j = 0; j < d; ++j) {
        gxi[j] += gs * pv[j] / norm;
        gp[j] += gs * (xi[j] / norm - s * pv[j] / norm2);
      }
    }
  });
}

Id ColumnMean(Tape& t, Id x) {
  const auto xv = AsMatrix(t, x);
  const int n = static_cast<int>(xv.rows()), d = static_cast<int>(xv.cols());
  const Eigen::VectorXd mean = xv.colwise().mean().transpose();
  return t.Push({mean.data(), mean.data() + d}, {d}, [x, n, d](Tape& tp, Id self) {
    const auto& g = tp.grad(self);
    auto& gx = tp.grad(x);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) gx[static_cast<std::size_t>(i * d + j)] += g[static_cast<std::size_t>(j)] / n;
    }
  });
}

Id ColumnMax(Tape& t, Id x) {
  const auto xv = AsMatrix(t, x);
  const int d = static_cast<int>(xv.cols());
  std::vector<double> out(static_cast<std::size_t>(d));
  std::vector<int> arg(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    Eigen::Index at = 0;
    out[static_cast<std::size_t>(j)] = xv.col(j).maxCoeff(&at);
    arg[static_cast<std::size_t>(j)] = static_cast<int>(at);
  }
  return t.Push(std::move(out), {d}, [x, d, arg = std::move(arg)](Tape& tp, Id self) {
    const auto& g = tp.grad(self);
    auto& gx = tp.grad(x);
    for (int j = 0; j < d; ++j) {
      gx[static_cast<std::size_t>(arg[static_cast<std::size_t>(j)] * d + j)] += g[static_cast<std::size_t>(j)];
    }
  });
}

}  // namespace op

Tape::Id EncodeSceneForward(Tape& t, const scene_graph::SceneGraph& graph, EncoderWeights& enc) {
  scene_graph::ValidateGraph(graph);
  if (graph.node_count() < 3) ThrowInvalidInput("graph too small for the scene encoder");
  const RowMatrix features = graph.features;
  Tape::Id x = t.Constant(op::Flat(features), {static_cast<int>(features.rows()), static_cast<int>(features.cols())});
  scene_graph::EdgeList edges = graph.edges;
  std::vector<Tape::Id> means, maxes;
  auto& w = enc.weights;
  for (std::size_t l = 0; l < enc.config.layer_widths.size(); ++l) {
    const std::string s = std::to_string(l);
    const Tape::Id h = op::Gcn(t, x, edges, t.Use(w.at("encoder.gcn" + s + ".weight")));
    scene_graph::EdgeList next;
    x = op::TopNPool(t, h, edges, t.Use(w.at("encoder.pool" + s + ".score")), enc.config.keep_ratio, &next);
    edges = std::move(next);
    means.push_back(op::ColumnMean(t, x));
    maxes.push_back(op::ColumnMax(t, x));
  }
  means.insert(means.end(), maxes.begin(), maxes.end());
  Tape::Id r = op::Concat(t, means);
  r = op::Affine(t, r, t.Use(w.at("encoder.readout0.weight")), t.Use(w.at("encoder.readout0.bias")));
  r = op::Relu(t, r);
  return op::Affine(t, r, t.Use(w.at("encoder.readout1.weight")), t.Use(w.at("encoder.readout1.bias")));
}

}  // namespace binscene::cgan

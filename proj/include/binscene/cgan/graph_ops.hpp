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

#include "binscene/cgan/autodiff.hpp"
#include "binscene/cgan/networks.hpp"
#include "binscene/scene_graph/encoder.hpp"
#include "binscene/scene_graph/graph.hpp"

namespace binscene::cgan {

// Scene encoder weights as trainable tensors; names match the encoder archive.
struct EncoderWeights {
  scene_graph::EncoderConfig config;
  ParamSet weights;
};

EncoderWeights ToEncoderWeights(const scene_graph::GraphEncoderParams& params);
scene_graph::GraphEncoderParams FromEncoderWeights(const EncoderWeights& weights);

// Same computation as scene_graph::EncodeScene, recorded on the tape.
Tape::Id EncodeSceneForward(Tape& t, const scene_graph::SceneGraph& graph, EncoderWeights& enc);

namespace op {

// x [N, din], w [din, dout] -> relu(A_norm x w) [N, dout]
Id Gcn(Tape& t, Id x, const scene_graph::EdgeList& edges, Id w);
// x [N, d], p [d] -> [K, d]; pooled edges are written to `edges_out`.
Id TopNPool(Tape& t, Id x, const scene_graph::EdgeList& edges, Id p, double keep,
            scene_graph::EdgeList* edges_out);
Id ColumnMean(Tape& t, Id x);
Id ColumnMax(Tape& t, Id x);

}  // namespace op

}  // namespace binscene::cgan

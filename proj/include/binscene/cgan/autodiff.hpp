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

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace binscene::cgan {

// Trainable tensor with its accumulated gradient. Matrices and sequences are
// row-major: a [C, L] tensor stores element (c, l) at c * L + l.
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::string n, std::vector<int> s);
  std::size_t size() const { return value.size(); }
  void ZeroGrad() { grad.assign(value.size(), 0.0); }
};

std::size_t ShapeSize(const std::vector<int>& shape);

// Append-only computation record. Nodes are created in topological order, so
// Backward walks them in reverse.
class Tape {
 public:
  using Id = int;
  using BackwardFn = std::function<void(Tape&, Id self)>;

  Id Constant(std::vector<double> value, std::vector<int> shape);
  // Leaf bound to a parameter; repeated calls reuse one node.
  Id Use(Param& p);
  Id Push(std::vector<double> value, std::vector<int> shape, BackwardFn backward);

  const std::vector<double>& value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const std::vector<int>& shape(Id id) const { return nodes_[static_cast<std::size_t>(id)].shape; }
  double scalar(Id id) const { return value(id).at(0); }
  // Gradient buffer, allocated zeroed on first access.
  std::vector<double>& grad(Id id);

  // Seeds d(root)/d(root) = 1 and propagates; params receive += gradients.
  void Backward(Id root);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<int> shape;
    std::vector<double> grad;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Param*, Id> bound_;
};

// Forward kernels, shared by the tape ops and tape-free inference.
namespace kernel {

// y[m] = W[m, :] x + b[m]
void Affine(const double* w, const double* b, const double* x, int m, int n, double* y);
// x [cin, len], w [cin, cout, k] -> y [cout, (len - 1) s - 2 p + k]
void ConvTranspose1d(const double* x, int cin, int len, const double* w, const double* b, int cout,
                     int k, int stride, int pad, double* y);
// x [cin, len], w [cout, cin, k] -> y [cout, (len + 2 p - k) / s + 1]
void Conv1d(const double* x, int cin, int len, const double* w, const double* b, int cout, int k,
            int stride, int pad, double* y);
int ConvTransposeLength(int len, int k, int stride, int pad);
int ConvLength(int len, int k, int stride, int pad);

}  // namespace kernel

namespace op {

using Id = Tape::Id;

Id Affine(Tape& t, Id x, Id w, Id b);
Id ConvTranspose1d(Tape& t, Id x, Id w, Id b, int stride, int pad);
Id Conv1d(Tape& t, Id x, Id w, Id b, int stride, int pad);
Id Relu(Tape& t, Id x);
Id LeakyRelu(Tape& t, Id x, double slope);
Id Reshape(Tape& t, Id x, std::vector<int> shape);
// Keeps the first `length` entries of every row of a [C, L] tensor.
Id Crop(Tape& t, Id x, int length);
// [C1, L] ++ [C2, L] -> [C1 + C2, L]
Id ConcatRows(Tape& t, Id a, Id b);
// Vector [n] -> [n, length], each entry repeated along the row.
Id Broadcast(Tape& t, Id v, int length);
// Concatenation of flat vectors.
Id Concat(Tape& t, const std::vector<Id>& parts);
Id Add(Tape& t, Id a, Id b);
Id Scale(Tape& t, Id a, double k);
// Scalar sum of weighted scalars.
Id WeightedSum(Tape& t, const std::vector<Id>& scalars, const std::vector<double>& weights);

}  // namespace op

}  // namespace binscene::cgan

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

#include "binscene/cgan/autodiff.hpp"

#include <algorithm>

#include "binscene/core/error.hpp"

namespace binscene::cgan {

std::size_t ShapeSize(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) ThrowInvalidInput("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Param::Param(std::string n, std::vector<int> s)
    : name(std::move(n)), shape(std::move(s)), value(ShapeSize(shape), 0.0), grad(value.size(), 0.0) {}

Tape::Id Tape::Push(std::vector<double> value, std::vector<int> shape, BackwardFn backward) {
  if (value.size() != ShapeSize(shape)) ThrowInvalidInput("tape node value does not match its shape");
  nodes_.push_back({std::move(value), std::move(shape), {}, std::move(backward)});
  return static_cast<Id>(nodes_.size() - 1);
}

Tape::Id Tape::Constant(std::vector<double> value, std::vector<int> shape) {
  return Push(std::move(value), std::move(shape), nullptr);
}

Tape::Id Tape::Use(Param& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return it->second;
  Param* target = &p;
  const Id id = Push(p.value, p.shape, [target](Tape& t, Id self) {
    const auto& g = t.grad(self);
    if (target->grad.size() != g.size()) target->grad.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) target->grad[i] += g[i];
  });
  bound_.emplace(&p, id);
  return id;
}

std::vector<double>& Tape::grad(Id id) {
  auto& node = nodes_[static_cast<std::size_t>(id)];
  if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::Backward(Id root) {
  if (value(root).size() != 1) ThrowInvalidInput("backward root must be a scalar");
  grad(root)[0] += 1.0;
  for (Id id = root; id >= 0; --id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    // Nodes no gradient reached contribute nothing.
    if (!node.backward || node.grad.empty()) continue;
    node.backward(*this, id);
  }
}

namespace kernel {

void Affine(const double* w, const double* b, const double* x, int m, int n, double* y) {
  for (int i = 0; i < m; ++i) {
    const double* row = w + static_cast<std::ptrdiff_t>(i) * n;
    double acc = b ? b[i] : 0.0;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

int ConvTransposeLength(int len, int k, int stride, int pad) { return (len - 1) * stride - 2 * pad + k; }

int ConvLength(int len, int k, int stride, int pad) { return (len + 2 * pad - k) / stride + 1; }

void ConvTranspose1d(const double* x, int cin, int len, const double* w, const double* b, int cout,
                     int k, int stride, int pad, double* y) {
  const int out = ConvTransposeLength(len, k, stride, pad);
  for (int co = 0; co < cout; ++co) std::fill(y + co * out, y + (co + 1) * out, b ? b[co] : 0.0);
  for (int ci = 0; ci < cin; ++ci) {
    const double* xr = x + ci * len;
    for (int co = 0; co < cout; ++co) {
      const double* wk = w + (ci * cout + co) * k;
      double* yr = y + co * out;
      for (int i = 0; i < len; ++i) {
        const double xv = xr[i];
        const int base = i * stride - pad;
        const int k0 = std::max(0, -base);
        const int k1 = std::min(k, out - base);
        for (int kk = k0; kk < k1; ++kk) yr[base + kk] += xv * wk[kk];
      }
    }
  }
}

void Conv1d(const double* x, int cin, int len, const double* w, const double* b, int cout, int k,
            int stride, int pad, double* y) {
  const int out = ConvLength(len, k, stride, pad);
  for (int co = 0; co < cout; ++co) {
    double* yr = y + co * out;
    for (int j = 0; j < out; ++j) {
      const int base = j * stride - pad;
      const int k0 = std::max(0, -base);
      const int k1 = std::min(k, len - base);
      double acc = b ? b[co] : 0.0;
      for (int ci = 0; ci < cin; ++ci) {
        const double* xr = x + ci * len + base;
        const double* wk = w + (co * cin + ci) * k;
        for (int kk = k0; kk < k1; ++kk) acc += wk[kk] * xr[kk];
      }
      yr[j] = acc;
    }
  }
}

}  // namespace kernel

namespace op {

namespace {

void RequireShape(const Tape& t, Id id, std::size_t rank, const char* what) {
  if (t.shape(id).size() != rank) ThrowInvalidInput(std::string(what) + ": unexpected tensor rank");
}

}  // namespace

Id Affine(Tape& t, Id x, Id w, Id b) {
  RequireShape(t, w, 2, "affine weight");
  const int m = t.shape(w)[0];
  const int n = t.shape(w)[1];
  if (t.value(x).size() != static_cast<std::size_t>(n) || t.value(b).size() != static_cast<std::size_t>(m)) {
    ThrowInvalidInput("affine shape mismatch");
  }
  std::vector<double> y(static_cast<std::size_t>(m));
  kernel::Affine(t.value(w).data(), t.value(b).data(), t.value(x).data(), m, n, y.data());
  return t.Push(std::move(y), {m}, [x, w, b, m, n](Tape& tp, Id self) {
    const auto gy = tp.grad(self);
    const auto& xv = tp.value(x);
    const auto& wv = tp.value(w);
    auto& gx = tp.grad(x);
    auto& gw = tp.grad(w);
    auto& gb = tp.grad(b);
    for (int i = 0; i < m; ++i) {
      const double g = gy[static_cast<std::size_t>(i)];
      if (g == 0.0) continue;
      gb[static_cast<std::size_t>(i)] += g;
      const std::size_t row = static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
      for (int j = 0; j < n; ++j) {
        gw[row + static_cast<std::size_t>(j)] += g * xv[static_cast<std::size_t>(j)];
        gx[static_cast<std::size_t>(j)] += g * wv[row + static_cast<std::size_t>(j)];
      }
    }
  });
}

Id ConvTranspose1d(Tape& t, Id x, Id w, Id b, int stride, int pad) {
  RequireShape(t, x, 2, "conv-transpose input");
  RequireShape(t, w, 3, "conv-transpose weight");
  const int cin = t.shape(x)[0], len = t.shape(x)[1];
  const int cout = t.shape(w)[1], k = t.shape(w)[2];
  if (t.shape(w)[0] != cin || t.value(b).size() != static_cast<std::size_t>(cout)) {
    ThrowInvalidInput("conv-transpose channel mismatch");
  }
  const int out = kernel::ConvTransposeLength(len, k, stride, pad);
  std::vector<double> y(static_cast<std::size_t>(cout) * static_cast<std::size_t>(out));
  kernel::ConvTranspose1d(t.value(x).data(), cin, len, t.value(w).data(), t.value(b).data(), cout, k,
                          stride, pad, y.data());
  return t.Push(std::move(y), {cout, out}, [=](Tape& tp, Id self) {
    const auto gy = tp.grad(self);
    const auto& xv = tp.value(x);
    const auto& wv = tp.value(w);
    auto& gx = tp.grad(x);
    auto& gw = tp.grad(w);
    auto& gb = tp.grad(b);
    for (int co = 0; co < cout; ++co) {
      double s = 0.0;
      for (int j = 0; j < out; ++j) s += gy[static_cast<std::size_t>(co * out + j)];
      gb[static_cast<std::size_t>(co)] += s;
    }
    for (int ci = 0; ci < cin; ++ci) {
      for (int co = 0; co < cout; ++co) {
        const std::size_t wo = static_cast<std::size_t>((ci * cout + co) * k);
        const double* gr = gy.data() + co * out;
        for (int i = 0; i < len; ++i) {
          const int base = i * stride - pad;
          const int k0 = std::max(0, -base);
          const int k1 = std::min(k, out - base);
          const double xv_i = xv[static_cast<std::size_t>(ci * len + i)];
          double gxi = 0.0;
          for (int kk = k0; kk < k1; ++kk) {
            const double g = gr[base + kk];
            gw[wo + static_cast<std::size_t>(kk)] += xv_i * g;
            gxi += wv[wo + static_cast<std::size_t>(kk)] * g;
          }
          gx[static_cast<std::size_t>(ci * len + i)] += gxi;
        }
      }
    }
  });
}

Id Conv1d(Tape& t, Id x, Id w, Id b, int stride, int pad) {
  RequireShape(t, x, 2, "conv input");
  RequireShape(t, w, 3, "conv weight");
  const int cin = t.shape(x)[0], len = t.shape(x)[1];
  const int cout = t.shape(w)[0], k = t.shape(w)[2];
  if (t.shape(w)[1] != cin || t.value(b).size() != static_cast<std::size_t>(cout)) {
    ThrowInvalidInput("conv channel mismatch");
  }
  const int out = kernel::ConvLength(len, k, stride, pad);
  if (out <= 0) ThrowInvalidInput("conv input shorter than its kernel");
  std::vector<double> y(static_cast<std::size_t>(cout) * static_cast<std::size_t>(out));
  kernel::Conv1d(t.value(x).data(), cin, len, t.value(w).data(), t.value(b).data(), cout, k, stride,
                 pad, y.data());
  return t.Push(std::move(y), {cout, out}, [=](Tape& tp, Id self) {
    const auto gy = tp.grad(self);
    const auto& xv = tp.value(x);
    const auto& wv = tp.value(w);
    auto& gx = tp.grad(x);
    auto& gw = tp.grad(w);
    auto& gb = tp.grad(b);
    for (int co = 0; co < cout; ++co) {
      for (int j = 0; j < out; ++j) {
        const double g = gy[static_cast<std::size_t>(co * out + j)];
        if (g == 0.0) continue;
        gb[static_cast<std::size_t>(co)] += g;
        const int base = j * stride - pad;
        const int k0 = std::max(0, -base);
        const int k1 = std::min(k, len - base);
        for (int ci = 0; ci < cin; ++ci) {
          const std::size_t wo = static_cast<std::size_t>((co * cin + ci) * k);
          const std::size_t xo = static_cast<std::size_t>(ci * len + base);
          for (int kk = k0; kk < k1; ++kk) {
            gw[wo + static_cast<std::size_t>(kk)] += g * xv[xo + static_cast<std::size_t>(kk)];
            gx[xo + static_cast<std::size_t>(kk)] += g * wv[wo + static_cast<std::size_t>(kk)];
          }
        }
      }
    }
  });
}

Id LeakyRelu(Tape& t, Id x, double slope) {
  std::vector<double> y = t.value(x);
  for (auto& v : y) v = v > 0.0 ? v : slope * v;
  return t.Push(std::move(y), t.shape(x), [x, slope](Tape& tp, Id self) {
    const auto& gy = tp.grad(self);
    const auto& xv = tp.value(x);
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += xv[i] > 0.0 ? gy[i] : slope * gy[i];
  });
}

Id Relu(Tape& t, Id x) { return LeakyRelu(t, x, 0.0); }

Id Reshape(Tape& t, Id x, std::vector<int> shape) {
  if (ShapeSize(shape) != t.value(x).size()) ThrowInvalidInput("reshape changes element count");
  return t.Push(t.value(x), std::move(shape), [x](Tape& tp, Id self) {
    const auto& gy = tp.grad(self);
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
  });
}

Id Crop(Tape& t, Id x, int length) {
  RequireShape(t, x, 2, "crop input");
  const int rows = t.shape(x)[0], len = t.shape(x)[1];
  if (length > len || length <= 0) ThrowInvalidInput("crop longer than its input");
  std::vector<double> y(static_cast<std::size_t>(rows) * static_cast<std::size_t>(length));
  const auto& xv = t.value(x);
  for (int r = 0; r < rows; ++r) {
    std::copy_n(xv.begin() + r * len, length, y.begin() + r * length);
  }
  return t.Push(std::move(y), {rows, length}, [x, rows, len, length](Tape& tp, Id self) {
    const auto& gy = tp.grad(self);
    auto& gx = tp.grad(x);
    for (int r = 0; r < rows; ++r) {
      for (int i = 0; i < length; ++i) {
        gx[static_cast<std::size_t>(r * len + i)] += gy[static_cast<std::size_t>(r * length + i)];
      }
    }
  });
}

Id ConcatRows(Tape& t, Id a, Id b) {
  RequireShape(t, a, 2, "concat input");
  RequireShape(t, b, 2, "concat input");
  if (t.shape(a)[1] != t.shape(b)[1]) ThrowInvalidInput("concat length mismatch");
  std::vector<double> y = t.value(a);
  const auto na = y.size();
  y.insert(y.end(), t.value(b).begin(), t.value(b).end());
  return t.Push(std::move(y), {t.shape(a)[0] + t.shape(b)[0], t.shape(a)[1]},
                [a, b, na](Tape& tp, Id self) {
                  const auto& gy = tp.grad(self);
                  auto& ga = tp.grad(a);
                  for (std::size_t i = 0; i < na; ++i) ga[i] += gy[i];
                  auto& gb = tp.grad(b);
                  for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gy[na + i];
                });
}

Id Broadcast(Tape& t, Id v, int length) {
  const auto n = static_cast<int>(t.value(v).size());
  std::vector<double> y(static_cast<std::size_t>(n) * static_cast<std::size_t>(length));
  for (int i = 0; i < n; ++i) {
    std::fill_n(y.begin() + i * length, length, t.value(v)[static_cast<std::size_t>(i)]);
  }
  return t.Push(std::move(y), {n, length}, [v, n, length](Tape& tp, Id self) {
    const auto& gy = tp.grad(self);
    auto& gv = tp.grad(v);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < length; ++j) s += gy[static_cast<std::size_t>(i * length + j)];
      gv[static_cast<std::size_t>(i)] += s;
    }
  });
}

Id Concat(Tape& t, const std::vector<Id>& parts) {
  std::vector<double> y;
  for (Id p : parts) y.insert(y.end(), t.value(p).begin(), t.value(p).end());
  const int n = static_cast<int>(y.size());
  return t.Push(std::move(y), {n}, [parts](Tape& tp, Id self) {
    const auto gy = tp.grad(self);
    std::size_t at = 0;
    for (Id p : parts) {
      auto& gp = tp.grad(p);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += gy[at + i];
      at += gp.size();
    }
  });
}

Id Add(Tape& t, Id a, Id b) {
  if (t.value(a).size() != t.value(b).size()) ThrowInvalidInput("add size mismatch");
  std::vector<double> y = t.value(a);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += t.value(b)[i];
  return t.Push(std::move(y), t.shape(a), [a, b](Tape& tp, Id self) {
    const auto gy = tp.grad(self);
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
    auto& gb = tp.grad(b);
    for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i];
  });
}

Id Scale(Tape& t, Id a, double k) {
  std::vector<double> y = t.value(a);
  for (auto& v : y) v *= k;
  return t.Push(std::move(y), t.shape(a), [a, k](Tape& tp, Id self) {
    const auto& gy = tp.grad(self);
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += k * gy[i];
  });
}

Id WeightedSum(Tape& t, const std::vector<Id>& scalars, const std::vector<double>& weights) {
  if (scalars.size() != weights.size()) ThrowInvalidInput("weighted sum size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) s += weights[i] * t.scalar(scalars[i]);
  return t.Push({s}, {1}, [scalars, weights](Tape& tp, Id self) {
    const double g = tp.grad(self)[0];
    for (std::size_t i = 0; i < scalars.size(); ++i) tp.grad(scalars[i])[0] += weights[i] * g;
  });
}

}  // namespace op

}  // namespace binscene::cgan

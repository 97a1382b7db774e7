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

#include "binscene/cgan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "binscene/core/error.hpp"
#include "binscene/core/fft.hpp"

namespace binscene::cgan {

std::vector<double> FlattenBir(const codec::PreprocessedBir& p) {
  codec::ValidatePreprocessed(p);
  std::vector<double> flat(p.left);
  flat.insert(flat.end(), p.right.begin(), p.right.end());
  return flat;
}

codec::PreprocessedBir UnflattenBir(std::span<const double> flat, const codec::BirLayout& layout) {
  const auto total = static_cast<std::size_t>(layout.total());
  if (flat.size() != 2 * total) ThrowInvalidInput("flat BIR has the wrong length");
  codec::PreprocessedBir p;
  p.layout = layout;
  p.left.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(total));
  p.right.assign(flat.begin() + static_cast<std::ptrdiff_t>(total), flat.end());
  return p;
}

std::vector<int> CenterBins(const codec::StftConfig& stft, double rate) {
  std::vector<int> bins;
  for (double fc : codec::kEdCenters) {
    const int c = static_cast<int>(std::llround(fc * stft.window / rate));
    if (c < stft.bins() && (bins.empty() || bins.back() != c)) bins.push_back(c);
  }
  return bins;
}

double MseLoss(std::span<const double> gen, std::span<const double> ref, double* grad) {
  if (gen.size() != ref.size() || gen.empty()) ThrowInvalidInput("MSE loss length mismatch");
  const double n = static_cast<double>(gen.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const double d = gen[i] - ref[i];
    sum += d * d;
    if (grad) grad[i] = 2.0 * d / n;
  }
  return sum / n;
}

double BirLoss(std::span<const double> gen, std::span<const double> ref, int total, int body,
               double* grad) {
  const auto t = static_cast<std::size_t>(total);
  if (gen.size() != 2 * t || ref.size() != 2 * t || body <= 0 || body > total) {
    ThrowInvalidInput("BIR loss length mismatch");
  }
  if (grad) std::fill(grad, grad + 2 * t, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(body); ++i) {
    const double d = (gen[i] - gen[t + i]) - (ref[i] - ref[t + i]);
    sum += d * d;
    if (grad) {
      grad[i] = 2.0 * d / body;
      grad[t + i] = -2.0 * d / body;
    }
  }
  return sum / body;
}

namespace {

struct Spectrogram {
  Eigen::MatrixXd power;  // frames x bins
  std::vector<std::vector<std::complex<double>>> spectra;
};

Spectrogram Analyze(std::span<const double> x, const codec::StftConfig& stft, RealFft& fft,
                    const std::vector<double>& win) {
  const int frames = stft.frames(x.size());
  if (frames == 0) ThrowInvalidInput("ED loss: BIR body shorter than the STFT window");
  Spectrogram s;
  s.power.resize(frames, stft.bins());
  s.spectra.assign(static_cast<std::size_t>(frames), std::vector<std::complex<double>>(fft.bins()));
  std::vector<double> frame(win.size());
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t * stft.hop);
    for (std::size_t i = 0; i < win.size(); ++i) frame[i] = x[start + i] * win[i];
    auto& spec = s.spectra[static_cast<std::size_t>(t)];
    fft.Forward(frame, spec);
    for (int c = 0; c < stft.bins(); ++c) s.power(t, c) = std::norm(spec[static_cast<std::size_t>(c)]);
  }
  return s;
}

}  // namespace

double EdLoss(std::span<const double> gen, std::span<const double> ref, int total, int body,
              const EdLossConfig& cfg, double* grad) {
  const auto t = static_cast<std::size_t>(total);
  if (gen.size() != 2 * t || ref.size() != 2 * t || body <= 0 || body > total) {
    ThrowInvalidInput("ED loss length mismatch");
  }
  std::vector<int> bins = cfg.bins;
  if (bins.empty()) {
    for (int c = 0; c < cfg.stft.bins(); ++c) bins.push_back(c);
  }
  for (int c : bins) {
    if (c < 0 || c >= cfg.stft.bins()) ThrowInvalidInput("ED loss bin out of range");
  }
  const auto win = codec::HannWindow(cfg.stft.window);
  RealFft fft(static_cast<std::size_t>(cfg.stft.window));
  if (grad) std::fill(grad, grad + 2 * t, 0.0);

  double loss = 0.0;
  for (int ch = 0; ch < 2; ++ch) {
    const auto g = gen.subspan(ch * t, static_cast<std::size_t>(body));
    const auto r = ref.subspan(ch * t, static_cast<std::size_t>(body));
    const Spectrogram sg = Analyze(g, cfg.stft, fft, win);
    const Eigen::MatrixXd ed_g = codec::EdFromPower(sg.power);
    const Eigen::MatrixXd ed_r = codec::EdRelief(r, cfg.stft);
    const Eigen::Index frames = ed_g.rows();
    const double count = static_cast<double>(frames) * static_cast<double>(bins.size());
    // d(loss)/d(power): the ED is a suffix sum, so its adjoint is a prefix sum.
    Eigen::MatrixXd g_power = Eigen::MatrixXd::Zero(frames, cfg.stft.bins());
    for (int c : bins) {
      double prefix = 0.0;
      for (Eigen::Index f = 0; f < frames; ++f) {
        const double d = std::log(ed_r(f, c) + cfg.eps) - std::log(ed_g(f, c) + cfg.eps);
        loss += d * d / count / 2.0;
        prefix += -2.0 * d / (ed_g(f, c) + cfg.eps) / count / 2.0;
        g_power(f, c) = prefix;
      }
    }
    if (!grad) continue;
    // power = |X|^2 with X = DFT(w x): d/dx[n] = 2 w[n] sum_c G_c Re(X_c e^{+i 2 pi c n / W}).
    // A c2r transform of Y sums Re(Y_c e^{+i...}) with interior bins doubled,
    // so interior bins are halved first.
    std::vector<std::complex<double>> y(fft.bins());
    std::vector<double> back(static_cast<std::size_t>(cfg.stft.window));
    const int last = cfg.stft.bins() - 1;
    for (Eigen::Index f = 0; f < frames; ++f) {
      const auto& spec = sg.spectra[static_cast<std::size_t>(f)];
      bool any = false;
      for (int c = 0; c <= last; ++c) {
        const double gp = g_power(f, c);
        any = any || gp != 0.0;
        const double half = (c == 0 || (c == last && cfg.stft.window % 2 == 0)) ? 1.0 : 0.5;
        y[static_cast<std::size_t>(c)] = gp * half * spec[static_cast<std::size_t>(c)];
      }
      if (!any) continue;
      // c2r ignores the imaginary parts at DC and Nyquist, matching Re(.).
      fft.Inverse(y, back);
      const std::size_t start = ch * t + static_cast<std::size_t>(f * cfg.stft.hop);
      for (std::size_t n = 0; n < win.size(); ++n) grad[start + n] += 2.0 * win[n] * back[n];
    }
  }
  return loss;
}

double LossMse(const codec::PreprocessedBir& gen, const codec::PreprocessedBir& ref) {
  return MseLoss(FlattenBir(gen), FlattenBir(ref), nullptr);
}

double LossBir(const codec::PreprocessedBir& gen, const codec::PreprocessedBir& ref) {
  if (gen.layout.total() != ref.layout.total()) ThrowInvalidInput("BIR loss layout mismatch");
  return BirLoss(FlattenBir(gen), FlattenBir(ref), gen.layout.total(), gen.layout.body, nullptr);
}

double LossEd(const codec::PreprocessedBir& gen, const codec::PreprocessedBir& ref,
              const EdLossConfig& cfg) {
  if (gen.layout.total() != ref.layout.total()) ThrowInvalidInput("ED loss layout mismatch");
  return EdLoss(FlattenBir(gen), FlattenBir(ref), gen.layout.total(), gen.layout.body, cfg, nullptr);
}

double ClampProbability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

GanTerms GanTermsFromProbabilities(double d_real, double d_fake) {
  const double r = ClampProbability(d_real);
  const double f = ClampProbability(d_fake);
  return {std::log(1.0 - f), std::log(r) + std::log(1.0 - f)};
}

namespace op {

namespace {

int TotalOf(const Tape& t, Id gen) {
  const auto& s = t.shape(gen);
  if (s.size() != 2 || s[0] != 2) ThrowInvalidInput("loss input must be a [2, total] tensor");
  return s[1];
}

Id LossNode(Tape& t, Id gen, double value, std::vector<double> grad) {
  return t.Push({value}, {1}, [gen, grad = std::move(grad)](Tape& tp, Id self) {
    const double g = tp.grad(self)[0];
    auto& gx = tp.grad(gen);
    for (std::size_t i = 0; i < grad.size(); ++i) gx[i] += g * grad[i];
  });
}

}  // namespace

Id MseLoss(Tape& t, Id gen, std::vector<double> ref) {
  std::vector<double> grad(t.value(gen).size());
  const double v = cgan::MseLoss(t.value(gen), ref, grad.data());
  return LossNode(t, gen, v, std::move(grad));
}

Id BirLoss(Tape& t, Id gen, std::vector<double> ref, int body) {
  std::vector<double> grad(t.value(gen).size());
  const double v = cgan::BirLoss(t.value(gen), ref, TotalOf(t, gen), body, grad.data());
  return LossNode(t, gen, v, std::move(grad));
}

Id EdLoss(Tape& t, Id gen, std::vector<double> ref, int body, const EdLossConfig& cfg) {
  std::vector<double> grad(t.value(gen).size());
  const double v = cgan::EdLoss(t.value(gen), ref, TotalOf(t, gen), body, cfg, grad.data());
  return LossNode(t, gen, v, std::move(grad));
}

Id FakeTerm(Tape& t, Id logit, bool non_saturating) {
  const double z = t.scalar(logit);
  const double s = Sigmoid(z);
  const double d = ClampProbability(s);
  const bool clamped = d != s;
  const double value = non_saturating ? -std::log(d) : std::log(1.0 - d);
  // d/dz log(1 - sigmoid) = -sigmoid; d/dz -log(sigmoid) = sigmoid - 1.
  const double dz = clamped ? 0.0 : (non_saturating ? s - 1.0 : -s);
  return t.Push({value}, {1}, [logit, dz](Tape& tp, Id self) {
    tp.grad(logit)[0] += dz * tp.grad(self)[0];
  });
}

Id RealTerm(Tape& t, Id logit) {
  const double z = t.scalar(logit);
  const double s = Sigmoid(z);
  const double d = ClampProbability(s);
  const double dz = d != s ? 0.0 : 1.0 - s;
  return t.Push({std::log(d)}, {1}, [logit, dz](Tape& tp, Id self) {
    tp.grad(logit)[0] += dz * tp.grad(self)[0];
  });
}

}  // namespace op

}  // namespace binscene::cgan

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

#include "binscene/codec/decay.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "binscene/core/error.hpp"
#include "binscene/core/fft.hpp"

namespace binscene::codec {

int StftConfig::frames(std::size_t n) const {
  if (n < static_cast<std::size_t>(window)) return 0;
  return static_cast<int>((n - static_cast<std::size_t>(window)) / static_cast<std::size_t>(hop)) + 1;
}

std::vector<double> HannWindow(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  }
  return w;
}

Eigen::MatrixXd PowerSpectrogram(std::span<const double> x, const StftConfig& cfg) {
  if (cfg.window < 2 || cfg.hop < 1) ThrowInvalidInput("invalid STFT config");
  const int frames = cfg.frames(x.size());
  if (frames == 0) {
    ThrowInvalidInput("signal of " + std::to_string(x.size()) +
                      " samples is shorter than the STFT window");
  }
  const auto win = HannWindow(cfg.window);
  RealFft fft(static_cast<std::size_t>(cfg.window));
  std::vector<double> frame(win.size());
  std::vector<std::complex<double>> spec(fft.bins());
  Eigen::MatrixXd power(frames, cfg.bins());
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg.hop);
    for (std::size_t i = 0; i < win.size(); ++i) frame[i] = x[start + i] * win[i];
    fft.Forward(frame, spec);
    for (int c = 0; c < cfg.bins(); ++c) power(t, c) = std::norm(spec[static_cast<std::size_t>(c)]);
  }
  return power;
}

Eigen::MatrixXd EdFromPower(const Eigen::MatrixXd& power) {
  Eigen::MatrixXd ed = power;
  for (Eigen::Index t = ed.rows() - 2; t >= 0; --t) ed.row(t) += ed.row(t + 1);
  return ed;
}

Eigen::MatrixXd EdRelief(std::span<const double> x, const StftConfig& cfg) {
  return EdFromPower(PowerSpectrogram(x, cfg));
}

std::vector<double> Edc(std::span<const double> x) {
  if (x.empty()) ThrowInvalidInput("EDC of an empty signal");
  std::vector<double> curve(x.size());
  double acc = 0.0;
  for (std::size_t i = x.size(); i-- > 0;) {
    acc += x[i] * x[i];
    curve[i] = acc;
  }
  if (acc > 0.0) {
    for (auto& v : curve) v /= acc;
  }
  return curve;
}

std::vector<double> EdcDb(std::span<const double> x, double floor_db) {
  auto curve = Edc(x);
  if (curve[0] == 0.0) ThrowNumerical("EDC undefined in dB for a silent channel");
  const double floor_lin = std::pow(10.0, floor_db / 10.0);
  for (auto& v : curve) v = 10.0 * std::log10(std::max(v, floor_lin));
  return curve;
}

namespace {

// Least-squares slope (dB per second) of the EDC between the first samples
// at or below `hi_db` and `lo_db`.
double DecaySlope(std::span<const double> x, double sample_rate, double hi_db, double lo_db) {
  if (!(sample_rate > 0.0)) ThrowInvalidInput("sample rate must be positive");
  const auto db = EdcDb(x);
  std::size_t i0 = db.size();
  std::size_t i1 = db.size();
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (i0 == db.size() && db[i] <= hi_db) i0 = i;
    if (db[i] <= lo_db) {
      i1 = i;
      break;
    }
  }
  if (i1 == db.size()) {
    ThrowNumerical("insufficient decay: EDC never reaches " + std::to_string(lo_db) + " dB");
  }
  // A curve that jumps through the whole span in one sample still has a slope.
  if (i0 == i1 && i0 > 0) --i0;
  if (i0 >= i1) ThrowNumerical("insufficient decay: empty fit span");
  const double n = static_cast<double>(i1 - i0 + 1);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    st += t;
    sy += db[i];
    stt += t * t;
    sty += t * db[i];
  }
  const double denom = n * stt - st * st;
  const double slope = (n * sty - st * sy) / denom;
  if (!(slope < 0.0)) ThrowNumerical("insufficient decay: non-negative EDC slope");
  return slope;
}

}  // namespace

double T60(std::span<const double> x, double sample_rate) {
  return -60.0 / DecaySlope(x, sample_rate, -5.0, -35.0);
}

double Edt(std::span<const double> x, double sample_rate) {
  return -60.0 / DecaySlope(x, sample_rate, 0.0, -10.0);
}

DrrResult Drr(std::span<const double> x, double sample_rate, double half_window_s) {
  if (x.empty()) ThrowInvalidInput("DRR of an empty signal");
  std::size_t peak = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::abs(x[i]) > std::abs(x[peak])) peak = i;
  }
  if (x[peak] == 0.0) ThrowNumerical("DRR undefined for a silent channel");
  const auto half = static_cast<std::size_t>(std::llround(half_window_s * sample_rate));
  const std::size_t lo = peak > half ? peak - half : 0;
  const std::size_t hi = std::min(x.size() - 1, peak + half);
  double direct = 0.0, late = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    (i >= lo && i <= hi ? direct : late) += x[i] * x[i];
  }
  if (late == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(direct / late), false};
}

}  // namespace binscene::codec

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

#include <span>
#include <vector>

#include <Eigen/Core>

namespace binscene::codec {

struct StftConfig {
  int window = 128;
  int hop = 64;

  int frames(std::size_t n) const;
  int bins() const { return window / 2 + 1; }
};

// Periodic Hann window of the configured length.
std::vector<double> HannWindow(int length);

// |STFT|^2, frames x bins, unpadded frames starting at multiples of hop.
Eigen::MatrixXd PowerSpectrogram(std::span<const double> x, const StftConfig& cfg = {});

// Backward cumulative sum over frames: ED(i, c) = sum_{t >= i} |H(t, c)|^2.
Eigen::MatrixXd EdRelief(std::span<const double> x, const StftConfig& cfg = {});
Eigen::MatrixXd EdFromPower(const Eigen::MatrixXd& power);

// Schroeder curve normalized to 1 at t = 0. A silent channel yields zeros.
std::vector<double> Edc(std::span<const double> x);
// 10 log10 of Edc with a floor; throws kNumerical for a silent channel.
std::vector<double> EdcDb(std::span<const double> x, double floor_db = -200.0);

// Reverberation time from a line fit of the Schroeder curve over
// [-5, -35] dB, extrapolated to 60 dB. Throws "insufficient decay".
double T60(std::span<const double> x, double sample_rate);
// Six times the 0 to -10 dB decay time, from a line fit over that span.
double Edt(std::span<const double> x, double sample_rate);

struct DrrResult {
  double db = 0.0;
  bool direct_only = false;  // no energy outside the window; db is +inf
};

// Direct window is the absolute peak +- 2.5 ms.
DrrResult Drr(std::span<const double> x, double sample_rate, double half_window_s = 0.0025);

}  // namespace binscene::codec

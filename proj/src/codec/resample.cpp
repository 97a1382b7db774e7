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

#include "binscene/codec/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "binscene/core/error.hpp"

namespace binscene::codec {

namespace {

constexpr double kKaiserBeta = 5.0;
constexpr int kTapsPerPhase = 10;

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Linear-phase low-pass with cutoff `cutoff` in units of Nyquist, unit DC gain.
std::vector<double> KaiserLowpass(int half_len, double cutoff) {
  const int length = 2 * half_len + 1;
  const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
  std::vector<double> h(static_cast<std::size_t>(length));
  double sum = 0.0;
  for (int k = 0; k < length; ++k) {
    const double r = 2.0 * k / (length - 1) - 1.0;
    const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
    h[static_cast<std::size_t>(k)] = cutoff * Sinc(cutoff * (k - half_len)) * w;
    sum += h[static_cast<std::size_t>(k)];
  }
  for (auto& v : h) v /= sum;
  return h;
}

}  // namespace

std::vector<double> ResamplePoly(std::span<const double> x, int up, int down) {
  if (up <= 0 || down <= 0) ThrowInvalidInput("resample factors must be positive");
  const int g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return {x.begin(), x.end()};

  const int max_rate = std::max(up, down);
  const int half_len = kTapsPerPhase * max_rate;
  std::vector<double> h = KaiserLowpass(half_len, 1.0 / max_rate);
  for (auto& v : h) v *= up;

  const auto n = static_cast<long long>(x.size());
  const long long out_len = (n * up + down - 1) / down;
  const long long taps = static_cast<long long>(h.size());
  std::vector<double> y(static_cast<std::size_t>(out_len), 0.0);
  for (long long m = 0; m < out_len; ++m) {
    // y[m] = sum_k h[k] u[m*down + half_len - k], u the zero-stuffed input.
    const long long centre = m * down + half_len;
    long long k0 = centre % up;  // first tap landing on a stuffed sample
    double acc = 0.0;
    for (long long k = k0; k < taps; k += up) {
      const long long idx = (centre - k) / up;
      if (idx < 0) break;
      if (idx < n) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(idx)];
    }
    y[static_cast<std::size_t>(m)] = acc;
  }
  return y;
}

std::vector<double> ResampleRate(std::span<const double> x, double from_rate, double to_rate) {
  const auto from = static_cast<long long>(std::llround(from_rate));
  const auto to = static_cast<long long>(std::llround(to_rate));
  if (from <= 0 || to <= 0 || std::abs(from - from_rate) > 1e-9 || std::abs(to - to_rate) > 1e-9) {
    ThrowInvalidInput("sample rates must be positive integers");
  }
  const long long g = std::gcd(from, to);
  return ResamplePoly(x, static_cast<int>(to / g), static_cast<int>(from / g));
}

}  // namespace binscene::codec

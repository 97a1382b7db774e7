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
#include <complex>
#include <numbers>

#include "binscene/core/error.hpp"
#include "binscene/core/fft.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/raytracer/raytracer.hpp"

namespace binscene::raytracer {

namespace {

// Windowed ideal low-pass at `cutoff` Hz, centred at tap `half`.
std::vector<double> LowpassTaps(double cutoff, double sample_rate, int half) {
  std::vector<double> h(static_cast<std::size_t>(2 * half + 1));
  const double fc = 2.0 * cutoff / sample_rate;  // in units of Nyquist
  for (int n = -half; n <= half; ++n) {
    const double x = fc * n;
    h[static_cast<std::size_t>(n + half)] =
        n == 0 ? fc : fc * std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  }
  return h;
}

}  // namespace

Filterbank MakeOctaveFilterbank(double sample_rate, int half_length) {
  if (half_length < 1) ThrowInvalidInput("filter half length must be positive");
  const double nyquist = 0.5 * sample_rate;
  const auto taps = static_cast<std::size_t>(2 * half_length + 1);
  // Symmetric Hann spanning all taps; the centre weight is exactly 1, so the
  // telescoping band sum is a unit impulse.
  std::vector<double> window(taps);
  for (std::size_t i = 0; i < taps; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                                     static_cast<double>(taps + 1));
  }
  Filterbank fb;
  fb.half_length = half_length;
  std::vector<double> prev(taps, 0.0);
  for (int b = 0; b < kBandCount; ++b) {
    std::vector<double> upper(taps, 0.0);
    if (b == kBandCount - 1) {
      upper[static_cast<std::size_t>(half_length)] = 1.0;
    } else {
      const double edge = std::min(nyquist, materials::kBandCenters[static_cast<std::size_t>(b)] *
                                                std::numbers::sqrt2);
      upper = LowpassTaps(edge, sample_rate, half_length);
      for (std::size_t i = 0; i < taps; ++i) upper[i] *= window[i];
    }
    std::vector<double> band(taps);
    for (std::size_t i = 0; i < taps; ++i) band[i] = upper[i] - prev[i];
    fb.bands.push_back(std::move(band));
    prev = std::move(upper);
  }
  return fb;
}

Bir SynthesizeBir(const EnergyHistogram& hist, const SimConfig& cfg, std::uint64_t seed,
                  Warnings* warnings) {
  ValidateSimConfig(cfg);
  Bir bir;
  bir.sample_rate = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * cfg.sample_rate));
  bir.left.assign(n, 0.0);
  bir.right.assign(n, 0.0);
  if (hist.Empty()) {
    Warn(warnings, "empty energy histogram: BIR is silent");
    return bir;
  }
  for (int ear = 0; ear < 2; ++ear) {
    for (const auto& bin : hist.ears[ear]) {
      for (double v : bin) {
        if (!(v >= 0.0) || !std::isfinite(v)) ThrowInvalidInput("histogram energies must be finite and non-negative");
      }
    }
  }

  const Filterbank fb = MakeOctaveFilterbank(cfg.sample_rate);
  const auto half = static_cast<std::size_t>(fb.half_length);
  RealFft fft(NextPowerOfTwo(n + 2 * half));
  const double inv_size = 1.0 / static_cast<double>(fft.size());
  std::vector<std::vector<std::complex<double>>> spectra(kBandCount);
  double band_energy[kBandCount];
  for (int b = 0; b < kBandCount; ++b) {
    spectra[static_cast<std::size_t>(b)].resize(fft.bins());
    fft.Forward(fb.bands[static_cast<std::size_t>(b)], spectra[static_cast<std::size_t>(b)]);
    double e = 0.0;
    for (double v : fb.bands[static_cast<std::size_t>(b)]) e += v * v;
    band_energy[b] = e;
  }

  const double spb = hist.bin_width * cfg.sample_rate;
  std::vector<double> noise(n), filtered(fft.size());
  std::vector<std::complex<double>> spec(fft.bins());
  for (int ear = 0; ear < 2; ++ear) {
    auto& out = bir.channel(ear);
    const auto& bins = hist.ears[ear];
    for (int b = 0; b < kBandCount; ++b) {
      bool any = false;
      for (const auto& bin : bins) any = any || bin[static_cast<std::size_t>(b)] > 0.0;
      if (!any) continue;
      // Each (ear, band) owns a noise stream, so sample values scale exactly
      // with sqrt(energy).
      Rng rng(MixSeed(seed, static_cast<std::uint64_t>(ear * kBandCount + b)));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& v : noise) v = normal(rng);
      fft.Forward(noise, spec);
      for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= spectra[static_cast<std::size_t>(b)][k];
      fft.Inverse(spec, filtered);
      // Undo the filter's centring delay.
      const double* band_noise = filtered.data() + half;
      for (std::size_t i = 0; i < bins.size(); ++i) {
        const double e = bins[i][static_cast<std::size_t>(b)];
        if (e <= 0.0) continue;
        const auto lo = static_cast<std::size_t>(std::llround(static_cast<double>(i) * spb));
        const auto hi = std::min(n, static_cast<std::size_t>(std::llround(static_cast<double>(i + 1) * spb)));
        if (lo >= hi) continue;
        double seg = 0.0;
        for (std::size_t s = lo; s < hi; ++s) seg += band_noise[s] * band_noise[s];
        seg *= inv_size * inv_size;
        if (!(seg > 0.0)) continue;
        const double g = std::sqrt(e / seg) * inv_size;
        for (std::size_t s = lo; s < hi; ++s) out[s] += g * band_noise[s];
      }
    }
    // Direct sound: one band-shaped click per arrival, each band carrying
    // its arrival energy.
    for (const auto& a : hist.direct[ear]) {
      const auto at = static_cast<long long>(std::llround(a.time * cfg.sample_rate));
      for (int b = 0; b < kBandCount; ++b) {
        const double e = a.energy[static_cast<std::size_t>(b)];
        if (e <= 0.0) continue;
        const double g = std::sqrt(e / band_energy[b]);
        const auto& taps = fb.bands[static_cast<std::size_t>(b)];
        for (std::size_t k = 0; k < taps.size(); ++k) {
          const long long s = at + static_cast<long long>(k) - static_cast<long long>(half);
          if (s >= 0 && s < static_cast<long long>(n)) out[static_cast<std::size_t>(s)] += g * taps[k];
        }
      }
    }
  }
  return bir;
}

Bir SimulatePair(const AcousticScene& scene, const Vec3& source, const Vec3& listener,
                 const SimConfig& cfg, const HeadModel& head, std::uint64_t seed,
                 Warnings* warnings) {
  const EnergyHistogram hist = Trace(scene, source, listener, cfg, head, seed);
  return SynthesizeBir(hist, cfg, MixSeed(seed, 0xB1B), warnings);
}

}  // namespace binscene::raytracer

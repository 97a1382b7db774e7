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

#include "binscene/render/convolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "binscene/codec/resample.hpp"
#include "binscene/core/error.hpp"
#include "binscene/core/fft.hpp"
#include "binscene/core/wav.hpp"

namespace binscene::render {

std::vector<double> OverlapAddConvolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) ThrowInvalidInput("convolve: empty input");
  const std::size_t m = h.size();
  // Blocks at least as long as the kernel keep the FFT size within 4x the block.
  const std::size_t n = NextPowerOfTwo(2 * std::max<std::size_t>(m, 1024));
  const std::size_t block = n - m + 1;
  RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::vector<std::complex<double>> kernel(fft.bins()), spec(fft.bins());
  std::copy(h.begin(), h.end(), buf.begin());
  fft.Forward(buf, kernel);

  std::vector<double> out(x.size() + m - 1, 0.0);
  std::vector<double> back(n);
  for (std::size_t start = 0; start < x.size(); start += block) {
    const std::size_t len = std::min(block, x.size() - start);
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(start),
              x.begin() + static_cast<std::ptrdiff_t>(start + len), buf.begin());
    fft.Forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= kernel[k];
    fft.Inverse(spec, back);
    const std::size_t valid = std::min(len + m - 1, out.size() - start);
    for (std::size_t i = 0; i < valid; ++i) out[start + i] += back[i] / static_cast<double>(n);
  }
  return out;
}

StereoAudio Convolve(std::span<const double> dry, double dry_rate, const Bir& bir) {
  ValidateBir(bir);
  if (dry.empty() || bir.size() == 0) ThrowInvalidInput("convolve: empty input");
  if (!(dry_rate > 0.0)) ThrowInvalidInput("convolve: dry sample rate must be positive");
  std::vector<double> resampled;
  if (dry_rate != bir.sample_rate) {
    resampled = codec::ResampleRate(dry, dry_rate, bir.sample_rate);
    dry = resampled;
  }
  StereoAudio out;
  out.sample_rate = bir.sample_rate;
  out.left = OverlapAddConvolve(dry, bir.left);
  out.right = OverlapAddConvolve(dry, bir.right);
  return out;
}

MonoAudio ReadDryAudio(const std::string& path, Warnings* warnings) {
  WavData wav = ReadWav(path);
  if (wav.channels.empty() || wav.channels[0].empty()) ThrowInvalidInput(path + ": no audio samples");
  MonoAudio mono;
  mono.sample_rate = wav.sample_rate;
  if (wav.channels.size() == 1) {
    mono.samples = std::move(wav.channels[0]);
    return mono;
  }
  Warn(warnings, path + ": " + std::to_string(wav.channels.size()) + " channels averaged to mono");
  mono.samples.assign(wav.channels[0].size(), 0.0);
  for (const auto& ch : wav.channels) {
    for (std::size_t i = 0; i < ch.size(); ++i) mono.samples[i] += ch[i] / static_cast<double>(wav.channels.size());
  }
  return mono;
}

void WriteStereoWav(const std::string& path, const StereoAudio& audio) {
  WriteWavFloat(path, static_cast<int>(std::lround(audio.sample_rate)), {audio.left, audio.right});
}

}  // namespace binscene::render

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
#include <string>
#include <vector>

#include "binscene/core/bir.hpp"
#include "binscene/core/log.hpp"

namespace binscene::render {

struct StereoAudio {
  double sample_rate = 48000.0;
  std::vector<double> left;
  std::vector<double> right;
};

// Full linear convolution by FFT overlap-add, length x + h - 1.
std::vector<double> OverlapAddConvolve(std::span<const double> x, std::span<const double> h);

// Per-ear convolution; the dry signal is resampled to the BIR rate first.
StereoAudio Convolve(std::span<const double> dry, double dry_rate, const Bir& bir);

struct MonoAudio {
  double sample_rate = 0.0;
  std::vector<double> samples;
};

// Mono WAV reader; multi-channel input is averaged down with a warning.
MonoAudio ReadDryAudio(const std::string& path, Warnings* warnings = nullptr);

void WriteStereoWav(const std::string& path, const StereoAudio& audio);

}  // namespace binscene::render

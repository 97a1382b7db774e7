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

#include <string>
#include <vector>

#include "binscene/core/bir.hpp"

namespace binscene {

struct WavData {
  int sample_rate = 0;
  std::vector<std::vector<double>> channels;
};

// Reads RIFF/WAVE PCM 16/24/32-bit integer or IEEE float 32/64-bit.
WavData ReadWav(const std::string& path);

// Writes IEEE float 32-bit samples, one channel per vector.
void WriteWavFloat(const std::string& path, int sample_rate,
                   const std::vector<std::vector<double>>& channels);

void WriteBirWav(const std::string& path, const Bir& bir);
Bir ReadBirWav(const std::string& path);

}  // namespace binscene

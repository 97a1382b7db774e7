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

#include <vector>

#include "binscene/core/bir.hpp"
#include "binscene/core/log.hpp"

namespace binscene::codec {

inline constexpr double kCodecRate = 16000.0;
inline constexpr double kSdFloor = 1e-8;

struct BirLayout {
  int body = 3968;
  int sd_block = 128;

  int total() const { return body + sd_block; }
};

inline constexpr BirLayout kFullLayout{3968, 128};
inline constexpr BirLayout kDeskLayout{512, 32};

// Channels at 16 kHz: samples [0, body) are the BIR divided by its joint SD,
// samples [body, total) all hold that SD.
struct PreprocessedBir {
  BirLayout layout;
  std::vector<double> left;
  std::vector<double> right;

  const std::vector<double>& channel(int ear) const { return ear == 0 ? left : right; }
  std::vector<double>& channel(int ear) { return ear == 0 ? left : right; }
};

void ValidatePreprocessed(const PreprocessedBir& p);

// Joint SD is the root mean square over both channels' retained samples, so
// a one-hot pair of amplitude a gives a / sqrt(2 * body).
double JointSd(const std::vector<double>& left, const std::vector<double>& right);

PreprocessedBir PreprocessBir(const Bir& bir, const BirLayout& layout = kFullLayout,
                              Warnings* warnings = nullptr);

// Throws kInvalidInput "corrupt SD block" when either channel's SD mean is
// not positive.
Bir PostprocessBir(const PreprocessedBir& p);

double RecoveredSd(const PreprocessedBir& p);

}  // namespace binscene::codec

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

#include <cstddef>
#include <vector>

namespace binscene {

// Two-channel impulse response, one channel per ear.
struct Bir {
  double sample_rate = 48000.0;
  std::vector<double> left;
  std::vector<double> right;

  std::size_t size() const { return left.size(); }
  double duration() const { return static_cast<double>(left.size()) / sample_rate; }
  const std::vector<double>& channel(int ear) const { return ear == 0 ? left : right; }
  std::vector<double>& channel(int ear) { return ear == 0 ? left : right; }
};

// Throws kInvalidInput on unequal channel lengths or non-finite samples.
void ValidateBir(const Bir& bir);

}  // namespace binscene

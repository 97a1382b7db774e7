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

#include <cstdint>
#include <vector>

#include "binscene/cgan/train.hpp"

namespace binscene::cgan {

struct GradCheckOptions {
  ObjectiveWeights weights;
  int coordinates = 128;
  double h = 1e-4;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  int checked = 0;
  int excluded = 0;  // |a| + |n| < 1e-12
};

// Analytic generator-objective gradient against central differences on
// randomly sampled generator coordinates. A discriminator, if given, stays
// frozen.
GradCheckReport GradCheck(Generator& g, Discriminator* d, const std::vector<std::vector<double>>& conds,
                          const std::vector<codec::PreprocessedBir>& refs, const GradCheckOptions& opt);

}  // namespace binscene::cgan

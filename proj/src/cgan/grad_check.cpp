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

#include "binscene/cgan/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binscene/core/error.hpp"
#include "binscene/core/rng.hpp"

namespace binscene::cgan {

namespace {

double Objective(Generator& g, Discriminator* d, const std::vector<std::vector<double>>& conds,
                 const std::vector<codec::PreprocessedBir>& refs, const ObjectiveWeights& w, bool backward) {
  Tape t;
  std::vector<Tape::Id> ids;
  std::vector<const codec::PreprocessedBir*> ptrs;
  for (std::size_t i = 0; i < conds.size(); ++i) {
    ids.push_back(t.Constant(conds[i], {static_cast<int>(conds[i].size())}));
    ptrs.push_back(&refs[i]);
  }
  const ObjectiveTerms terms = GeneratorObjective(t, ids, ptrs, g, d, w);
  if (backward) t.Backward(terms.root);
  return terms.total;
}

}  // namespace

GradCheckReport GradCheck(Generator& g, Discriminator* d, const std::vector<std::vector<double>>& conds,
                          const std::vector<codec::PreprocessedBir>& refs, const GradCheckOptions& opt) {
  if (conds.empty() || conds.size() != refs.size()) ThrowInvalidInput("grad check: empty or mismatched batch");
  g.weights.ZeroGrad();
  Objective(g, d, conds, refs, opt.weights, true);

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t k = 0; k < g.weights.params.size(); ++k) {
    for (std::size_t i = 0; i < g.weights.params[k].size(); ++i) coords.emplace_back(k, i);
  }
  Rng rng(MixSeed(opt.seed, 0x6C4));
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(std::min(coords.size(), static_cast<std::size_t>(std::max(opt.coordinates, 0))));

  GradCheckReport report;
  for (const auto& [k, i] : coords) {
    auto& p = g.weights.params[k];
    const double a = p.grad[i];
    const double saved = p.value[i];
    p.value[i] = saved + opt.h;
    const double up = Objective(g, d, conds, refs, opt.weights, false);
    p.value[i] = saved - opt.h;
    const double down = Objective(g, d, conds, refs, opt.weights, false);
    p.value[i] = saved;
    const double n = (up - down) / (2.0 * opt.h);
    if (std::abs(a) + std::abs(n) < 1e-12) {
      ++report.excluded;
      continue;
    }
    ++report.checked;
    report.max_relative_error =
        std::max(report.max_relative_error, std::abs(a - n) / std::max(std::abs(a), std::abs(n)));
  }
  return report;
}

}  // namespace binscene::cgan

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

#include "binscene/codec/preprocess.hpp"

#include <cmath>

#include "binscene/codec/resample.hpp"
#include "binscene/core/error.hpp"

namespace binscene::codec {

void ValidatePreprocessed(const PreprocessedBir& p) {
  const auto total = static_cast<std::size_t>(p.layout.total());
  if (p.layout.body <= 0 || p.layout.sd_block <= 0) ThrowInvalidInput("invalid BIR layout");
  if (p.left.size() != total || p.right.size() != total) {
    ThrowInvalidInput("preprocessed BIR must have " + std::to_string(total) +
                      " samples per channel");
  }
  for (int ear = 0; ear < 2; ++ear) {
    for (double v : p.channel(ear)) {
      if (!std::isfinite(v)) ThrowInvalidInput("preprocessed BIR has non-finite samples");
    }
  }
}

double JointSd(const std::vector<double>& left, const std::vector<double>& right) {
  double sum = 0.0;
  for (double v : left) sum += v * v;
  for (double v : right) sum += v * v;
  const double n = static_cast<double>(left.size() + right.size());
  return n > 0 ? std::sqrt(sum / n) : 0.0;
}

PreprocessedBir PreprocessBir(const Bir& bir, const BirLayout& layout, Warnings* warnings) {
  ValidateBir(bir);
  if (bir.size() < 3) ThrowInvalidInput("BIR needs at least 3 samples");
  if (layout.body <= 0 || layout.sd_block <= 0) ThrowInvalidInput("invalid BIR layout");

  PreprocessedBir out;
  out.layout = layout;
  const auto body = static_cast<std::size_t>(layout.body);
  for (int ear = 0; ear < 2; ++ear) {
    std::vector<double> ch = bir.sample_rate == kCodecRate
                                 ? bir.channel(ear)
                                 : ResampleRate(bir.channel(ear), bir.sample_rate, kCodecRate);
    ch.resize(body, 0.0);
    out.channel(ear) = std::move(ch);
  }
  double sd = JointSd(out.left, out.right);
  if (!(sd > kSdFloor)) {
    Warn(warnings, "silent BIR: SD floored at 1e-8");
    sd = kSdFloor;
  }
  for (int ear = 0; ear < 2; ++ear) {
    auto& ch = out.channel(ear);
    for (auto& v : ch) v /= sd;
    ch.resize(static_cast<std::size_t>(layout.total()), sd);
  }
  return out;
}

double RecoveredSd(const PreprocessedBir& p) {
  ValidatePreprocessed(p);
  const auto body = static_cast<std::size_t>(p.layout.body);
  double means[2];
  for (int ear = 0; ear < 2; ++ear) {
    const auto& ch = p.channel(ear);
    double sum = 0.0;
    for (std::size_t i = body; i < ch.size(); ++i) sum += ch[i];
    means[ear] = sum / p.layout.sd_block;
    if (!(means[ear] > 0.0)) ThrowInvalidInput("corrupt SD block");
  }
  return 0.5 * (means[0] + means[1]);
}

Bir PostprocessBir(const PreprocessedBir& p) {
  const double sd = RecoveredSd(p);
  Bir out;
  out.sample_rate = kCodecRate;
  const auto body = static_cast<std::ptrdiff_t>(p.layout.body);
  for (int ear = 0; ear < 2; ++ear) {
    const auto& ch = p.channel(ear);
    auto& dst = out.channel(ear);
    dst.assign(ch.begin(), ch.begin() + body);
    for (auto& v : dst) v *= sd;
  }
  return out;
}

}  // namespace binscene::codec

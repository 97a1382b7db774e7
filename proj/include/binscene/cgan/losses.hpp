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
#include <vector>

#include <Eigen/Core>

#include "binscene/cgan/autodiff.hpp"
#include "binscene/codec/decay.hpp"
#include "binscene/codec/metrics.hpp"
#include "binscene/codec/preprocess.hpp"

namespace binscene::cgan {

inline constexpr double kProbabilityClamp = 1e-7;
inline constexpr double kEdEpsilon = 1e-8;

// Flat [2, total] view of a preprocessed BIR: left row, then right row.
std::vector<double> FlattenBir(const codec::PreprocessedBir& p);
codec::PreprocessedBir UnflattenBir(std::span<const double> flat, const codec::BirLayout& layout);

// STFT bins nearest the ED center frequencies at `rate`.
std::vector<int> CenterBins(const codec::StftConfig& stft, double rate = codec::kCodecRate);

struct EdLossConfig {
  codec::StftConfig stft;
  std::vector<int> bins = CenterBins(codec::StftConfig{});  // empty: every STFT bin
  double eps = kEdEpsilon;
};

// Value-and-gradient kernels on flat [2, total] buffers. `grad` may be null
// and receives d(loss)/d(gen), overwritten.
double MseLoss(std::span<const double> gen, std::span<const double> ref, double* grad);
double BirLoss(std::span<const double> gen, std::span<const double> ref, int total, int body,
               double* grad);
double EdLoss(std::span<const double> gen, std::span<const double> ref, int total, int body,
              const EdLossConfig& cfg, double* grad);

double LossMse(const codec::PreprocessedBir& gen, const codec::PreprocessedBir& ref);
double LossBir(const codec::PreprocessedBir& gen, const codec::PreprocessedBir& ref);
double LossEd(const codec::PreprocessedBir& gen, const codec::PreprocessedBir& ref,
              const EdLossConfig& cfg = {});

double ClampProbability(double p);
double Sigmoid(double z);

struct GanTerms {
  double l_cgan = 0.0;  // log(1 - D(G)), minimized by the generator
  double l_d = 0.0;     // log D(real) + log(1 - D(G)), maximized by the discriminator
};
GanTerms GanTermsFromProbabilities(double d_real, double d_fake);

namespace op {

using Id = Tape::Id;

Id MseLoss(Tape& t, Id gen, std::vector<double> ref);
Id BirLoss(Tape& t, Id gen, std::vector<double> ref, int body);
Id EdLoss(Tape& t, Id gen, std::vector<double> ref, int body, const EdLossConfig& cfg);
// From a discriminator logit: log(1 - d), or -log d when non-saturating.
Id FakeTerm(Tape& t, Id logit, bool non_saturating);
// log d
Id RealTerm(Tape& t, Id logit);

}  // namespace op

}  // namespace binscene::cgan

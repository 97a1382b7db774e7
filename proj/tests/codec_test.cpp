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
#include <numbers>

#include <gtest/gtest.h>

#include "binscene/codec/decay.hpp"
#include "binscene/codec/metrics.hpp"
#include "binscene/codec/preprocess.hpp"
#include "binscene/codec/resample.hpp"
#include "binscene/core/error.hpp"
#include "binscene/core/rng.hpp"

namespace binscene::codec {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> Noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

// Noise shaped by exp(-t / tau), tau = t60 / (3 ln 10) so the energy envelope
// falls 60 dB in t60 seconds.
std::vector<double> DecayingNoise(double t60, double rate, double seconds, std::uint64_t seed) {
  const double tau = t60 / (3.0 * std::log(10.0));
  auto x = Noise(static_cast<std::size_t>(seconds * rate), seed);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= std::exp(-static_cast<double>(i) / rate / tau);
  return x;
}

double RelL2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

Bir At16k(std::vector<double> l, std::vector<double> r) {
  Bir b;
  b.sample_rate = 16000;
  b.left = std::move(l);
  b.right = std::move(r);
  return b;
}

TEST(Resample, ThreeToOneLength) {
  const auto x = Noise(12000, 1);
  EXPECT_EQ(ResampleRate(x, 48000, 16000).size(), 4000u);
  EXPECT_EQ(ResampleRate(x, 48000, 48000).size(), 12000u);
}

TEST(Resample, SinePassesUnchanged) {
  const double f = 1000.0;
  std::vector<double> x(4800);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * f * i / 48000.0);
  const auto y = ResampleRate(x, 48000, 16000);
  double err = 0.0;
  for (std::size_t i = 200; i + 200 < y.size(); ++i) {
    err = std::max(err, std::abs(y[i] - std::sin(2 * kPi * f * i / 16000.0)));
  }
  EXPECT_LT(err, 0.01);
}

TEST(Resample, AboveNyquistIsAttenuated) {
  std::vector<double> x(4800);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * 12000.0 * i / 48000.0);
  const auto y = ResampleRate(x, 48000, 16000);
  double peak = 0.0;
  for (std::size_t i = 200; i + 200 < y.size(); ++i) peak = std::max(peak, std::abs(y[i]));
  EXPECT_LT(peak, 0.05);
}

TEST(PreprocessBir, FullLayoutKeeps3968) {
  Bir bir;
  bir.sample_rate = 48000;
  bir.left = Noise(12000, 2);
  bir.right = Noise(12000, 3);
  const auto p = PreprocessBir(bir);
  ASSERT_EQ(p.left.size(), 4096u);
  ASSERT_EQ(p.right.size(), 4096u);
  const auto resampled = ResampleRate(bir.left, 48000, 16000);
  ASSERT_EQ(resampled.size(), 4000u);
  const double sd = RecoveredSd(p);
  for (std::size_t i = 0; i < 3968; i += 97) EXPECT_NEAR(p.left[i] * sd, resampled[i], 1e-9);
  for (std::size_t i = 3968; i < 4096; ++i) {
    EXPECT_NEAR(p.left[i], p.left[3968], 1e-12);
    EXPECT_NEAR(p.right[i], p.left[3968], 1e-12);
  }
  EXPECT_GT(p.left[3968], 0.0);
}

TEST(PreprocessBir, UnitSdLeavesSamples) {
  auto l = Noise(3968, 4), r = Noise(3968, 5);
  const double sd = JointSd(l, r);
  for (auto& v : l) v /= sd;
  for (auto& v : r) v /= sd;
  const auto p = PreprocessBir(At16k(l, r));
  for (std::size_t i = 0; i < 3968; ++i) {
    ASSERT_NEAR(p.left[i], l[i], 1e-12);
    ASSERT_NEAR(p.right[i], r[i], 1e-12);
  }
  EXPECT_NEAR(p.left[4000], 1.0, 1e-12);
}

TEST(PreprocessBir, ImpulseSdClosedForm) {
  const double a = 0.7;
  std::vector<double> l(3968, 0.0), r(3968, 0.0);
  l[0] = a;
  r[0] = a;
  // Joint RMS over 2 * 3968 samples holding two values of a.
  const double expected = std::sqrt(2.0 * a * a / (2.0 * 3968.0));
  EXPECT_NEAR(PreprocessBir(At16k(l, r)).left[4095], expected, 1e-12);
}

TEST(PreprocessBir, OneHotPairSd) {
  const double a = 0.7;
  std::vector<double> l(3968, 0.0), r(3968, 0.0);
  l[0] = a;
  EXPECT_NEAR(PreprocessBir(At16k(l, r)).left[4095], a / std::sqrt(2.0 * 3968.0), 1e-12);
}

TEST(PreprocessBir, SilentInputWarnsAndFloors) {
  Warnings w;
  const auto p = PreprocessBir(At16k(std::vector<double>(4000, 0.0), std::vector<double>(4000, 0.0)),
                               kFullLayout, &w);
  EXPECT_EQ(w.size(), 1u);
  EXPECT_DOUBLE_EQ(p.left[4000], kSdFloor);
}

TEST(PreprocessBir, ShortInputZeroPadded) {
  const auto p = PreprocessBir(At16k({1.0, 0.5, 0.25}, {0.0, 0.0, 0.0}));
  EXPECT_EQ(p.left.size(), 4096u);
  EXPECT_EQ(p.left[10], 0.0);
}

TEST(PreprocessBir, RejectsTooShort) { EXPECT_THROW(PreprocessBir(At16k({1.0, 0.0}, {1.0, 0.0})), Error); }

TEST(PreprocessBir, PreservesInterauralRatio) {
  const auto l = Noise(3968, 6), r = Noise(3968, 7);
  const auto p = PreprocessBir(At16k(l, r));
  for (std::size_t i = 0; i < 3968; i += 31) {
    EXPECT_NEAR(p.left[i] / p.right[(i + 5) % 3968], l[i] / r[(i + 5) % 3968],
                1e-9 * std::abs(l[i] / r[(i + 5) % 3968]) + 1e-12);
  }
}

TEST(PostprocessBir, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto l = Noise(4500, seed), r = Noise(4500, seed + 50);
    for (auto& v : r) v *= 0.01 * (1 + seed);
    const auto back = PostprocessBir(PreprocessBir(At16k(l, r)));
    ASSERT_EQ(back.size(), 3968u);
    EXPECT_EQ(back.sample_rate, 16000);
    l.resize(3968);
    r.resize(3968);
    EXPECT_LT(RelL2(back.left, l), 1e-6);
    EXPECT_LT(RelL2(back.right, r), 1e-6);
  }
}

TEST(PostprocessBir, NoisySdBlockWithinOnePercent) {
  const auto l = Noise(3968, 8), r = Noise(3968, 9);
  auto p = PreprocessBir(At16k(l, r));
  const double sd = p.left[3968];
  Rng rng(10);
  for (int ear = 0; ear < 2; ++ear) {
    for (std::size_t i = 3968; i < 4096; ++i) p.channel(ear)[i] *= 1.0 + 0.01 * (2.0 * Uniform01(rng) - 1.0);
  }
  EXPECT_NEAR(RecoveredSd(p) / sd, 1.0, 0.01);
  const auto back = PostprocessBir(p);
  EXPECT_NEAR(back.left[0] / l[0], 1.0, 0.01);
}

TEST(PostprocessBir, ZeroBodyGivesZeros) {
  PreprocessedBir p;
  p.layout = kFullLayout;
  p.left.assign(4096, 0.0);
  p.right.assign(4096, 0.0);
  for (std::size_t i = 3968; i < 4096; ++i) p.left[i] = p.right[i] = 0.3;
  for (double v : PostprocessBir(p).left) EXPECT_EQ(v, 0.0);
}

TEST(PostprocessBir, CorruptSdBlockRejected) {
  PreprocessedBir p;
  p.layout = kDeskLayout;
  p.left.assign(544, 0.1);
  p.right.assign(544, 0.1);
  for (std::size_t i = 512; i < 544; ++i) p.right[i] = -0.5;
  try {
    PostprocessBir(p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("corrupt SD block"), std::string::npos);
  }
}

TEST(EdRelief, FrameZeroIsColumnTotal) {
  const auto x = Noise(2048, 11);
  const auto power = PowerSpectrogram(x);
  const auto ed = EdRelief(x);
  ASSERT_EQ(ed.cols(), 65);
  ASSERT_EQ(ed.rows(), (2048 - 128) / 64 + 1);
  for (Eigen::Index c = 0; c < ed.cols(); ++c) EXPECT_NEAR(ed(0, c), power.col(c).sum(), 1e-9 * ed(0, c));
}

TEST(EdRelief, NonIncreasingInTime) {
  const auto x = DecayingNoise(0.3, 16000, 0.25, 12);
  const auto ed = EdRelief(x);
  for (Eigen::Index t = 1; t < ed.rows(); ++t) {
    for (Eigen::Index c = 0; c < ed.cols(); ++c) ASSERT_LE(ed(t, c), ed(t - 1, c));
  }
}

TEST(EdRelief, ZeroInZeroOut) {
  EXPECT_EQ(EdRelief(std::vector<double>(512, 0.0)).norm(), 0.0);
  EXPECT_THROW(EdRelief(std::vector<double>(100, 1.0)), Error);
}

TEST(EdRelief, StationaryNoiseDecaysLinearly) {
  const auto x = Noise(16000, 13);
  const auto power = PowerSpectrogram(x);
  const auto ed = EdRelief(x);
  const auto frames = ed.rows();
  // Oracle: suffix sums of the computed spectrogram, then summed over bins.
  std::vector<double> suffix(static_cast<std::size_t>(frames), 0.0);
  double acc = 0.0;
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    acc += power.row(t).sum();
    suffix[static_cast<std::size_t>(t)] = acc;
  }
  for (Eigen::Index t = 0; t < frames; ++t) {
    EXPECT_NEAR(ed.row(t).sum(), suffix[static_cast<std::size_t>(t)], 1e-9 * suffix[0]);
    const double linear = suffix[0] * static_cast<double>(frames - t) / static_cast<double>(frames);
    EXPECT_NEAR(suffix[static_cast<std::size_t>(t)], linear, 0.03 * suffix[0]);
  }
}

TEST(Edc, ImpulseIsStep) {
  const auto c = Edc(std::vector<double>{2.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(c, (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
}

TEST(Edc, ExponentialSlope) {
  const double rate = 16000.0, tau = 0.05;
  std::vector<double> x(8000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::exp(-static_cast<double>(i) / rate / tau);
  const auto c = Edc(x);
  // Away from the truncation tail ln EDC falls at 2 / tau per second.
  const std::size_t i0 = 800, i1 = 2400;
  const double slope = (std::log(c[i1]) - std::log(c[i0])) / ((i1 - i0) / rate);
  EXPECT_NEAR(slope, -2.0 / tau, 0.01 * 2.0 / tau);
}

TEST(Edc, ZeroTailAndScaleInvariant) {
  auto x = Noise(300, 14);
  const auto base = Edc(x);
  auto scaled = x;
  for (auto& v : scaled) v *= -3.5;
  const auto s = Edc(scaled);
  x.resize(600, 0.0);
  const auto padded = Edc(x);
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_NEAR(padded[i], base[i], 1e-12);
    EXPECT_NEAR(s[i], base[i], 1e-12);
  }
}

TEST(EdcDb, SilentChannelFlagged) { EXPECT_THROW(EdcDb(std::vector<double>(10, 0.0)), Error); }

TEST(T60, ExponentialNoiseWithinFivePercent) {
  for (double t60 : {0.1, 0.3, 0.5, 1.0, 2.0}) {
    const auto x = DecayingNoise(t60, 16000, 1.2 * t60 + 0.05, static_cast<std::uint64_t>(t60 * 100));
    EXPECT_NEAR(T60(x, 16000), t60, 0.05 * t60) << t60;
    EXPECT_NEAR(Edt(x, 16000), t60, 0.05 * t60) << t60;
  }
}

TEST(T60, InsufficientDecay) {
  try {
    T60(std::vector<double>(100, 1.0), 16000);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient decay"), std::string::npos);
  }
}

TEST(Drr, ImpulseIsDirectOnly) {
  std::vector<double> x(1000, 0.0);
  x[50] = 1.0;
  const auto d = Drr(x, 16000);
  EXPECT_TRUE(d.direct_only);
  EXPECT_TRUE(std::isinf(d.db));
}

TEST(Drr, EqualEnergyIsZeroDb) {
  std::vector<double> x(2000, 0.0);
  x[100] = 1.0;
  x[900] = -1.0;  // 50 ms later, outside the 2.5 ms window
  EXPECT_NEAR(Drr(x, 16000).db, 0.0, 1e-12);
}

TEST(MetricReport, IdentityIsZero) {
  std::vector<Bir> a = {At16k(DecayingNoise(0.4, 16000, 0.5, 15), DecayingNoise(0.4, 16000, 0.5, 16))};
  const auto r = BuildMetricReport(a, a);
  for (const auto& e : r.pairs[0].channels) {
    EXPECT_EQ(e.t60.value(), 0.0);
    EXPECT_EQ(e.edt.value(), 0.0);
    EXPECT_EQ(e.drr.value(), 0.0);
    EXPECT_EQ(e.ed_mse_log, 0.0);
    EXPECT_EQ(e.bir_mae, 0.0);
    EXPECT_EQ(e.edc_mae_db, 0.0);
  }
  EXPECT_EQ(r.t60.count, 2u);
}

TEST(MetricReport, ScaleInvariantAfterNormalization) {
  const auto ref = At16k(DecayingNoise(0.4, 16000, 0.5, 17), DecayingNoise(0.4, 16000, 0.5, 18));
  auto gen = ref;
  for (auto& v : gen.left) v *= 2.0;
  for (auto& v : gen.right) v *= 2.0;
  const auto r = BuildMetricReport({gen}, {ref});
  EXPECT_NEAR(r.bir_mae.mean, 0.0, 1e-12);
  EXPECT_NEAR(r.ed_mse_log.mean, 0.0, 1e-12);
  EXPECT_NEAR(r.t60.mean, 0.0, 1e-9);
}

TEST(MetricReport, KnownT60Difference) {
  const double t1 = 0.3, t2 = 0.6;
  const double tau1 = t1 / (3 * std::log(10.0)), tau2 = t2 / (3 * std::log(10.0));
  const auto a = At16k(DecayingNoise(t1, 16000, 0.8, 19), DecayingNoise(t1, 16000, 0.8, 20));
  const auto b = At16k(DecayingNoise(t2, 16000, 0.8, 21), DecayingNoise(t2, 16000, 0.8, 22));
  const auto r = BuildMetricReport({a}, {b});
  const double expected = 3.0 * std::log(10.0) * std::abs(tau1 - tau2);
  EXPECT_NEAR(r.t60.mean, expected, 0.05 * expected);
  EXPECT_GT(r.edc_mae_db.mean, 0.0);
  EXPECT_EQ(r.pairs[0].ed_difference_generated.size(), a.size());
}

TEST(MetricReport, MismatchRejected) {
  const auto a = At16k(Noise(1000, 1), Noise(1000, 2));
  const auto b = At16k(Noise(900, 1), Noise(900, 2));
  EXPECT_THROW(BuildMetricReport({a}, {b}), Error);
  EXPECT_THROW(BuildMetricReport({a, a}, {a}), Error);
}

TEST(MetricReport, Serializations) {
  const auto a = At16k(DecayingNoise(0.4, 16000, 0.5, 23), DecayingNoise(0.4, 16000, 0.5, 24));
  const auto r = BuildMetricReport({a}, {a}, {"p0"});
  const auto j = ReportToJson(r);
  EXPECT_TRUE(j.contains("pairs"));
  EXPECT_NE(ReportToText(r).find("t60"), std::string::npos);
  EXPECT_NE(ReportToCsv(r).find("p0"), std::string::npos);
  EXPECT_FALSE(EdDifferenceCsv(r, 16000).empty());
}

}  // namespace
}  // namespace binscene::codec

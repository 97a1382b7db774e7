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

#include <atomic>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "binscene/core/bir.hpp"
#include "binscene/core/error.hpp"
#include "binscene/core/fft.hpp"
#include "binscene/core/json_util.hpp"
#include "binscene/core/parallel.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/core/tensor_archive.hpp"
#include "binscene/core/wav.hpp"
#include "support/temp_dir.hpp"

namespace binscene {
namespace {

using binscene::testing::TempDir;

std::vector<double> RandomSignal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = 2.0 * Uniform01(rng) - 1.0;
  return x;
}

TEST(RealFft, MatchesDirectDft) {
  for (std::size_t n : {8u, 30u, 64u}) {
    const auto x = RandomSignal(n, n);
    RealFft fft(n);
    std::vector<std::complex<double>> spec(fft.bins());
    fft.Forward(x, spec);
    for (std::size_t k = 0; k < fft.bins(); ++k) {
      std::complex<double> ref = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        ref += x[t] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * t) / static_cast<double>(n));
      }
      EXPECT_NEAR(std::abs(spec[k] - ref), 0.0, 1e-9) << "n=" << n << " k=" << k;
    }
  }
}

TEST(RealFft, InverseScalesByLength) {
  const std::size_t n = 32;
  const auto x = RandomSignal(n, 3);
  RealFft fft(n);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<double> back(n);
  fft.Forward(x, spec);
  fft.Inverse(spec, back);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], n * x[i], 1e-9);
}

TEST(FftConvolve, MatchesDirectSum) {
  const auto a = RandomSignal(37, 1);
  const auto b = RandomSignal(11, 2);
  const auto y = FftConvolve(a, b);
  ASSERT_EQ(y.size(), a.size() + b.size() - 1);
  for (std::size_t n = 0; n < y.size(); ++n) {
    double ref = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (n >= k && n - k < a.size()) ref += a[n - k] * b[k];
    }
    EXPECT_NEAR(y[n], ref, 1e-10);
  }
}

TEST(NextPowerOfTwo, Values) {
  EXPECT_EQ(NextPowerOfTwo(1), 1u);
  EXPECT_EQ(NextPowerOfTwo(5), 8u);
  EXPECT_EQ(NextPowerOfTwo(4096), 4096u);
  EXPECT_EQ(NextPowerOfTwo(4097), 8192u);
}

TEST(MixSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t i = 0; i < 256; ++i) seen.insert(MixSeed(s, i));
  }
  EXPECT_EQ(seen.size(), 4u * 256u);
  EXPECT_EQ(MixSeed(7, 9), MixSeed(7, 9));
}

TEST(Uniform01, StaysInHalfOpenInterval) {
  Rng rng(11);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = Uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  ParallelFor(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsWorkerError) {
  EXPECT_THROW(ParallelFor(100, 3,
                           [](std::size_t i) {
                             if (i == 42) ThrowNumerical("boom");
                           }),
               Error);
}

TEST(Wav, FloatRoundTrip) {
  TempDir dir;
  const std::vector<std::vector<double>> ch = {{0.0, 0.5, -0.25, 1.0}, {0.1, 0.2, 0.3, -1.0}};
  WriteWavFloat(dir.file("a.wav"), 22050, ch);
  const auto back = ReadWav(dir.file("a.wav"));
  EXPECT_EQ(back.sample_rate, 22050);
  ASSERT_EQ(back.channels.size(), 2u);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back.channels[c][i], ch[c][i], 1e-7);
  }
}

void Put(std::ofstream& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

TEST(Wav, ReadsPcm16) {
  TempDir dir;
  const std::vector<std::int16_t> samples = {0, 16384, -32768, 32767};
  {
    std::ofstream out(dir.file("p.wav"), std::ios::binary);
    out.write("RIFF", 4);
    Put(out, 36 + 8, 4);
    out.write("WAVEfmt ", 8);
    Put(out, 16, 4);
    Put(out, 1, 2);  // PCM
    Put(out, 1, 2);
    Put(out, 8000, 4);
    Put(out, 16000, 4);
    Put(out, 2, 2);
    Put(out, 16, 2);
    out.write("data", 4);
    Put(out, 8, 4);
    for (auto s : samples) Put(out, static_cast<std::uint16_t>(s), 2);
  }
  const auto wav = ReadWav(dir.file("p.wav"));
  EXPECT_EQ(wav.sample_rate, 8000);
  ASSERT_EQ(wav.channels.size(), 1u);
  EXPECT_DOUBLE_EQ(wav.channels[0][1], 0.5);
  EXPECT_DOUBLE_EQ(wav.channels[0][2], -1.0);
}

TEST(Wav, RejectsGarbage) {
  TempDir dir;
  std::ofstream(dir.file("x.wav")) << "not a wav file at all";
  EXPECT_THROW(ReadWav(dir.file("x.wav")), Error);
  EXPECT_THROW(ReadWav(dir.file("missing.wav")), Error);
}

TEST(Wav, BirRoundTrip) {
  TempDir dir;
  Bir bir;
  bir.sample_rate = 16000;
  bir.left = {1.0, 0.5, 0.0};
  bir.right = {0.0, 0.25, 0.125};
  WriteBirWav(dir.file("b.wav"), bir);
  const auto back = ReadBirWav(dir.file("b.wav"));
  EXPECT_EQ(back.sample_rate, 16000);
  EXPECT_EQ(back.left, bir.left);
  EXPECT_EQ(back.right, bir.right);
}

TEST(ValidateBir, RejectsMismatchAndNan) {
  Bir bir;
  bir.left = {1.0, 2.0};
  bir.right = {1.0};
  EXPECT_THROW(ValidateBir(bir), Error);
  bir.right = {1.0, std::nan("")};
  EXPECT_THROW(ValidateBir(bir), Error);
  bir.right = {1.0, 0.0};
  EXPECT_NO_THROW(ValidateBir(bir));
}

TEST(TensorArchive, RoundTrip) {
  TempDir dir;
  const std::vector<NamedTensor> tensors = {{"a", {2, 3}, {1, 2, 3, 4, 5, 6}}, {"b", {1}, {-0.125}}};
  SaveTensorArchive(dir.file("ck"), tensors, {{"kind", "test"}});
  const auto back = LoadTensorArchive(dir.file("ck"));
  EXPECT_EQ(back.meta.at("kind"), "test");
  EXPECT_EQ(back.Get("a").shape, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(back.Get("a").values, tensors[0].values);
  EXPECT_EQ(back.Get("b").values, tensors[1].values);
  EXPECT_THROW(back.Get("c"), Error);
}

TEST(HashJson, StableAndSensitive) {
  const nlohmann::json a = {{"x", 1}, {"y", {1, 2}}};
  const nlohmann::json b = {{"x", 1}, {"y", {1, 3}}};
  EXPECT_EQ(HashJson(a), HashJson(nlohmann::json::parse(a.dump())));
  EXPECT_NE(HashJson(a), HashJson(b));
}

TEST(JsonFile, RoundTripAndBadInput) {
  TempDir dir;
  WriteJsonFile(dir.file("a.json"), {{"k", 2.5}});
  EXPECT_EQ(ReadJsonFile(dir.file("a.json")).at("k"), 2.5);
  WriteTextFile(dir.file("b.json"), "{not json");
  EXPECT_THROW(ReadJsonFile(dir.file("b.json")), Error);
}

TEST(ErrorKindName, AllKindsNamed) {
  for (auto k : {ErrorKind::kUsage, ErrorKind::kInvalidInput, ErrorKind::kNumerical, ErrorKind::kIo}) {
    EXPECT_GT(std::strlen(ErrorKindName(k)), 0u);
  }
}

}  // namespace
}  // namespace binscene

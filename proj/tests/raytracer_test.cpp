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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "binscene/codec/decay.hpp"
#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/core/wav.hpp"
#include "binscene/raytracer/bvh.hpp"
#include "binscene/raytracer/dataset.hpp"
#include "binscene/raytracer/raytracer.hpp"
#include "support/scenes.hpp"
#include "support/temp_dir.hpp"

namespace binscene::raytracer {
namespace {

using binscene::testing::GridBox;
using binscene::testing::Shoebox;
using binscene::testing::TempDir;
using binscene::testing::UniformMaterials;
using binscene::testing::UvSphere;

constexpr double kPi = std::numbers::pi;

SimConfig FastConfig(int rays, double duration) {
  SimConfig cfg;
  cfg.n_rays = rays;
  cfg.duration = duration;
  cfg.threads = 1;
  return cfg;
}

double BinSum(const BandCoefficients& b) {
  double s = 0.0;
  for (double v : b) s += v;
  return s;
}

std::string FileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Moller-Trumbore, two-sided.
std::optional<double> RayTriangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const Vec3 s = o - a;
  const double u = s.dot(p) / det;
  if (u < 0 || u > 1) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) / det;
  if (v < 0 || u + v > 1) return std::nullopt;
  const double t = e2.dot(q) / det;
  if (t <= 1e-9) return std::nullopt;
  return t;
}

TEST(Bvh, NearestHitMatchesBruteForce) {
  const auto mesh = UvSphere(2.0, 12, 20);
  const Bvh bvh(mesh.vertices, mesh.faces);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 o(Uniform01(rng) - 0.5, Uniform01(rng) - 0.5, Uniform01(rng) - 0.5);
    const Vec3 d = Vec3(Uniform01(rng) - 0.5, Uniform01(rng) - 0.5, Uniform01(rng) - 0.5).normalized();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : mesh.faces) {
      if (auto t = RayTriangle(o, d, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]])) best = std::min(best, *t);
    }
    const auto hit = bvh.Intersect(o, d, 1e-9, std::numeric_limits<double>::infinity());
    ASSERT_TRUE(hit);
    EXPECT_NEAR(hit->t, best, 1e-9);
    EXPECT_NEAR(hit->normal.norm(), 1.0, 1e-12);
  }
}

TEST(Bvh, DistanceAndContainment) {
  const auto mesh = Shoebox({4, 3, 2});
  const Bvh bvh(mesh.vertices, mesh.faces);
  EXPECT_NEAR(bvh.Distance({1.0, 1.0, 0.5}), 0.5, 1e-12);
  EXPECT_NEAR(bvh.Distance({5.0, 1.0, 1.0}), 1.0, 1e-12);
  EXPECT_TRUE(bvh.Contains({2.0, 1.5, 1.0}));
  EXPECT_FALSE(bvh.Contains({5.0, 1.5, 1.0}));
  EXPECT_TRUE(bvh.Occluded({-1.0, 1.5, 1.0}, {2.0, 1.5, 1.0}, 1e-9));
  EXPECT_FALSE(bvh.Occluded({1.0, 1.5, 1.0}, {2.0, 1.5, 1.0}, 1e-9));
}

TEST(GridPositions, ShoeboxCount) {
  const auto mesh = Shoebox({4, 4, 3});
  const auto pos = GridPositions(mesh, 1.0, 0.2);
  // Brute-force oracle: lattice points strictly inside with wall distance
  // at least the clearance.
  std::size_t expected = 0;
  for (int i = 0; i <= 4; ++i) {
    for (int j = 0; j <= 4; ++j) {
      for (int k = 0; k <= 3; ++k) {
        const double d = std::min({double(i), 4.0 - i, double(j), 4.0 - j, double(k), 3.0 - k});
        if (d >= 0.2) ++expected;
      }
    }
  }
  EXPECT_EQ(expected, 18u);
  EXPECT_EQ(pos.size(), expected);
}

TEST(GridPositions, OverConstrained) {
  try {
    GridPositions(Shoebox({4, 4, 3}), 1.0, 1.6);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("zero valid positions"), std::string::npos);
  }
}

TEST(GridPositions, ClearanceIsInclusive) {
  // The lattice point at 4 sits exactly 0.2 from the walls at 4.2 and 3.2.
  const auto pos = GridPositions(Shoebox({4.2, 4.2, 3.2}), 1.0, 0.2);
  EXPECT_EQ(pos.size(), 4u * 4u * 3u);
}

TEST(SplitSourcesListeners, ClampsToHalf) {
  const auto pos = GridPositions(Shoebox({4, 4, 3}), 1.0, 0.2);
  const auto split = SplitSourcesListeners(pos, 10, 3);
  EXPECT_EQ(split.sources.size(), 9u);
  EXPECT_EQ(split.listeners.size(), 9u);
}

TEST(SplitSourcesListeners, TenOfThirty) {
  std::vector<Vec3> pos;
  for (int i = 0; i < 30; ++i) pos.emplace_back(i, 0, 0);
  const auto a = SplitSourcesListeners(pos, 10, 5);
  const auto b = SplitSourcesListeners(pos, 10, 5);
  EXPECT_EQ(a.sources.size(), 10u);
  EXPECT_EQ(a.listeners.size(), 20u);
  EXPECT_EQ(a.sources, b.sources);
  EXPECT_EQ(a.listeners, b.listeners);
  std::set<double> all;
  for (const auto& p : a.sources) all.insert(p.x());
  for (const auto& p : a.listeners) all.insert(p.x());
  EXPECT_EQ(all.size(), 30u);
}

TEST(HeadModel, ItdAndShadow) {
  const HeadModel head;
  EXPECT_EQ(WoodworthItd(head, 0.0, 343.0), 0.0);
  EXPECT_NEAR(WoodworthItd(head, kPi / 2, 343.0), 0.09 / 343.0 * (kPi / 2 + 1.0), 1e-15);
  EXPECT_DOUBLE_EQ(ShadowFactor(head, 0.0, 7), 1.0);
  EXPECT_NEAR(ShadowFactor(head, kPi / 2, 7), 0.01, 1e-12);
  EXPECT_GT(ShadowFactor(head, kPi / 2, 0), ShadowFactor(head, kPi / 2, 7));
  EXPECT_NEAR(LateralAngle({0, -1, 0}), kPi / 2, 1e-12);
  EXPECT_NEAR(LateralAngle({1, 0, 0}), 0.0, 1e-12);
}

TEST(Trace, FullyAbsorptiveKeepsOnlyDirect) {
  const AcousticScene scene(UniformMaterials(Shoebox({5, 4, 3}), 1.0, 0.3));
  const Vec3 s(1, 1, 1.5), l(3.5, 2.5, 1.5);
  const auto hist = Trace(scene, s, l, FastConfig(4000, 0.1), HeadModel{}, 1);
  EXPECT_EQ(hist.ReflectedTotal(), 0.0);
  ASSERT_EQ(hist.direct[0].size(), 1u);
  ASSERT_EQ(hist.direct[1].size(), 1u);
  const double d = (s - l).norm();
  EXPECT_NEAR(hist.direct_energy[3], 1.0 / (4 * kPi * d * d), 1e-15);
}

TEST(Trace, DirectArrivalTime) {
  const AcousticScene scene(UniformMaterials(Shoebox({6, 4, 3}), 0.5, 0.3));
  // 3.43 m apart, source ahead and to the left of the listener.
  const Vec3 l(1, 1.5, 1.5);
  const Vec3 s = l + 3.43 * Vec3(std::cos(0.4), std::sin(0.4), 0.0);
  const SimConfig cfg = FastConfig(500, 0.05);
  const auto hist = Trace(scene, s, l, cfg, HeadModel{}, 2);
  EXPECT_NEAR(hist.direct_time, 0.01, 1e-12);
  for (int ear = 0; ear < 2; ++ear) {
    const auto bin = static_cast<long>(hist.direct[ear][0].time / cfg.histogram_bin);
    EXPECT_LE(std::abs(bin - 10), 1);
  }
  const double itd = WoodworthItd(HeadModel{}, LateralAngle((s - l).normalized()), cfg.speed_of_sound);
  EXPECT_NEAR(hist.direct[0][0].time - hist.direct[1][0].time, itd, 1e-15);
  EXPECT_LT(itd, 0.0);  // left ear leads for a source on the left
}

TEST(Trace, FirstOrderReflectionsMatchImageSources) {
  const Vec3 room(5, 4, 3);
  const AcousticScene scene(UniformMaterials(Shoebox(room), 0.5, 0.0));
  const Vec3 s(1.2, 1.1, 1.3), l(3.6, 2.7, 1.6);
  SimConfig cfg = FastConfig(40000, 0.04);
  const auto hist = Trace(scene, s, l, cfg, HeadModel{}, 3);
  std::vector<double> images;
  for (int axis = 0; axis < 3; ++axis) {
    for (double wall : {0.0, room[axis]}) {
      Vec3 img = s;
      img[axis] = 2 * wall - s[axis];
      images.push_back((img - l).norm() / cfg.speed_of_sound);
    }
  }
  const auto energy_near = [&](double t) {
    const auto bin = static_cast<long>(t / cfg.histogram_bin);
    double e = 0.0;
    for (long b = std::max(0L, bin - 1); b <= bin + 1; ++b) {
      for (int ear = 0; ear < 2; ++ear) e += BinSum(hist.ears[ear][static_cast<std::size_t>(b)]);
    }
    return e;
  };
  for (double t : images) EXPECT_GT(energy_near(t), 0.0) << "image at " << t;
  const double first = *std::min_element(images.begin(), images.end());
  const auto first_bin = static_cast<long>(first / cfg.histogram_bin);
  for (long b = 0; b < first_bin - 1; ++b) {
    for (int ear = 0; ear < 2; ++ear) EXPECT_EQ(BinSum(hist.ears[ear][static_cast<std::size_t>(b)]), 0.0) << b;
  }
}

TEST(Trace, DepositedEnergyBoundedByEmission) {
  const SimConfig cfg = FastConfig(3000, 0.5);
  const double area = kPi * cfg.detector_radius * cfg.detector_radius;
  for (double alpha : {0.05, 0.3}) {
    const AcousticScene scene(UniformMaterials(Shoebox({4, 3, 2.5}), alpha, 0.5));
    const auto hist = Trace(scene, {1, 1, 1}, {3, 2, 1.2}, cfg, HeadModel{}, 4);
    for (int b = 0; b < kBandCount; ++b) {
      const double reflected = (hist.received[b] - hist.direct_energy[b]) * area;
      EXPECT_GE(reflected, 0.0);
      EXPECT_LE(reflected, 1.0);
    }
    for (int ear = 0; ear < 2; ++ear) {
      for (const auto& bin : hist.ears[ear]) {
        for (double v : bin) ASSERT_GE(v, 0.0);
      }
    }
  }
}

TEST(Trace, RaisingAbsorptionNeverAddsEnergy) {
  auto low = UniformMaterials(Shoebox({4, 3, 2.5}), 0.2, 0.0);
  auto high = low;
  for (std::size_t f = 0; f < high.faces.size(); f += 3) {
    for (int b = 0; b < kBandCount; b += 2) high.band_absorption[f][b] = 0.7;
  }
  SimConfig cfg = FastConfig(2000, 0.3);
  cfg.energy_threshold = 0.0;
  const Vec3 s(1, 1, 1), l(3, 2, 1.4);
  const auto a = Trace(AcousticScene(low), s, l, cfg, HeadModel{}, 5);
  const auto b = Trace(AcousticScene(high), s, l, cfg, HeadModel{}, 5);
  for (int band = 0; band < kBandCount; ++band) {
    EXPECT_LE(b.received[band], a.received[band] * (1 + 1e-12)) << band;
  }
  EXPECT_LT(b.received[0], a.received[0]);
}

TEST(Trace, ItdSignAndBound) {
  const AcousticScene scene(UniformMaterials(Shoebox({8, 8, 3}), 0.5, 0.3));
  const Vec3 l(4, 4, 1.5);
  const HeadModel head;
  const SimConfig cfg = FastConfig(64, 0.05);
  const double bound = head.ear_separation * (1 + kPi / 2) / (2 * cfg.speed_of_sound);
  for (double theta = -3.0; theta <= 3.0; theta += 0.5) {
    // Azimuth positive toward the right ear, which points along -y.
    const Vec3 s = l + 2.0 * Vec3(std::cos(theta), -std::sin(theta), 0.0);
    const auto hist = Trace(scene, s, l, cfg, head, 6);
    // Left-minus-right arrival time: positive when the right ear leads.
    const double diff = hist.direct[0][0].time - hist.direct[1][0].time;
    if (std::abs(std::sin(theta)) > 1e-9) {
      EXPECT_EQ(diff > 0, std::sin(theta) > 0) << theta;
    }
    EXPECT_LE(std::abs(diff), bound + 1e-15);
  }
}

TEST(Trace, DeterministicAcrossThreadCounts) {
  const AcousticScene scene(UniformMaterials(Shoebox({4, 3, 2.5}), 0.2, 0.4));
  SimConfig one = FastConfig(3000, 0.2);
  SimConfig four = one;
  four.threads = 4;
  const auto a = Trace(scene, {1, 1, 1}, {3, 2, 1.2}, one, HeadModel{}, 7);
  const auto b = Trace(scene, {1, 1, 1}, {3, 2, 1.2}, four, HeadModel{}, 7);
  const auto c = Trace(scene, {1, 1, 1}, {3, 2, 1.2}, one, HeadModel{}, 8);
  EXPECT_EQ(a.ears[0], b.ears[0]);
  EXPECT_EQ(a.ears[1], b.ears[1]);
  EXPECT_EQ(a.received, b.received);
  EXPECT_NE(a.ears[0], c.ears[0]);
}

TEST(Trace, RejectsBadPositions) {
  const AcousticScene scene(UniformMaterials(Shoebox({4, 3, 2.5}), 0.2, 0.4));
  const SimConfig cfg = FastConfig(10, 0.05);
  EXPECT_THROW(Trace(scene, {9, 1, 1}, {2, 2, 1}, cfg, HeadModel{}, 0), Error);
  EXPECT_THROW(Trace(scene, {1, 1, 1}, {1, 1, 1}, cfg, HeadModel{}, 0), Error);
}

TEST(SynthesizeBir, SingleBinEnergy) {
  const SimConfig cfg = FastConfig(1, 0.1);
  for (int band : {1, 4, 7}) {
    EnergyHistogram hist;
    hist.ears[0].assign(100, BandCoefficients{});
    hist.ears[1].assign(100, BandCoefficients{});
    hist.ears[0][20][static_cast<std::size_t>(band)] = 1.0;
    const auto bir = SynthesizeBir(hist, cfg, 9);
    double e = 0.0;
    for (double v : bir.left) e += v * v;
    EXPECT_NEAR(e, 1.0, 0.05) << band;
    for (double v : bir.right) EXPECT_EQ(v, 0.0);
  }
}

TEST(SynthesizeBir, EmptyHistogramIsSilent) {
  EnergyHistogram hist;
  hist.ears[0].assign(50, BandCoefficients{});
  hist.ears[1].assign(50, BandCoefficients{});
  Warnings w;
  const auto bir = SynthesizeBir(hist, FastConfig(1, 0.05), 1, &w);
  EXPECT_EQ(w.size(), 1u);
  EXPECT_EQ(bir.size(), 2400u);
  for (double v : bir.left) EXPECT_EQ(v, 0.0);
}

TEST(SynthesizeBir, SqrtScaling) {
  const AcousticScene scene(UniformMaterials(Shoebox({4, 3, 2.5}), 0.3, 0.4));
  const SimConfig cfg = FastConfig(1000, 0.2);
  auto hist = Trace(scene, {1, 1, 1}, {3, 2, 1.2}, cfg, HeadModel{}, 10);
  const auto a = SynthesizeBir(hist, cfg, 11);
  for (auto& ear : hist.ears) {
    for (auto& bin : ear) {
      for (auto& v : bin) v *= 2.0;
    }
  }
  for (auto& ear : hist.direct) {
    for (auto& arr : ear) {
      for (auto& v : arr.energy) v *= 2.0;
    }
  }
  const auto b = SynthesizeBir(hist, cfg, 11);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_NEAR(b.left[i], std::sqrt(2.0) * a.left[i], 1e-12 * (1 + std::abs(a.left[i])));
    ASSERT_NEAR(b.right[i], std::sqrt(2.0) * a.right[i], 1e-12 * (1 + std::abs(a.right[i])));
  }
}

TEST(Filterbank, BandsSumToImpulse) {
  const auto fb = MakeOctaveFilterbank(48000, 512);
  for (std::size_t k = 0; k < fb.bands[0].size(); ++k) {
    double s = 0.0;
    for (const auto& b : fb.bands) s += b[k];
    EXPECT_NEAR(s, k == 512 ? 1.0 : 0.0, 1e-12);
  }
}

TEST(SimulatePair, AbsorptiveRoomIsClickPair) {
  const AcousticScene scene(UniformMaterials(Shoebox({5, 4, 3}), 1.0, 0.3));
  const Vec3 s(1, 1, 1.5), l(4, 3, 1.5);
  const SimConfig cfg = FastConfig(2000, 0.2);
  const auto bir = SimulatePair(scene, s, l, cfg, HeadModel{}, 12);
  const double t = (s - l).norm() / cfg.speed_of_sound;
  for (int ear = 0; ear < 2; ++ear) {
    const auto& x = bir.channel(ear);
    double total = 0.0, near = 0.0;
    std::size_t peak = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      total += x[i] * x[i];
      if (std::abs(i / cfg.sample_rate - t) < 0.005) near += x[i] * x[i];
      if (std::abs(x[i]) > std::abs(x[peak])) peak = i;
    }
    EXPECT_GT(near / total, 0.95);
    EXPECT_LT(std::abs(peak / cfg.sample_rate - t), 0.001);
  }
}

TEST(SimulatePair, ReverberantShoeboxFollowsSabine) {
  const Vec3 room(5, 4, 3);
  const double alpha = 0.15;
  const AcousticScene scene(UniformMaterials(Shoebox(room), alpha, 0.4));
  const double volume = room.x() * room.y() * room.z();
  const double surface = 2 * (room.x() * room.y() + room.y() * room.z() + room.x() * room.z());
  const double sabine = 0.161 * volume / (alpha * surface);
  SimConfig cfg = FastConfig(20000, 0.9);
  cfg.threads = 0;
  const auto bir = SimulatePair(scene, {1.3, 1.2, 1.4}, {3.4, 2.9, 1.6}, cfg, HeadModel{}, 13);
  for (int ear = 0; ear < 2; ++ear) {
    EXPECT_NEAR(codec::T60(bir.channel(ear), cfg.sample_rate), sabine, 0.2 * sabine) << ear;
  }
}

TEST(SimulatePair, SwappingPositionsMirrorsItd) {
  const AcousticScene scene(UniformMaterials(Shoebox({6, 6, 3}), 0.4, 0.3));
  const Vec3 a(1.5, 2.0, 1.5), b(4.0, 4.5, 1.5);
  const SimConfig cfg = FastConfig(64, 0.05);
  const auto ab = Trace(scene, a, b, cfg, HeadModel{}, 14);
  const auto ba = Trace(scene, b, a, cfg, HeadModel{}, 14);
  const double itd_ab = ab.direct[0][0].time - ab.direct[1][0].time;
  const double itd_ba = ba.direct[0][0].time - ba.direct[1][0].time;
  EXPECT_NE(itd_ab, 0.0);
  EXPECT_NEAR(itd_ab, -itd_ba, 1e-15);
}

TEST(GenerateDataset, CountsAndDeterminism) {
  TempDir dir;
  const auto mesh = UniformMaterials(Shoebox({4, 4, 3}), 0.3, 0.3);
  DatasetConfig cfg;
  cfg.sim = FastConfig(100, 0.05);
  cfg.sim.threads = 0;
  const auto m1 = GenerateDataset(mesh, cfg, dir.file("a"), 42);
  const auto m2 = GenerateDataset(mesh, cfg, dir.file("b"), 42);
  ASSERT_EQ(m1.at("pairs").size(), 81u);
  std::size_t wavs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.file("a"))) wavs += e.path().extension() == ".wav";
  EXPECT_EQ(wavs, 81u);
  EXPECT_EQ(m1.dump(), m2.dump());
  EXPECT_EQ(ReadJsonFile(dir.file("a/manifest.json")).dump(), m1.dump());
  for (const auto& p : m1.at("pairs")) {
    const auto name = p.at("wav").get<std::string>();
    ASSERT_EQ(FileBytes(dir.file("a/" + name)), FileBytes(dir.file("b/" + name))) << name;
  }
  const auto bir = ReadBirWav(dir.file("a/pair_00000.wav"));
  EXPECT_EQ(bir.sample_rate, 48000);
  DatasetConfig other = cfg;
  other.sim.n_rays = 101;
  EXPECT_NE(HashJson(DatasetConfigToJson(other)), m1.at("config_hash").get<std::string>());
}

}  // namespace
}  // namespace binscene::raytracer

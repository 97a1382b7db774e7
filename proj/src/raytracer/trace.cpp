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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binscene/core/error.hpp"
#include "binscene/core/parallel.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/raytracer/raytracer.hpp"

namespace binscene::raytracer {

namespace {

constexpr int kChunkRays = 256;
constexpr int kChunksPerWave = 8;

double BandSum(const BandCoefficients& e) {
  double s = 0.0;
  for (double v : e) s += v;
  return s;
}

Vec3 UniformSphere(Rng& rng) {
  const double z = 2.0 * Uniform01(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * Uniform01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// Cosine-weighted direction about unit normal n.
Vec3 CosineHemisphere(const Vec3& n, double r1, double r2) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t = n.cross(helper).normalized();
  const Vec3 b = n.cross(t);
  const double phi = 2.0 * std::numbers::pi * r1;
  const double s = std::sqrt(r2);
  return (t * (s * std::cos(phi)) + b * (s * std::sin(phi)) + n * std::sqrt(1.0 - r2)).normalized();
}

struct Accum {
  std::vector<BandCoefficients> ears[2];
  BandCoefficients received{};

  explicit Accum(std::size_t bins) {
    ears[0].assign(bins, BandCoefficients{});
    ears[1].assign(bins, BandCoefficients{});
  }
  void Clear() {
    for (auto& ear : ears) std::fill(ear.begin(), ear.end(), BandCoefficients{});
    received.fill(0.0);
  }
};

struct Binaural {
  double delay[2];
  BandCoefficients gain[2];
};

Binaural Binauralize(const HeadModel& head, const Vec3& toward_source, double c) {
  Binaural out;
  const double lateral = LateralAngle(toward_source);
  const double itd = WoodworthItd(head, lateral, c);
  out.delay[0] = 0.5 * itd;
  out.delay[1] = -0.5 * itd;
  const int shadowed = lateral > 0.0 ? 0 : 1;
  for (int ear = 0; ear < 2; ++ear) {
    for (int b = 0; b < kBandCount; ++b) {
      out.gain[ear][static_cast<std::size_t>(b)] =
          ear == shadowed && lateral != 0.0 ? ShadowFactor(head, lateral, b) : 1.0;
    }
  }
  return out;
}

BandCoefficients AirFactor(const SimConfig& cfg, double length) {
  BandCoefficients f;
  f.fill(1.0);
  if (!cfg.air_absorption) return f;
  for (int b = 0; b < kBandCount; ++b) {
    f[static_cast<std::size_t>(b)] = std::pow(10.0, -cfg.air_db_per_m[static_cast<std::size_t>(b)] * length / 10.0);
  }
  return f;
}

class RayTracer {
 public:
  RayTracer(const AcousticScene& scene, const Vec3& source, const Vec3& listener,
            const SimConfig& cfg, const HeadModel& head)
      : scene_(scene), source_(source), listener_(listener), cfg_(cfg), head_(head) {
    e0_ = 1.0 / cfg.n_rays;
    eps_ = 1e-7 * scene.bvh().scale();
    r2_ = cfg.detector_radius * cfg.detector_radius;
    area_ = std::numbers::pi * r2_;
    max_path_ = (cfg.duration + head.ear_separation / cfg.speed_of_sound) * cfg.speed_of_sound;
  }

  void Run(int ray, std::uint64_t seed, Accum& acc) const {
    Rng rng(MixSeed(seed, static_cast<std::uint64_t>(ray)));
    Vec3 pos = source_;
    Vec3 dir = UniformSphere(rng);
    BandCoefficients energy;
    energy.fill(e0_);
    double path = 0.0;
    for (int depth = 0;; ++depth) {
      const auto hit = scene_.bvh().Intersect(pos, dir, eps_, std::numeric_limits<double>::infinity());
      if (!hit) return;  // escaped through a hole
      // Unreflected paths are covered by the analytic direct sound.
      if (depth > 0) Detect(pos, dir, hit->t, path, energy, acc);
      path += hit->t;
      if (path > max_path_) return;
      if (cfg_.air_absorption) {
        const auto air = AirFactor(cfg_, hit->t);
        for (int b = 0; b < kBandCount; ++b) energy[static_cast<std::size_t>(b)] *= air[static_cast<std::size_t>(b)];
      }
      const auto& alpha = scene_.absorption(hit->face);
      bool alive = false;
      for (int b = 0; b < kBandCount; ++b) {
        auto& e = energy[static_cast<std::size_t>(b)];
        e *= 1.0 - alpha[static_cast<std::size_t>(b)];
        if (e > 0.0 && e >= cfg_.energy_threshold * e0_) alive = true;
      }
      if (!alive || depth + 1 >= cfg_.max_depth) return;

      Vec3 n = hit->normal;
      if (n.dot(dir) > 0.0) n = -n;
      const Vec3 point = pos + hit->t * dir;
      // Three draws per bounce whatever the branch, so paths never depend
      // on energies.
      const double u = Uniform01(rng);
      const double r1 = Uniform01(rng);
      const double r2 = Uniform01(rng);
      if (u < scene_.scattering(hit->face)) {
        dir = CosineHemisphere(n, r1, r2);
      } else {
        dir = (dir - 2.0 * dir.dot(n) * n).normalized();
      }
      pos = point + eps_ * n;
    }
  }

 private:
  void Detect(const Vec3& pos, const Vec3& dir, double seg, double path,
              const BandCoefficients& energy, Accum& acc) const {
    const Vec3 oc = pos - listener_;
    const double b = oc.dot(dir);
    const double disc = b * b - (oc.squaredNorm() - r2_);
    if (disc <= 0.0) return;
    const double entry = -b - std::sqrt(disc);
    // Count entries only, so a ray reflecting inside the sphere is not
    // counted twice.
    if (entry < 0.0 || entry >= seg) return;
    const double closest = std::clamp(-b, 0.0, seg);
    const double time = (path + closest) / cfg_.speed_of_sound;
    BandCoefficients e = energy;
    const auto air = AirFactor(cfg_, closest);
    for (int k = 0; k < kBandCount; ++k) {
      auto& v = e[static_cast<std::size_t>(k)];
      v *= air[static_cast<std::size_t>(k)] / area_;
      acc.received[static_cast<std::size_t>(k)] += v;
    }
    const Binaural bin = Binauralize(head_, -dir, cfg_.speed_of_sound);
    for (int ear = 0; ear < 2; ++ear) {
      const double t = time + bin.delay[ear];
      if (t < 0.0) continue;
      const auto idx = static_cast<std::size_t>(t / cfg_.histogram_bin);
      if (idx >= acc.ears[ear].size()) continue;
      for (int k = 0; k < kBandCount; ++k) {
        acc.ears[ear][idx][static_cast<std::size_t>(k)] +=
            e[static_cast<std::size_t>(k)] * bin.gain[ear][static_cast<std::size_t>(k)];
      }
    }
  }

  const AcousticScene& scene_;
  Vec3 source_, listener_;
  const SimConfig& cfg_;
  const HeadModel& head_;
  double e0_, eps_, r2_, area_, max_path_;
};

}  // namespace

void ValidateSimConfig(const SimConfig& cfg) {
  if (cfg.n_rays <= 0 || cfg.max_depth <= 0) ThrowInvalidInput("ray count and depth must be positive");
  if (!(cfg.energy_threshold >= 0.0 && cfg.energy_threshold < 1.0)) {
    ThrowInvalidInput("energy threshold must lie in [0, 1)");
  }
  for (double v : {cfg.speed_of_sound, cfg.sample_rate, cfg.histogram_bin, cfg.detector_radius,
                   cfg.duration}) {
    if (!(v > 0.0) || !std::isfinite(v)) ThrowInvalidInput("simulation parameters must be positive");
  }
  if (cfg.histogram_bin > cfg.duration) ThrowInvalidInput("histogram bin longer than duration");
}

nlohmann::json SimConfigToJson(const SimConfig& cfg) {
  return {{"n_rays", cfg.n_rays},
          {"max_depth", cfg.max_depth},
          {"energy_threshold", cfg.energy_threshold},
          {"speed_of_sound", cfg.speed_of_sound},
          {"sample_rate", cfg.sample_rate},
          {"histogram_bin", cfg.histogram_bin},
          {"detector_radius", cfg.detector_radius},
          {"duration", cfg.duration},
          {"air_absorption", cfg.air_absorption},
          {"air_db_per_m", cfg.air_db_per_m}};
}

SimConfig SimConfigFromJson(const nlohmann::json& j, SimConfig c) {
  c.n_rays = j.value("n_rays", c.n_rays);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.energy_threshold = j.value("energy_threshold", c.energy_threshold);
  c.speed_of_sound = j.value("speed_of_sound", c.speed_of_sound);
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.histogram_bin = j.value("histogram_bin", c.histogram_bin);
  c.detector_radius = j.value("detector_radius", c.detector_radius);
  c.duration = j.value("duration", c.duration);
  c.air_absorption = j.value("air_absorption", c.air_absorption);
  c.air_db_per_m = j.value("air_db_per_m", c.air_db_per_m);
  ValidateSimConfig(c);
  return c;
}

double EnergyHistogram::ReflectedTotal() const {
  double total = 0.0;
  for (const auto& ear : ears) {
    for (const auto& bin : ear) total += BandSum(bin);
  }
  return total;
}

bool EnergyHistogram::Empty() const {
  if (!direct[0].empty() || !direct[1].empty()) return false;
  return ReflectedTotal() == 0.0;
}

AcousticScene::AcousticScene(const materials::MaterialAnnotatedMesh& mesh) {
  materials::ValidateMaterialMesh(mesh);
  bvh_ = std::make_unique<Bvh>(mesh.vertices, mesh.faces);
  absorption_ = mesh.band_absorption;
  scattering_.resize(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    double s = 0.0;
    for (auto v : mesh.faces[f]) s += mesh.scattering[static_cast<std::size_t>(v)];
    scattering_[f] = s / 3.0;
  }
}

EnergyHistogram Trace(const AcousticScene& scene, const Vec3& source, const Vec3& listener,
                      const SimConfig& cfg, const HeadModel& head, std::uint64_t seed) {
  ValidateSimConfig(cfg);
  ValidateHeadModel(head);
  if (!source.allFinite() || !listener.allFinite()) ThrowInvalidInput("non-finite position");
  if ((source - listener).norm() < 1e-9) ThrowInvalidInput("source and listener coincide");
  if (!scene.bvh().Contains(source)) ThrowInvalidInput("source outside mesh");
  if (!scene.bvh().Contains(listener)) ThrowInvalidInput("listener outside mesh");

  EnergyHistogram hist;
  hist.bin_width = cfg.histogram_bin;
  const auto bins = static_cast<std::size_t>(std::ceil(cfg.duration / cfg.histogram_bin - 1e-9));
  hist.ears[0].assign(bins, BandCoefficients{});
  hist.ears[1].assign(bins, BandCoefficients{});

  const double eps = 1e-7 * scene.bvh().scale();
  if (!scene.bvh().Occluded(source, listener, eps)) {
    const double d = (source - listener).norm();
    hist.has_direct = true;
    hist.direct_time = d / cfg.speed_of_sound;
    const auto air = AirFactor(cfg, d);
    for (int b = 0; b < kBandCount; ++b) {
      hist.direct_energy[static_cast<std::size_t>(b)] =
          air[static_cast<std::size_t>(b)] / (4.0 * std::numbers::pi * d * d);
    }
    hist.received = hist.direct_energy;
    const Binaural bin = Binauralize(head, (source - listener) / d, cfg.speed_of_sound);
    for (int ear = 0; ear < 2; ++ear) {
      EarArrival a;
      a.time = hist.direct_time + bin.delay[ear];
      for (int b = 0; b < kBandCount; ++b) {
        a.energy[static_cast<std::size_t>(b)] =
            hist.direct_energy[static_cast<std::size_t>(b)] * bin.gain[ear][static_cast<std::size_t>(b)];
      }
      hist.direct[ear].push_back(a);
    }
  }

  const RayTracer tracer(scene, source, listener, cfg, head);
  const int chunks = (cfg.n_rays + kChunkRays - 1) / kChunkRays;
  std::vector<Accum> wave(static_cast<std::size_t>(kChunksPerWave), Accum(bins));
  for (int first = 0; first < chunks; first += kChunksPerWave) {
    const int count = std::min(kChunksPerWave, chunks - first);
    ParallelFor(static_cast<std::size_t>(count), cfg.threads, [&](std::size_t w) {
      Accum& acc = wave[w];
      acc.Clear();
      const int chunk = first + static_cast<int>(w);
      const int end = std::min(cfg.n_rays, (chunk + 1) * kChunkRays);
      for (int ray = chunk * kChunkRays; ray < end; ++ray) tracer.Run(ray, seed, acc);
    });
    // Fixed reduction order keeps results independent of the thread count.
    for (int w = 0; w < count; ++w) {
      const Accum& acc = wave[static_cast<std::size_t>(w)];
      for (int ear = 0; ear < 2; ++ear) {
        for (std::size_t i = 0; i < bins; ++i) {
          for (int b = 0; b < kBandCount; ++b) {
            hist.ears[ear][i][static_cast<std::size_t>(b)] += acc.ears[ear][i][static_cast<std::size_t>(b)];
          }
        }
      }
      for (int b = 0; b < kBandCount; ++b) {
        hist.received[static_cast<std::size_t>(b)] += acc.received[static_cast<std::size_t>(b)];
      }
    }
  }
  return hist;
}

}  // namespace binscene::raytracer

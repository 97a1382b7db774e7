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
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "binscene/core/bir.hpp"
#include "binscene/core/log.hpp"
#include "binscene/materials/materials.hpp"
#include "binscene/raytracer/bvh.hpp"

namespace binscene::raytracer {

using materials::BandCoefficients;
using materials::kBandCount;

struct SimConfig {
  int n_rays = 20000;
  int max_depth = 2000;
  double energy_threshold = 1e-6;  // fraction of the emitted per-ray energy
  double speed_of_sound = 343.0;
  double sample_rate = 48000.0;
  double histogram_bin = 0.001;
  double detector_radius = 0.25;
  double duration = 1.0;  // histogram and BIR length in seconds
  bool air_absorption = false;
  BandCoefficients air_db_per_m = {0.0001, 0.0003, 0.001, 0.002, 0.004, 0.01, 0.03, 0.1};
  int threads = 0;  // 0 = all cores; results do not depend on it
};

void ValidateSimConfig(const SimConfig& cfg);
nlohmann::json SimConfigToJson(const SimConfig& cfg);
SimConfig SimConfigFromJson(const nlohmann::json& j, SimConfig base = {});

// Spherical head facing +x with +z up; the right ear points along -y.
// Azimuth is positive toward the right ear.
struct HeadModel {
  double ear_separation = 0.18;
  double ild_max_db = 20.0;  // contralateral shadow at 8 kHz, fully lateral
};

void ValidateHeadModel(const HeadModel& head);

// Signed lateral angle in [-pi/2, pi/2] of a unit direction toward the
// source; positive on the right.
double LateralAngle(const Vec3& toward_source);
// Woodworth: (a / c)(theta + sin theta). Positive when the right ear leads.
double WoodworthItd(const HeadModel& head, double lateral, double speed_of_sound);
// Energy factor for the shadowed ear in one band.
double ShadowFactor(const HeadModel& head, double lateral, int band);

struct EarArrival {
  double time = 0.0;
  BandCoefficients energy{};
};

// Per-ear energies in 1 ms bins plus the direct sound, which is kept as an
// exact arrival so sub-bin ITD survives synthesis.
struct EnergyHistogram {
  double bin_width = 0.001;
  std::vector<BandCoefficients> ears[2];
  std::vector<EarArrival> direct[2];
  // Before binauralization: analytic direct sound and the detector total.
  bool has_direct = false;
  double direct_time = 0.0;
  BandCoefficients direct_energy{};
  BandCoefficients received{};  // direct + reflected, per band

  std::size_t bins() const { return ears[0].size(); }
  // Reflected energy only, summed over ears, bins and bands.
  double ReflectedTotal() const;
  bool Empty() const;
};

// BVH plus per-face acoustic data, built once per scene.
class AcousticScene {
 public:
  explicit AcousticScene(const materials::MaterialAnnotatedMesh& mesh);

  const Bvh& bvh() const { return *bvh_; }
  const BandCoefficients& absorption(std::int32_t face) const {
    return absorption_[static_cast<std::size_t>(face)];
  }
  double scattering(std::int32_t face) const { return scattering_[static_cast<std::size_t>(face)]; }

 private:
  std::unique_ptr<Bvh> bvh_;
  std::vector<BandCoefficients> absorption_;
  std::vector<double> scattering_;
};

// Grid anchored at the AABB minimum; keeps points inside the mesh whose
// surface distance is at least `clearance` (inclusive, 1e-9 tolerance).
std::vector<Vec3> GridPositions(const geometry::AnnotatedMesh& mesh, double spacing,
                                double clearance);

struct SourceListenerSplit {
  std::vector<Vec3> sources;
  std::vector<Vec3> listeners;
};

SourceListenerSplit SplitSourcesListeners(const std::vector<Vec3>& positions, int n_sources,
                                          std::uint64_t seed);

EnergyHistogram Trace(const AcousticScene& scene, const Vec3& source, const Vec3& listener,
                      const SimConfig& cfg, const HeadModel& head, std::uint64_t seed);

// Linear-phase octave filterbank whose bands sum to a centred unit impulse.
struct Filterbank {
  int half_length = 0;
  std::vector<std::vector<double>> bands;  // kBandCount filters, 2 * half + 1 taps
};

Filterbank MakeOctaveFilterbank(double sample_rate, int half_length = 2048);

Bir SynthesizeBir(const EnergyHistogram& hist, const SimConfig& cfg, std::uint64_t seed,
                  Warnings* warnings = nullptr);

Bir SimulatePair(const AcousticScene& scene, const Vec3& source, const Vec3& listener,
                 const SimConfig& cfg, const HeadModel& head, std::uint64_t seed,
                 Warnings* warnings = nullptr);

}  // namespace binscene::raytracer

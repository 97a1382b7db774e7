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

#include "binscene/core/error.hpp"
#include "binscene/raytracer/raytracer.hpp"

namespace binscene::raytracer {

void ValidateHeadModel(const HeadModel& head) {
  if (!(head.ear_separation > 0.0) || !std::isfinite(head.ear_separation)) {
    ThrowInvalidInput("ear separation must be positive");
  }
  if (!(head.ild_max_db >= 0.0) || !std::isfinite(head.ild_max_db)) {
    ThrowInvalidInput("ILD maximum must be non-negative");
  }
}

double LateralAngle(const Vec3& toward_source) {
  // The right ear axis is -y.
  return std::asin(std::clamp(-toward_source.y(), -1.0, 1.0));
}

double WoodworthItd(const HeadModel& head, double lateral, double speed_of_sound) {
  const double a = 0.5 * head.ear_separation;
  return a / speed_of_sound * (lateral + std::sin(lateral));
}

double ShadowFactor(const HeadModel& head, double lateral, int band) {
  // Shadowing grows with frequency as sqrt(f / 8 kHz) and with |sin|.
  const double f = materials::kBandCenters[static_cast<std::size_t>(band)];
  const double db = head.ild_max_db * std::sqrt(f / 8000.0) * std::abs(std::sin(lateral));
  return std::pow(10.0, -db / 10.0);
}

}  // namespace binscene::raytracer

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

#include "binscene/render/walkthrough.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "binscene/codec/resample.hpp"
#include "binscene/core/error.hpp"
#include "binscene/core/fft.hpp"

namespace binscene::render {

namespace {

geometry::Vec3 ReadVec3(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) ThrowInvalidInput(std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json WriteVec3(const geometry::Vec3& v) { return {v[0], v[1], v[2]}; }

}  // namespace

WalkthroughSpec WalkthroughSpecFromJson(const nlohmann::json& j, const std::string& base_dir) {
  WalkthroughSpec spec;
  try {
    spec.scene = j.value("scene", "");
    for (const auto& s : j.at("sources")) {
      WalkSource src;
      src.position = ReadVec3(s.at("position"), "source position");
      src.audio = s.at("audio").get<std::string>();
      if (!base_dir.empty() && std::filesystem::path(src.audio).is_relative()) {
        src.audio = (std::filesystem::path(base_dir) / src.audio).string();
      }
      spec.sources.push_back(std::move(src));
    }
    for (const auto& p : j.at("path")) {
      spec.path.push_back({p.at("time").get<double>(), ReadVec3(p.at("position"), "path position")});
    }
    spec.update_rate = j.value("bir_update_rate", spec.update_rate);
    spec.crossfade_ms = j.value("crossfade_ms", spec.crossfade_ms);
  } catch (const nlohmann::json::exception& e) {
    ThrowInvalidInput(std::string("walkthrough spec: ") + e.what());
  }
  ValidateWalkthroughSpec(spec);
  return spec;
}

nlohmann::json WalkthroughSpecToJson(const WalkthroughSpec& spec) {
  nlohmann::json j = {{"scene", spec.scene},
                      {"bir_update_rate", spec.update_rate},
                      {"crossfade_ms", spec.crossfade_ms},
                      {"sources", nlohmann::json::array()},
                      {"path", nlohmann::json::array()}};
  for (const auto& s : spec.sources) j["sources"].push_back({{"position", WriteVec3(s.position)}, {"audio", s.audio}});
  for (const auto& p : spec.path) j["path"].push_back({{"time", p.time}, {"position", WriteVec3(p.position)}});
  return j;
}

void ValidateWalkthroughSpec(const WalkthroughSpec& spec, const std::optional<geometry::Aabb>& bounds) {
  if (spec.sources.empty()) ThrowInvalidInput("walkthrough: no sources");
  if (spec.path.empty()) ThrowInvalidInput("walkthrough: empty listener path");
  if (!(spec.update_rate > 0.0) || !std::isfinite(spec.update_rate)) {
    ThrowInvalidInput("walkthrough: update rate must be positive");
  }
  if (!(spec.crossfade_ms >= 0.0) || !std::isfinite(spec.crossfade_ms)) {
    ThrowInvalidInput("walkthrough: crossfade must be non-negative");
  }
  if (spec.crossfade_ms > 1000.0 / spec.update_rate + 1e-9) {
    ThrowInvalidInput("walkthrough: crossfade longer than the update period");
  }
  for (std::size_t i = 0; i < spec.path.size(); ++i) {
    if (!std::isfinite(spec.path[i].time) || !spec.path[i].position.allFinite()) {
      ThrowInvalidInput("walkthrough: non-finite path point");
    }
    if (i > 0 && !(spec.path[i].time > spec.path[i - 1].time)) {
      ThrowInvalidInput("walkthrough: path timestamps must be strictly increasing");
    }
  }
  if (!bounds) return;
  for (const auto& p : spec.path) {
    if (!bounds->Contains(p.position, 1e-9)) ThrowInvalidInput("walkthrough: listener path leaves the scene bounds");
  }
  for (const auto& s : spec.sources) {
    if (!bounds->Contains(s.position, 1e-9)) ThrowInvalidInput("walkthrough: source outside the scene bounds");
  }
}

geometry::Vec3 PathPosition(const std::vector<PathPoint>& path, double time) {
  if (path.empty()) ThrowInvalidInput("walkthrough: empty listener path");
  if (time <= path.front().time) return path.front().position;
  if (time >= path.back().time) return path.back().position;
  const auto it = std::upper_bound(path.begin(), path.end(), time,
                                   [](double t, const PathPoint& p) { return t < p.time; });
  const PathPoint& b = *it;
  const PathPoint& a = *(it - 1);
  const double u = (time - a.time) / (b.time - a.time);
  return a.position + u * (b.position - a.position);
}

namespace {

// 0 before the boundary ramp, 1 after it.
double Rise(double d, double crossfade) {
  if (crossfade <= 0.0) return d >= 0.0 ? 1.0 : 0.0;
  return std::clamp((d + 0.5 * crossfade) / crossfade, 0.0, 1.0);
}

}  // namespace

double FrameWeight(long k, long frames, double n, double period, double crossfade) {
  const double in = k == 0 ? 1.0 : Rise(n - static_cast<double>(k) * period, crossfade);
  const double out = k + 1 >= frames ? 0.0 : Rise(n - static_cast<double>(k + 1) * period, crossfade);
  return in - out;
}

RenderResult RenderWalkthrough(const WalkthroughSpec& spec, const std::vector<std::vector<double>>& dry,
                               double dry_rate, const BirProvider& provider, const RenderOptions& options) {
  ValidateWalkthroughSpec(spec, options.bounds);
  if (dry.size() != spec.sources.size()) ThrowInvalidInput("walkthrough: one dry signal per source required");
  if (!(dry_rate > 0.0)) ThrowInvalidInput("walkthrough: dry sample rate must be positive");
  if (!provider) ThrowInvalidInput("walkthrough: no BIR provider");
  for (const auto& d : dry) {
    if (d.empty()) ThrowInvalidInput("walkthrough: empty dry signal");
  }

  RenderResult result;
  double rate = 0.0;
  for (std::size_t s = 0; s < spec.sources.size(); ++s) {
    std::vector<double> x = dry[s];
    const double period_s = 1.0 / spec.update_rate;
    // The output rate is fixed by the first BIR; later BIRs must agree.
    auto fetch = [&](const geometry::Vec3& lst) {
      Bir bir = provider(spec.sources[s].position, lst);
      ValidateBir(bir);
      if (bir.size() == 0) ThrowInvalidInput("walkthrough: provider returned an empty BIR");
      if (rate == 0.0) rate = bir.sample_rate;
      if (bir.sample_rate != rate) ThrowInvalidInput("walkthrough: BIR sample rates differ");
      return bir;
    };
    Bir first = fetch(PathPosition(spec.path, spec.path.front().time));
    if (dry_rate != rate) x = codec::ResampleRate(x, dry_rate, rate);
    const double period = period_s * rate;
    const double crossfade = spec.crossfade_ms * 1e-3 * rate;
    const long frames = std::max(1L, static_cast<long>(std::ceil(static_cast<double>(x.size()) / period)));

    for (long k = 0; k < frames; ++k) {
      const double t = spec.path.front().time + static_cast<double>(k) * period_s;
      const Bir bir = k == 0 ? first : fetch(PathPosition(spec.path, t));
      const double lo = k == 0 ? 0.0 : static_cast<double>(k) * period - 0.5 * crossfade;
      const double hi = k + 1 >= frames ? static_cast<double>(x.size())
                                        : static_cast<double>(k + 1) * period + 0.5 * crossfade;
      const auto begin = static_cast<std::size_t>(std::max(0.0, std::floor(lo)));
      const auto end = std::min(x.size(), static_cast<std::size_t>(std::ceil(hi)) + 1);
      if (begin >= end) continue;
      std::vector<double> slice(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        slice[i - begin] = x[i] * FrameWeight(k, frames, static_cast<double>(i), period, crossfade);
      }
      const std::size_t need = end + bir.size() - 1;
      if (result.audio.left.size() < need) {
        result.audio.left.resize(need, 0.0);
        result.audio.right.resize(need, 0.0);
      }
      for (int ear = 0; ear < 2; ++ear) {
        const auto y = FftConvolve(slice, bir.channel(ear));
        auto& out = ear == 0 ? result.audio.left : result.audio.right;
        for (std::size_t i = 0; i < y.size(); ++i) out[begin + i] += y[i];
      }
    }
  }
  result.audio.sample_rate = rate;

  double peak = 0.0;
  for (const auto* ch : {&result.audio.left, &result.audio.right}) {
    for (double v : *ch) {
      if (!std::isfinite(v)) ThrowNumerical("walkthrough: non-finite output sample");
      peak = std::max(peak, std::abs(v));
    }
  }
  if (options.normalize_on_clip && peak > 1.0) {
    result.gain = std::pow(10.0, -1.0 / 20.0) / peak;
    result.normalized = true;
    for (auto* ch : {&result.audio.left, &result.audio.right}) {
      for (double& v : *ch) v *= result.gain;
    }
  }
  return result;
}

}  // namespace binscene::render

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
#include <map>
#include <random>

#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"
#include "binscene/core/rng.hpp"
#include "binscene/geometry/mesh_io.hpp"
#include "binscene/materials/materials.hpp"

namespace binscene::materials {

BandAverageMode ParseBandAverageMode(const std::string& name) {
  if (name == "mid") return BandAverageMode::kMid;
  if (name == "full") return BandAverageMode::kFull;
  throw Error(ErrorKind::kUsage, "unknown band averaging mode '" + name + "'");
}

double BandAverage(const BandCoefficients& absorption, BandAverageMode mode) {
  if (mode == BandAverageMode::kMid) return 0.5 * (absorption[3] + absorption[4]);
  double sum = 0.0;
  for (double a : absorption) sum += a;
  return sum / kBandCount;
}

void ValidatePrior(const ScatteringPrior& prior) {
  if (!(prior.stddev >= 0.0) || !std::isfinite(prior.mean)) {
    ThrowInvalidInput("scattering prior needs finite mean and stddev >= 0");
  }
  if (!(prior.clamp_lo >= 0.0 && prior.clamp_hi <= 1.0 && prior.clamp_lo < prior.clamp_hi)) {
    ThrowInvalidInput("scattering clamp must satisfy 0 <= lo < hi <= 1");
  }
}

double SampleScattering(const ScatteringPrior& prior, std::uint64_t seed) {
  ValidatePrior(prior);
  double draw = prior.mean;
  if (prior.stddev > 0.0) {
    Rng rng(MixSeed(seed, 0x5CA7));
    std::normal_distribution<double> normal(prior.mean, prior.stddev);
    draw = normal(rng);
  }
  return std::clamp(draw, prior.clamp_lo, prior.clamp_hi);
}

MaterialAnnotatedMesh AssignMaterials(const geometry::AnnotatedMesh& mesh,
                                      const MaterialDatabase& db,
                                      const AssignOptions& options, Warnings* warnings) {
  geometry::ValidateMesh(mesh);
  if (db.entries.empty()) ThrowInvalidInput("material database is empty");
  MaterialAnnotatedMesh out;
  static_cast<geometry::FaceLabeledMesh&>(out) = geometry::VertexToFaceLabels(mesh);

  std::vector<MaterialEntry> per_label;
  per_label.reserve(mesh.label_names.size());
  for (const auto& name : mesh.label_names) {
    auto hit = ResolveLabel(name, db, options.strategy);
    if (!hit) {
      Warn(warnings, "no material matches label '" + name + "'; using default material");
      hit = DefaultMaterial();
    }
    per_label.push_back(*hit);
  }

  out.scene_scattering = SampleScattering(options.prior, options.seed);
  out.absorption.resize(mesh.vertices.size());
  out.scattering.assign(mesh.vertices.size(), out.scene_scattering);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    out.absorption[v] = BandAverage(per_label[mesh.vertex_labels[v]].absorption, options.mode);
  }
  out.band_absorption.resize(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    out.band_absorption[f] = per_label[out.face_labels[f]].absorption;
  }
  return out;
}

void ValidateMaterialMesh(const MaterialAnnotatedMesh& mesh) {
  geometry::ValidateMesh(mesh);
  const std::size_t nv = mesh.vertices.size();
  if (mesh.absorption.size() != nv || mesh.scattering.size() != nv) {
    ThrowInvalidInput("per-vertex material features have wrong length");
  }
  if (mesh.band_absorption.size() != mesh.faces.size() ||
      mesh.face_labels.size() != mesh.faces.size()) {
    ThrowInvalidInput("per-face material data has wrong length");
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (!(mesh.absorption[v] >= 0.0 && mesh.absorption[v] <= 1.0) ||
        !(mesh.scattering[v] >= 0.0 && mesh.scattering[v] <= 1.0)) {
      ThrowInvalidInput("vertex material feature outside [0, 1]");
    }
  }
  for (const auto& row : mesh.band_absorption) {
    for (double a : row) {
      if (!(a >= 0.0 && a <= 1.0)) ThrowInvalidInput("band absorption outside [0, 1]");
    }
  }
}

void WriteMaterialMesh(const MaterialAnnotatedMesh& mesh, const std::string& ply_path,
                       const std::string& labels_path) {
  ValidateMaterialMesh(mesh);
  geometry::PlyTable table;
  table.vertices = mesh.vertices;
  table.faces = mesh.faces;
  table.vertex_properties["label"].assign(mesh.vertex_labels.begin(),
                                          mesh.vertex_labels.end());
  table.vertex_properties["ab"] = mesh.absorption;
  table.vertex_properties["sc"] = mesh.scattering;
  table.face_properties["label"].assign(mesh.face_labels.begin(), mesh.face_labels.end());
  for (int b = 0; b < kBandCount; ++b) {
    auto& col = table.face_properties["a" + std::to_string(b)];
    for (const auto& row : mesh.band_absorption) col.push_back(row[b]);
  }
  geometry::WritePly(ply_path, table);
  WriteJsonFile(labels_path, nlohmann::json{{"labels", mesh.label_names},
                                            {"scene_scattering", mesh.scene_scattering}});
}

MaterialAnnotatedMesh ReadMaterialMesh(const std::string& ply_path,
                                       const std::string& labels_path) {
  const geometry::PlyTable table = geometry::ReadPly(ply_path);
  const nlohmann::json dict = ReadJsonFile(labels_path);
  MaterialAnnotatedMesh mesh;
  mesh.vertices = table.vertices;
  mesh.faces = table.faces;
  try {
    mesh.label_names = dict.at("labels").get<std::vector<std::string>>();
    mesh.scene_scattering = dict.value("scene_scattering", 0.0);
  } catch (const nlohmann::json::exception& e) {
    ThrowInvalidInput(labels_path + ": " + e.what());
  }
  auto column = [&](const auto& props, const std::string& name) -> const std::vector<double>& {
    const auto it = props.find(name);
    if (it == props.end()) ThrowInvalidInput(ply_path + ": missing property '" + name + "'");
    return it->second;
  };
  for (double v : column(table.vertex_properties, "label")) {
    mesh.vertex_labels.push_back(static_cast<geometry::LabelId>(v));
  }
  mesh.absorption = column(table.vertex_properties, "ab");
  mesh.scattering = column(table.vertex_properties, "sc");
  for (double v : column(table.face_properties, "label")) {
    mesh.face_labels.push_back(static_cast<geometry::LabelId>(v));
  }
  mesh.band_absorption.resize(mesh.faces.size());
  for (int b = 0; b < kBandCount; ++b) {
    const auto& col = column(table.face_properties, "a" + std::to_string(b));
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) mesh.band_absorption[f][b] = col[f];
  }
  ValidateMaterialMesh(mesh);
  return mesh;
}

}  // namespace binscene::materials

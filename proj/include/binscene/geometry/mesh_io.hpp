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

#include <map>
#include <string>
#include <vector>

#include "binscene/geometry/mesh.hpp"

namespace binscene::geometry {

// Generic PLY content: every scalar property becomes a column of doubles.
// Only the face vertex index list is kept among list properties.
struct PlyTable {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::map<std::string, std::vector<double>> vertex_properties;
  std::map<std::string, std::vector<double>> face_properties;
};

PlyTable ReadPly(const std::string& path);

// Binary little-endian PLY. x/y/z and extra properties are float64; a
// "label" vertex property, when given, is written as int32.
void WritePly(const std::string& path, const PlyTable& table);

struct RawMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::map<std::string, std::vector<double>> vertex_properties;
};

// OBJ ("v"/"f" records, polygons fan-triangulated) or PLY by extension.
RawMesh ReadMeshFile(const std::string& path);

// Loads mesh + label sidecar, validates, merges vertices within 1e-6 m and
// drops degenerate faces. The sidecar is one of:
//   JSON array with one label (string or integer) per vertex;
//   JSON object {"labels": [names...]} resolving an integer "label" PLY
//     vertex property (the format WriteLabeledMesh produces);
//   CSV "vertex_index,label" rows (a non-numeric first row is a header).
AnnotatedMesh LoadAnnotatedMesh(const std::string& mesh_path,
                                const std::string& labels_path,
                                Warnings* warnings = nullptr);

// Writes <ply_path> with an int "label" vertex property and the label
// dictionary JSON {"labels": [...]} at `labels_path`.
void WriteLabeledMesh(const AnnotatedMesh& mesh, const std::string& ply_path,
                      const std::string& labels_path);

}  // namespace binscene::geometry

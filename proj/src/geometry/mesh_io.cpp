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

#include "binscene/geometry/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"

namespace binscene::geometry {
namespace {

constexpr double kMergeTolerance = 1e-6;

enum class PlyFormat { kAscii, kBinaryLittle, kBinaryBig };

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t TypeSize(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" ||
      t == "float32") {
    return 4;
  }
  if (t == "double" || t == "float64") return 8;
  ThrowInvalidInput("unsupported PLY property type '" + t + "'");
}

class PlyReader {
 public:
  PlyReader(const std::string& bytes, std::size_t at, PlyFormat format)
      : b_(bytes), at_(at), format_(format) {
    if (format_ == PlyFormat::kAscii) {
      ascii_.str(bytes.substr(at));
    }
  }

  double Read(const std::string& type) {
    if (format_ == PlyFormat::kAscii) {
      std::string tok;
      if (!(ascii_ >> tok)) ThrowInvalidInput("PLY: truncated ASCII body");
      try {
        return std::stod(tok);
      } catch (const std::exception&) {
        ThrowInvalidInput("PLY: bad number '" + tok + "'");
      }
    }
    const std::size_t n = TypeSize(type);
    if (at_ + n > b_.size()) ThrowInvalidInput("PLY: truncated binary body");
    unsigned char raw[8];
    std::memcpy(raw, b_.data() + at_, n);
    at_ += n;
    const bool swap = (format_ == PlyFormat::kBinaryBig) ==
                      (std::endian::native == std::endian::little);
    if (swap) std::reverse(raw, raw + n);
    if (type == "char" || type == "int8") return static_cast<std::int8_t>(raw[0]);
    if (type == "uchar" || type == "uint8") return raw[0];
    if (type == "short" || type == "int16") {
      std::int16_t v;
      std::memcpy(&v, raw, 2);
      return v;
    }
    if (type == "ushort" || type == "uint16") {
      std::uint16_t v;
      std::memcpy(&v, raw, 2);
      return v;
    }
    if (type == "int" || type == "int32") {
      std::int32_t v;
      std::memcpy(&v, raw, 4);
      return v;
    }
    if (type == "uint" || type == "uint32") {
      std::uint32_t v;
      std::memcpy(&v, raw, 4);
      return v;
    }
    if (type == "float" || type == "float32") {
      float v;
      std::memcpy(&v, raw, 4);
      return v;
    }
    double v;
    std::memcpy(&v, raw, 8);
    return v;
  }

 private:
  const std::string& b_;
  std::size_t at_;
  PlyFormat format_;
  std::istringstream ascii_;
};

void AppendPolygon(const std::vector<std::int64_t>& poly, std::size_t vertex_count,
                   std::vector<Face>& faces) {
  if (poly.size() < 3) ThrowInvalidInput("face with fewer than 3 vertices");
  for (auto i : poly) {
    if (i < 0 || static_cast<std::size_t>(i) >= vertex_count) {
      ThrowInvalidInput("face index out of range");
    }
  }
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    faces.push_back({static_cast<std::int32_t>(poly[0]),
                     static_cast<std::int32_t>(poly[k]),
                     static_cast<std::int32_t>(poly[k + 1])});
  }
}

RawMesh ReadObj(const std::string& path) {
  std::istringstream in(ReadTextFile(path));
  RawMesh mesh;
  std::vector<std::vector<std::int64_t>> polys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) {
        ThrowInvalidInput(path + ":" + std::to_string(line_no) + ": bad vertex");
      }
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::int64_t> poly;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        std::int64_t idx = 0;
        const auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (res.ec != std::errc() || idx == 0) {
          ThrowInvalidInput(path + ":" + std::to_string(line_no) + ": bad face index");
        }
        // OBJ indices are 1-based; negative values count from the end.
        poly.push_back(idx > 0 ? idx - 1
                               : static_cast<std::int64_t>(mesh.vertices.size()) + idx);
      }
      polys.push_back(std::move(poly));
    }
  }
  for (const auto& poly : polys) AppendPolygon(poly, mesh.vertices.size(), mesh.faces);
  return mesh;
}

std::vector<LabelId> ParseLabelsJson(const nlohmann::json& j, const RawMesh& raw,
                                     AnnotatedMesh& mesh, const std::string& path) {
  std::vector<LabelId> labels;
  if (j.is_array()) {
    for (const auto& e : j) {
      if (e.is_string()) {
        labels.push_back(mesh.InternLabel(e.get<std::string>()));
      } else if (e.is_number_integer()) {
        labels.push_back(mesh.InternLabel(std::to_string(e.get<std::int64_t>())));
      } else {
        ThrowInvalidInput(path + ": labels must be strings or integers");
      }
    }
    return labels;
  }
  if (j.is_object() && j.contains("labels")) {
    const auto names = j.at("labels").get<std::vector<std::string>>();
    const auto it = raw.vertex_properties.find("label");
    if (it == raw.vertex_properties.end()) {
      ThrowInvalidInput(path + ": label dictionary needs a 'label' vertex property");
    }
    for (const std::string& n : names) mesh.InternLabel(n);
    for (double v : it->second) {
      const auto id = static_cast<std::int64_t>(v);
      if (id < 0 || static_cast<std::size_t>(id) >= names.size()) {
        ThrowInvalidInput(path + ": label id outside dictionary");
      }
      labels.push_back(mesh.InternLabel(names[static_cast<std::size_t>(id)]));
    }
    return labels;
  }
  ThrowInvalidInput(path + ": unrecognized label sidecar");
}

std::vector<LabelId> ParseLabelsCsv(const std::string& text, AnnotatedMesh& mesh,
                                    std::size_t vertex_count, const std::string& path) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::int64_t, std::string>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) ThrowInvalidInput(path + ": expected index,label");
    const std::string idx_text = line.substr(0, comma);
    std::int64_t idx = 0;
    const auto res =
        std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
    if (res.ec != std::errc()) {
      if (first) {
        first = false;
        continue;  // header row
      }
      ThrowInvalidInput(path + ": bad vertex index '" + idx_text + "'");
    }
    first = false;
    rows.emplace_back(idx, line.substr(comma + 1));
  }
  if (rows.size() != vertex_count) {
    ThrowInvalidInput("label count mismatch: " + std::to_string(rows.size()) +
                      " labels for " + std::to_string(vertex_count) + " vertices");
  }
  std::vector<LabelId> labels(vertex_count, -1);
  for (const auto& [idx, name] : rows) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= vertex_count) {
      ThrowInvalidInput(path + ": vertex index out of range");
    }
    labels[static_cast<std::size_t>(idx)] = mesh.InternLabel(name);
  }
  for (auto l : labels) {
    if (l < 0) ThrowInvalidInput(path + ": missing label for some vertex");
  }
  return labels;
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == suffix;
}

}  // namespace

PlyTable ReadPly(const std::string& path) {
  const std::string bytes = ReadTextFile(path);
  std::size_t pos = 0;
  auto next_line = [&]() {
    const auto end = bytes.find('\n', pos);
    if (end == std::string::npos) ThrowInvalidInput(path + ": truncated PLY header");
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "ply") ThrowInvalidInput(path + ": missing 'ply' magic");
  PlyFormat format = PlyFormat::kAscii;
  std::vector<PlyElement> elements;
  for (;;) {
    std::istringstream ls(next_line());
    std::string tag;
    ls >> tag;
    if (tag == "end_header") break;
    if (tag == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") {
        format = PlyFormat::kAscii;
      } else if (f == "binary_little_endian") {
        format = PlyFormat::kBinaryLittle;
      } else if (f == "binary_big_endian") {
        format = PlyFormat::kBinaryBig;
      } else {
        ThrowInvalidInput(path + ": unknown PLY format " + f);
      }
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) ThrowInvalidInput(path + ": property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    }
  }

  PlyTable table;
  PlyReader reader(bytes, pos, format);
  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    auto& props = is_vertex ? table.vertex_properties : table.face_properties;
    for (std::size_t i = 0; i < e.count; ++i) {
      for (const auto& p : e.properties) {
        if (p.is_list) {
          const auto n = static_cast<std::size_t>(reader.Read(p.count_type));
          std::vector<std::int64_t> items(n);
          for (auto& item : items) item = static_cast<std::int64_t>(reader.Read(p.type));
          if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            AppendPolygon(items, table.vertices.size(), table.faces);
          }
          continue;
        }
        const double v = reader.Read(p.type);
        if (is_vertex && (p.name == "x" || p.name == "y" || p.name == "z")) {
          if (table.vertices.size() <= i) table.vertices.resize(i + 1, Vec3::Zero());
          table.vertices[i][p.name[0] - 'x'] = v;
        } else if (is_vertex || is_face) {
          props[p.name].push_back(v);
        }
      }
    }
  }
  return table;
}

void WritePly(const std::string& path, const PlyTable& table) {
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n";
  header << "element vertex " << table.vertices.size() << "\n";
  header << "property double x\nproperty double y\nproperty double z\n";
  for (const auto& [name, values] : table.vertex_properties) {
    if (values.size() != table.vertices.size()) {
      ThrowInvalidInput("vertex property '" + name + "' has wrong length");
    }
    header << "property " << (name == "label" ? "int" : "double") << " " << name << "\n";
  }
  header << "element face " << table.faces.size() << "\n";
  header << "property list uchar int vertex_indices\n";
  for (const auto& [name, values] : table.face_properties) {
    if (values.size() != table.faces.size()) {
      ThrowInvalidInput("face property '" + name + "' has wrong length");
    }
    header << "property double " << name << "\n";
  }
  header << "end_header\n";
  std::string out = header.str();
  auto put = [&out](const auto& v) {
    char raw[sizeof(v)];
    std::memcpy(raw, &v, sizeof(v));
    out.append(raw, sizeof(v));
  };
  for (std::size_t i = 0; i < table.vertices.size(); ++i) {
    for (int k = 0; k < 3; ++k) put(table.vertices[i][k]);
    for (const auto& [name, values] : table.vertex_properties) {
      if (name == "label") {
        put(static_cast<std::int32_t>(values[i]));
      } else {
        put(values[i]);
      }
    }
  }
  for (std::size_t i = 0; i < table.faces.size(); ++i) {
    put(static_cast<std::uint8_t>(3));
    for (auto idx : table.faces[i]) put(static_cast<std::int32_t>(idx));
    for (const auto& [name, values] : table.face_properties) put(values[i]);
  }
  WriteTextFile(path, out);
}

RawMesh ReadMeshFile(const std::string& path) {
  if (EndsWith(path, ".obj")) return ReadObj(path);
  if (EndsWith(path, ".ply")) {
    PlyTable t = ReadPly(path);
    return RawMesh{std::move(t.vertices), std::move(t.faces),
                   std::move(t.vertex_properties)};
  }
  ThrowInvalidInput(path + ": mesh must be .obj or .ply");
}

AnnotatedMesh LoadAnnotatedMesh(const std::string& mesh_path,
                                const std::string& labels_path, Warnings* warnings) {
  const RawMesh raw = ReadMeshFile(mesh_path);
  if (raw.vertices.empty() || raw.faces.empty()) ThrowInvalidInput("empty mesh");
  AnnotatedMesh mesh;
  mesh.vertices = raw.vertices;
  mesh.faces = raw.faces;
  if (EndsWith(labels_path, ".csv")) {
    mesh.vertex_labels =
        ParseLabelsCsv(ReadTextFile(labels_path), mesh, raw.vertices.size(), labels_path);
  } else {
    mesh.vertex_labels = ParseLabelsJson(ReadJsonFile(labels_path), raw, mesh, labels_path);
  }
  if (mesh.vertex_labels.size() != mesh.vertices.size()) {
    ThrowInvalidInput("label count mismatch: " + std::to_string(mesh.vertex_labels.size()) +
                      " labels for " + std::to_string(mesh.vertices.size()) + " vertices");
  }
  for (const auto& v : mesh.vertices) {
    if (!v.allFinite()) ThrowInvalidInput("non-finite vertex coordinate");
  }
  // Faces repeating a vertex are dropped by CleanMesh, so validate after it.
  AnnotatedMesh cleaned = CleanMesh(mesh, kMergeTolerance, warnings);
  ValidateMesh(cleaned);
  return cleaned;
}

void WriteLabeledMesh(const AnnotatedMesh& mesh, const std::string& ply_path,
                      const std::string& labels_path) {
  PlyTable table;
  table.vertices = mesh.vertices;
  table.faces = mesh.faces;
  auto& labels = table.vertex_properties["label"];
  labels.assign(mesh.vertex_labels.begin(), mesh.vertex_labels.end());
  WritePly(ply_path, table);
  WriteJsonFile(labels_path, nlohmann::json{{"labels", mesh.label_names}});
}

}  // namespace binscene::geometry

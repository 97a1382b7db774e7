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

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"
#include "binscene/materials/materials.hpp"

namespace binscene::materials {
namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

bool ParseDouble(const std::string& text, double& out) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  const auto res = std::from_chars(text.data() + b, text.data() + e, out);
  return res.ec == std::errc() && res.ptr == text.data() + e && b < e;
}

MaterialDatabase ParseCsv(const std::string& text, const std::string& path) {
  MaterialDatabase db;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != kBandCount + 1) {
      ThrowInvalidInput(path + ":" + std::to_string(line_no) + ": expected 9 columns");
    }
    MaterialEntry e;
    e.name = cells[0];
    bool numeric = true;
    for (int b = 0; b < kBandCount; ++b) {
      if (!ParseDouble(cells[b + 1], e.absorption[b])) numeric = false;
    }
    if (!numeric) {
      if (line_no == 1 || db.entries.empty()) continue;  // header
      ThrowInvalidInput(path + ":" + std::to_string(line_no) + ": non-numeric coefficient");
    }
    db.entries.push_back(e);
  }
  return db;
}

BandCoefficients ParseBands(const nlohmann::json& j, const std::string& name) {
  const auto values = j.get<std::vector<double>>();
  if (values.size() != kBandCount) {
    ThrowInvalidInput("material '" + name + "' must have exactly 8 band coefficients");
  }
  BandCoefficients out;
  std::copy(values.begin(), values.end(), out.begin());
  return out;
}

MaterialDatabase ParseJson(const nlohmann::json& j, const std::string& path) {
  MaterialDatabase db;
  try {
    if (j.is_array()) {
      for (const auto& item : j) {
        MaterialEntry e;
        e.name = item.at("name").get<std::string>();
        e.absorption = ParseBands(item.at("absorption"), e.name);
        db.entries.push_back(e);
      }
    } else if (j.is_object()) {
      for (const auto& [name, bands] : j.items()) {
        db.entries.push_back({name, ParseBands(bands, name)});
      }
    } else {
      ThrowInvalidInput(path + ": material database must be a JSON array or object");
    }
  } catch (const nlohmann::json::exception& e) {
    ThrowInvalidInput(path + ": " + e.what());
  }
  return db;
}

}  // namespace

const MaterialEntry* MaterialDatabase::Find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

void ValidateDatabase(const MaterialDatabase& db) {
  std::set<std::string> names;
  for (const auto& e : db.entries) {
    if (!names.insert(e.name).second) {
      ThrowInvalidInput("duplicate material name '" + e.name + "'");
    }
    for (double a : e.absorption) {
      if (!(a >= 0.0 && a <= 1.0)) {
        ThrowInvalidInput("absorption out of range for material '" + e.name + "'");
      }
    }
  }
  std::size_t dim = 0;
  for (const auto& [name, vec] : db.embeddings) {
    if (vec.empty()) ThrowInvalidInput("empty embedding for '" + name + "'");
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim) {
      ThrowInvalidInput("ragged embedding dimensions (" + std::to_string(dim) + " vs " +
                        std::to_string(vec.size()) + ")");
    }
    for (double v : vec) {
      if (!std::isfinite(v)) ThrowInvalidInput("non-finite embedding for '" + name + "'");
    }
  }
}

std::map<std::string, std::vector<double>> LoadEmbeddings(const std::string& path) {
  const nlohmann::json j = ReadJsonFile(path);
  if (!j.is_object()) ThrowInvalidInput(path + ": embeddings must be a JSON object");
  std::map<std::string, std::vector<double>> out;
  try {
    for (const auto& [name, vec] : j.items()) out[name] = vec.get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    ThrowInvalidInput(path + ": " + e.what());
  }
  return out;
}

MaterialDatabase LoadMaterialDatabase(const std::string& path,
                                      const std::string& embeddings_path) {
  const std::string text = ReadTextFile(path);
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  MaterialDatabase db;
  if (is_json) {
    try {
      db = ParseJson(nlohmann::json::parse(text), path);
    } catch (const nlohmann::json::parse_error& e) {
      ThrowInvalidInput(path + ": " + e.what());
    }
  } else {
    db = ParseCsv(text, path);
  }
  if (db.entries.empty()) ThrowInvalidInput(path + ": material database is empty");
  if (!embeddings_path.empty()) db.embeddings = LoadEmbeddings(embeddings_path);
  ValidateDatabase(db);
  return db;
}

}  // namespace binscene::materials

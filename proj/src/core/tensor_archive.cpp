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

#include "binscene/core/tensor_archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>

#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"

namespace binscene {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor archives are written little-endian");

std::size_t ElementCount(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

void SaveTensorArchive(const std::string& prefix,
                       const std::vector<NamedTensor>& tensors,
                       const nlohmann::json& extra) {
  nlohmann::json manifest;
  manifest["format"] = "binscene-tensors-v1";
  manifest["dtype"] = "float64";
  manifest["tensors"] = nlohmann::json::array();
  std::ofstream blob(prefix + ".bin", std::ios::binary);
  if (!blob) ThrowIo("cannot write " + prefix + ".bin");
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    if (ElementCount(t.shape) != t.values.size()) {
      ThrowInvalidInput("tensor '" + t.name + "' shape does not match values");
    }
    manifest["tensors"].push_back(
        {{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    blob.write(reinterpret_cast<const char*>(t.values.data()),
               static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    offset += t.values.size();
  }
  if (!blob) ThrowIo("write failed for " + prefix + ".bin");
  manifest["total_elements"] = offset;
  manifest["meta"] = extra;
  WriteJsonFile(prefix + ".json", manifest);
}

const NamedTensor& LoadedArchive::Get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  ThrowInvalidInput("tensor archive has no tensor '" + name + "'");
}

LoadedArchive LoadTensorArchive(const std::string& prefix) {
  const nlohmann::json manifest = ReadJsonFile(prefix + ".json");
  const std::string blob = ReadTextFile(prefix + ".bin");
  LoadedArchive out;
  out.meta = manifest.value("meta", nlohmann::json::object());
  const std::size_t total = blob.size() / sizeof(double);
  if (blob.size() % sizeof(double) != 0) {
    ThrowInvalidInput(prefix + ".bin is not a float64 blob");
  }
  try {
    for (const auto& entry : manifest.at("tensors")) {
      NamedTensor t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const std::size_t count = ElementCount(t.shape);
      if (offset + count > total) {
        ThrowInvalidInput("tensor '" + t.name + "' exceeds archive blob");
      }
      t.values.resize(count);
      std::memcpy(t.values.data(), blob.data() + offset * sizeof(double),
                  count * sizeof(double));
      out.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    ThrowInvalidInput(prefix + ".json: " + e.what());
  }
  return out;
}

}  // namespace binscene

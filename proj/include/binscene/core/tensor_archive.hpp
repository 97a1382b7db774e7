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

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace binscene {

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

// Flat little-endian float64 blob (<prefix>.bin) plus a JSON manifest
// (<prefix>.json) listing name, shape, and element offset of every tensor.
// `extra` is copied into the manifest under "meta".
void SaveTensorArchive(const std::string& prefix,
                       const std::vector<NamedTensor>& tensors,
                       const nlohmann::json& extra = nlohmann::json::object());

struct LoadedArchive {
  std::vector<NamedTensor> tensors;
  nlohmann::json meta;

  const NamedTensor& Get(const std::string& name) const;
};

LoadedArchive LoadTensorArchive(const std::string& prefix);

}  // namespace binscene

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

#include <string>

#include <nlohmann/json.hpp>

namespace binscene {

nlohmann::json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const nlohmann::json& value,
                   int indent = 2);
std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

// FNV-1a over the compact JSON dump; stable across runs and platforms.
std::string HashJson(const nlohmann::json& value);

}  // namespace binscene

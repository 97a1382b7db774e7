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

#include "binscene/core/log.hpp"

#include <spdlog/spdlog.h>

namespace binscene {

void Warnings::Add(std::string message) {
  spdlog::warn("{}", message);
  messages_.push_back(std::move(message));
}

void Warn(Warnings* sink, std::string message) {
  if (sink != nullptr) {
    sink->Add(std::move(message));
  } else {
    spdlog::warn("{}", message);
  }
}

}  // namespace binscene

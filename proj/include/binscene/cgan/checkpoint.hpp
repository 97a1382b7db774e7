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

#include "binscene/cgan/train.hpp"

namespace binscene::cgan {

// <prefix>.bin + <prefix>.json; the manifest meta echoes every config.
void SaveCheckpoint(const std::string& prefix, const TrainState& state, const TrainConfig& cfg);

struct Checkpoint {
  TrainState state;
  TrainConfig train;
};

Checkpoint LoadCheckpoint(const std::string& prefix);

}  // namespace binscene::cgan

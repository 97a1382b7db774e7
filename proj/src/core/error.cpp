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

#include "binscene/core/error.hpp"

#include <cmath>

#include "binscene/core/bir.hpp"

namespace binscene {

void ThrowInvalidInput(const std::string& message) {
  throw Error(ErrorKind::kInvalidInput, message);
}

void ThrowNumerical(const std::string& message) {
  throw Error(ErrorKind::kNumerical, message);
}

void ThrowIo(const std::string& message) { throw Error(ErrorKind::kIo, message); }

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return "usage";
    case ErrorKind::kInvalidInput:
      return "invalid input";
    case ErrorKind::kNumerical:
      return "numerical";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

void ValidateBir(const Bir& bir) {
  if (bir.left.size() != bir.right.size()) {
    ThrowInvalidInput("BIR channels have unequal lengths");
  }
  if (!(bir.sample_rate > 0.0)) ThrowInvalidInput("BIR sample rate must be positive");
  for (int ear = 0; ear < 2; ++ear) {
    for (double v : bir.channel(ear)) {
      if (!std::isfinite(v)) ThrowInvalidInput("BIR contains non-finite samples");
    }
  }
}

}  // namespace binscene

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

#include <span>
#include <vector>

namespace binscene::codec {

// Rational polyphase resampling by up/down with a Kaiser-windowed sinc
// low-pass (beta 5, half-length 10 taps per phase of the slower rate).
// Output length is ceil(n * up / down); group delay is compensated.
std::vector<double> ResamplePoly(std::span<const double> x, int up, int down);

// Resamples between integer-valued rates, reducing the ratio first.
std::vector<double> ResampleRate(std::span<const double> x, double from_rate,
                                 double to_rate);

}  // namespace binscene::codec

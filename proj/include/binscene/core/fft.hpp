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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace binscene {

// Real-to-complex FFT of fixed length backed by FFTW. Each instance owns its
// buffers, so distinct instances may be used from different threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // out.size() == bins(). Unnormalized: X[k] = sum_n x[n] e^{-2 pi i k n / N}.
  void Forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse of a Hermitian spectrum; Inverse(Forward(x)) == N x.
  void Inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_;
  void* complex_;
  void* forward_plan_;
  void* inverse_plan_;
};

std::size_t NextPowerOfTwo(std::size_t n);

// Full linear convolution, length a + b - 1, by one zero-padded FFT.
std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b);

}  // namespace binscene

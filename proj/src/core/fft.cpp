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

#include "binscene/core/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "binscene/core/error.hpp"

namespace binscene {
namespace {

// FFTW's planner is not thread safe; execution on distinct plans is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n_ < 2) ThrowInvalidInput("FFT length must be at least 2");
  std::lock_guard<std::mutex> lock(PlannerMutex());
  real_ = fftw_alloc_real(n_);
  auto* spectrum = fftw_alloc_complex(bins());
  complex_ = spectrum;
  const int len = static_cast<int>(n_);
  forward_plan_ = fftw_plan_dft_r2c_1d(len, real_, spectrum, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(len, spectrum, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(static_cast<fftw_complex*>(complex_));
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  std::fill(real_, real_ + n_, 0.0);
  std::copy_n(in.begin(), std::min(in.size(), n_), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  auto* spectrum = static_cast<fftw_complex*>(complex_);
  for (std::size_t k = 0; k < bins() && k < out.size(); ++k) {
    out[k] = {spectrum[k][0], spectrum[k][1]};
  }
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  auto* spectrum = static_cast<fftw_complex*>(complex_);
  for (std::size_t k = 0; k < bins(); ++k) {
    const std::complex<double> v = k < in.size() ? in[k] : 0.0;
    spectrum[k][0] = v.real();
    spectrum[k][1] = v.imag();
  }
  // c2r destroys its input; the buffer is refilled on every call.
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy_n(real_, std::min(out.size(), n_), out.begin());
}

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) ThrowInvalidInput("convolution of an empty signal");
  const std::size_t out_len = a.size() + b.size() - 1;
  RealFft fft(std::max<std::size_t>(2, NextPowerOfTwo(out_len)));
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.Forward(a, fa);
  fft.Forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> out(fft.size());
  fft.Inverse(fa, out);
  out.resize(out_len);
  const double scale = 1.0 / static_cast<double>(fft.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace binscene

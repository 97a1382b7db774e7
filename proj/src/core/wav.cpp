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

#include "binscene/core/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "binscene/core/error.hpp"
#include "binscene/core/json_util.hpp"

namespace binscene {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t ReadU32(const std::string& b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t ReadU16(const std::string& b, std::size_t at) {
  return static_cast<std::uint16_t>(
      static_cast<unsigned char>(b[at]) |
      static_cast<unsigned char>(b[at + 1]) << 8);
}

void PutU32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutU16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>(v >> 8));
}

double DecodeSample(const char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float f;
      std::memcpy(&f, p, 4);
      return f;
    }
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  switch (bits) {
    case 8:
      return (static_cast<int>(u[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(u[0] | (u[1] << 8)) / 32768.0;
    case 24: {
      std::int32_t v = u[0] | (u[1] << 8) | (u[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32: {
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return v / 2147483648.0;
    }
  }
  ThrowInvalidInput("unsupported WAV bit depth");
}

}  // namespace

WavData ReadWav(const std::string& path) {
  const std::string b = ReadTextFile(path);
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    ThrowInvalidInput(path + ": not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_at = 0, data_size = 0;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::string id = b.substr(at, 4);
    const std::uint32_t size = ReadU32(b, at + 4);
    const std::size_t body = at + 8;
    if (id == "fmt " && body + 16 <= b.size()) {
      format = ReadU16(b, body);
      channels = ReadU16(b, body + 2);
      rate = ReadU32(b, body + 4);
      bits = ReadU16(b, body + 14);
      if (format == kFormatExtensible && size >= 26 && body + 26 <= b.size()) {
        format = ReadU16(b, body + 24);
      }
    } else if (id == "data") {
      data_at = body;
      data_size = std::min<std::size_t>(size, b.size() - body);
      break;
    }
    at = body + size + (size & 1);
  }
  if (channels == 0 || data_at == 0) ThrowInvalidInput(path + ": missing fmt or data chunk");
  if (format != kFormatPcm && format != kFormatFloat) {
    ThrowInvalidInput(path + ": unsupported WAV encoding");
  }
  const std::size_t bytes = bits / 8;
  if (bytes == 0) ThrowInvalidInput(path + ": invalid bit depth");
  const std::size_t frames = data_size / (bytes * channels);
  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      out.channels[c][f] =
          DecodeSample(b.data() + data_at + (f * channels + c) * bytes, format, bits);
    }
  }
  return out;
}

void WriteWavFloat(const std::string& path, int sample_rate,
                   const std::vector<std::vector<double>>& channels) {
  if (channels.empty()) ThrowInvalidInput("WAV needs at least one channel");
  const std::size_t frames = channels[0].size();
  for (const auto& c : channels) {
    if (c.size() != frames) ThrowInvalidInput("WAV channels differ in length");
  }
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const auto data_bytes = static_cast<std::uint32_t>(frames * n_ch * 4);
  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  PutU32(b, 36 + data_bytes);
  b += "WAVEfmt ";
  PutU32(b, 16);
  PutU16(b, kFormatFloat);
  PutU16(b, n_ch);
  PutU32(b, static_cast<std::uint32_t>(sample_rate));
  PutU32(b, static_cast<std::uint32_t>(sample_rate) * n_ch * 4);
  PutU16(b, static_cast<std::uint16_t>(n_ch * 4));
  PutU16(b, 32);
  b += "data";
  PutU32(b, data_bytes);
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& c : channels) {
      const float v = static_cast<float>(c[f]);
      char raw[4];
      std::memcpy(raw, &v, 4);
      b.append(raw, 4);
    }
  }
  WriteTextFile(path, b);
}

void WriteBirWav(const std::string& path, const Bir& bir) {
  WriteWavFloat(path, static_cast<int>(bir.sample_rate), {bir.left, bir.right});
}

Bir ReadBirWav(const std::string& path) {
  WavData wav = ReadWav(path);
  if (wav.channels.size() != 2) ThrowInvalidInput(path + ": BIR WAV must have 2 channels");
  Bir bir;
  bir.sample_rate = wav.sample_rate;
  bir.left = std::move(wav.channels[0]);
  bir.right = std::move(wav.channels[1]);
  return bir;
}

}  // namespace binscene

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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binscene/core/bir.hpp"

namespace binscene::codec {

inline constexpr double kEdCenters[] = {125.0, 500.0, 1000.0, 2000.0, 4000.0};
inline constexpr double kLogEdFloor = 1e-8;

struct ChannelErrors {
  std::optional<double> t60;  // absent when either side lacks the decay range
  std::optional<double> edt;
  std::optional<double> drr;  // absent when either side is direct-only
  double ed_mse_log = 0.0;
  double ed_mse_linear = 0.0;
  double bir_mae = 0.0;
  double edc_mae_db = 0.0;
};

struct PairReport {
  std::string name;
  ChannelErrors channels[2];
  // Left-minus-right Schroeder curves in dB, per side.
  std::vector<double> ed_difference_generated;
  std::vector<double> ed_difference_reference;
};

struct Aggregate {
  double mean = 0.0;
  std::size_t count = 0;
};

struct MetricReport {
  std::vector<PairReport> pairs;
  Aggregate t60, edt, drr, ed_mse_log, ed_mse_linear, bir_mae, edc_mae_db;
};

// Normalized log-ED MSE at the center frequencies: each bin's ED is divided
// by its frame-0 value, floored at 1e-8, and logged.
double EdCurveMse(std::span<const double> a, std::span<const double> b,
                  double sample_rate, bool log_domain);

ChannelErrors CompareChannel(std::span<const double> generated,
                             std::span<const double> reference, double sample_rate);

MetricReport BuildMetricReport(const std::vector<Bir>& generated,
                               const std::vector<Bir>& reference,
                               const std::vector<std::string>& names = {});

nlohmann::json ReportToJson(const MetricReport& report);
std::string ReportToText(const MetricReport& report);
// One row per pair and channel.
std::string ReportToCsv(const MetricReport& report);
// Columns: sample, then generated and reference L-R curves per pair.
std::string EdDifferenceCsv(const MetricReport& report, double sample_rate);

}  // namespace binscene::codec

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

#include "binscene/codec/metrics.hpp"

#include <cmath>
#include <fmt/format.h>
#include <sstream>

#include "binscene/codec/decay.hpp"
#include "binscene/core/error.hpp"

namespace binscene::codec {

namespace {

constexpr double kEdcFloorDb = -100.0;

std::optional<double> Try(double (*fn)(std::span<const double>, double),
                          std::span<const double> x, double fs) {
  try {
    return fn(x, fs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumerical) throw;
    return std::nullopt;
  }
}

std::optional<double> TryDrr(std::span<const double> x, double fs) {
  try {
    const auto r = Drr(x, fs);
    if (r.direct_only) return std::nullopt;
    return r.db;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumerical) throw;
    return std::nullopt;
  }
}

std::optional<double> AbsDiff(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return std::abs(*a - *b);
}

// Peak over both channels, so normalization keeps the level difference.
double JointPeak(const Bir& b) {
  double peak = 0.0;
  for (int ear = 0; ear < 2; ++ear) {
    for (double v : b.channel(ear)) peak = std::max(peak, std::abs(v));
  }
  return peak;
}

std::vector<double> SafeEdcDb(std::span<const double> x) {
  auto curve = Edc(x);
  const double floor_lin = std::pow(10.0, kEdcFloorDb / 10.0);
  for (auto& v : curve) v = 10.0 * std::log10(std::max(v, floor_lin));
  return curve;
}

void Accumulate(Aggregate& agg, std::optional<double> v) {
  if (!v) return;
  agg.mean += *v;
  ++agg.count;
}

void Finish(Aggregate& agg) {
  if (agg.count > 0) agg.mean /= static_cast<double>(agg.count);
}

nlohmann::json OptJson(std::optional<double> v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string OptText(std::optional<double> v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("n/a");
}

}  // namespace

double EdCurveMse(std::span<const double> a, std::span<const double> b, double sample_rate,
                  bool log_domain) {
  if (a.size() != b.size()) ThrowInvalidInput("ED comparison needs equal lengths");
  const StftConfig cfg;
  const Eigen::MatrixXd ea = EdRelief(a, cfg);
  const Eigen::MatrixXd eb = EdRelief(b, cfg);
  double sum = 0.0;
  std::size_t count = 0;
  for (double fc : kEdCenters) {
    const auto c = static_cast<Eigen::Index>(std::llround(fc * cfg.window / sample_rate));
    if (c >= ea.cols()) continue;
    const double na = ea(0, c) > 0.0 ? ea(0, c) : 1.0;
    const double nb = eb(0, c) > 0.0 ? eb(0, c) : 1.0;
    for (Eigen::Index t = 0; t < ea.rows(); ++t) {
      double va = ea(t, c) / na;
      double vb = eb(t, c) / nb;
      if (log_domain) {
        va = std::log(std::max(va, kLogEdFloor));
        vb = std::log(std::max(vb, kLogEdFloor));
      }
      sum += (va - vb) * (va - vb);
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

ChannelErrors CompareChannel(std::span<const double> generated, std::span<const double> reference,
                             double sample_rate) {
  if (generated.size() != reference.size()) ThrowInvalidInput("channel lengths differ");
  ChannelErrors e;
  e.t60 = AbsDiff(Try(&T60, generated, sample_rate), Try(&T60, reference, sample_rate));
  e.edt = AbsDiff(Try(&Edt, generated, sample_rate), Try(&Edt, reference, sample_rate));
  e.drr = AbsDiff(TryDrr(generated, sample_rate), TryDrr(reference, sample_rate));
  e.ed_mse_log = EdCurveMse(generated, reference, sample_rate, true);
  e.ed_mse_linear = EdCurveMse(generated, reference, sample_rate, false);
  const auto ga = SafeEdcDb(generated);
  const auto ra = SafeEdcDb(reference);
  double mae = 0.0;
  for (std::size_t i = 0; i < ga.size(); ++i) mae += std::abs(ga[i] - ra[i]);
  e.edc_mae_db = mae / static_cast<double>(ga.size());
  return e;
}

MetricReport BuildMetricReport(const std::vector<Bir>& generated, const std::vector<Bir>& reference,
                               const std::vector<std::string>& names) {
  if (generated.size() != reference.size()) {
    ThrowInvalidInput("unpaired BIR sets: " + std::to_string(generated.size()) + " generated, " +
                      std::to_string(reference.size()) + " reference");
  }
  MetricReport report;
  for (std::size_t p = 0; p < generated.size(); ++p) {
    const Bir& g = generated[p];
    const Bir& r = reference[p];
    ValidateBir(g);
    ValidateBir(r);
    if (g.sample_rate != r.sample_rate) ThrowInvalidInput("pair " + std::to_string(p) + ": sample rates differ");
    if (g.size() != r.size()) ThrowInvalidInput("pair " + std::to_string(p) + ": lengths differ");

    PairReport pr;
    pr.name = p < names.size() ? names[p] : std::to_string(p);
    const double gp = JointPeak(g);
    const double rp = JointPeak(r);
    for (int ear = 0; ear < 2; ++ear) {
      ChannelErrors& e = pr.channels[ear];
      e = CompareChannel(g.channel(ear), r.channel(ear), g.sample_rate);
      double mae = 0.0;
      const auto& gc = g.channel(ear);
      const auto& rc = r.channel(ear);
      for (std::size_t i = 0; i < gc.size(); ++i) {
        mae += std::abs((gp > 0 ? gc[i] / gp : 0.0) - (rp > 0 ? rc[i] / rp : 0.0));
      }
      e.bir_mae = mae / static_cast<double>(gc.size());

      Accumulate(report.t60, e.t60);
      Accumulate(report.edt, e.edt);
      Accumulate(report.drr, e.drr);
      Accumulate(report.ed_mse_log, e.ed_mse_log);
      Accumulate(report.ed_mse_linear, e.ed_mse_linear);
      Accumulate(report.bir_mae, e.bir_mae);
      Accumulate(report.edc_mae_db, e.edc_mae_db);
    }
    const auto diff = [](const Bir& b) {
      auto l = SafeEdcDb(b.left);
      const auto rr = SafeEdcDb(b.right);
      for (std::size_t i = 0; i < l.size(); ++i) l[i] -= rr[i];
      return l;
    };
    pr.ed_difference_generated = diff(g);
    pr.ed_difference_reference = diff(r);
    report.pairs.push_back(std::move(pr));
  }
  for (Aggregate* a : {&report.t60, &report.edt, &report.drr, &report.ed_mse_log,
                       &report.ed_mse_linear, &report.bir_mae, &report.edc_mae_db}) {
    Finish(*a);
  }
  return report;
}

nlohmann::json ReportToJson(const MetricReport& report) {
  nlohmann::json j;
  const auto agg = [](const Aggregate& a) {
    return nlohmann::json{{"mean", a.mean}, {"count", a.count}};
  };
  j["summary"] = {{"t60_abs_error_s", agg(report.t60)},
                  {"edt_abs_error_s", agg(report.edt)},
                  {"drr_abs_error_db", agg(report.drr)},
                  {"ed_mse_log", agg(report.ed_mse_log)},
                  {"ed_mse_linear", agg(report.ed_mse_linear)},
                  {"bir_mae", agg(report.bir_mae)},
                  {"edc_mae_db", agg(report.edc_mae_db)}};
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    nlohmann::json pj{{"name", p.name}};
    for (int ear = 0; ear < 2; ++ear) {
      const auto& e = p.channels[ear];
      pj[ear == 0 ? "left" : "right"] = {
          {"t60_abs_error_s", OptJson(e.t60)}, {"edt_abs_error_s", OptJson(e.edt)},
          {"drr_abs_error_db", OptJson(e.drr)}, {"ed_mse_log", e.ed_mse_log},
          {"ed_mse_linear", e.ed_mse_linear}, {"bir_mae", e.bir_mae},
          {"edc_mae_db", e.edc_mae_db}};
    }
    j["pairs"].push_back(std::move(pj));
  }
  return j;
}

std::string ReportToText(const MetricReport& report) {
  std::ostringstream out;
  out << fmt::format("{:<18}{:>14}{:>8}\n", "metric", "mean", "count");
  const auto row = [&](const char* name, const Aggregate& a) {
    out << fmt::format("{:<18}{:>14.6f}{:>8}\n", name, a.mean, a.count);
  };
  row("t60_abs_err_s", report.t60);
  row("edt_abs_err_s", report.edt);
  row("drr_abs_err_db", report.drr);
  row("ed_mse_log", report.ed_mse_log);
  row("ed_mse_linear", report.ed_mse_linear);
  row("bir_mae", report.bir_mae);
  row("edc_mae_db", report.edc_mae_db);
  return out.str();
}

std::string ReportToCsv(const MetricReport& report) {
  std::ostringstream out;
  out << "pair,channel,t60_abs_err_s,edt_abs_err_s,drr_abs_err_db,ed_mse_log,ed_mse_linear,bir_mae,edc_mae_db\n";
  for (const auto& p : report.pairs) {
    for (int ear = 0; ear < 2; ++ear) {
      const auto& e = p.channels[ear];
      out << fmt::format("{},{},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g}\n", p.name,
                         ear == 0 ? "left" : "right", OptText(e.t60), OptText(e.edt),
                         OptText(e.drr), e.ed_mse_log, e.ed_mse_linear, e.bir_mae, e.edc_mae_db);
    }
  }
  return out.str();
}

std::string EdDifferenceCsv(const MetricReport& report, double sample_rate) {
  std::ostringstream out;
  out << "time_s";
  for (const auto& p : report.pairs) out << "," << p.name << "_generated," << p.name << "_reference";
  out << "\n";
  const std::size_t n = report.pairs.empty() ? 0 : report.pairs[0].ed_difference_generated.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << fmt::format("{:.6f}", static_cast<double>(i) / sample_rate);
    for (const auto& p : report.pairs) {
      const double g = i < p.ed_difference_generated.size() ? p.ed_difference_generated[i] : 0.0;
      const double r = i < p.ed_difference_reference.size() ? p.ed_difference_reference[i] : 0.0;
      out << fmt::format(",{:.6f},{:.6f}", g, r);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace binscene::codec

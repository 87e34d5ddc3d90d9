// Copyright 2026 The scpa-host Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "scpa/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace scpa::impact {
namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> cells(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(strip(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double mean(std::span<const ProjectMetrics> rows, Metric metric) {
  double sum = 0;
  for (const auto& r : rows) sum += r.get(metric);
  return sum / static_cast<double>(rows.size());
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kDefects: return "post_release_defects";
    case Metric::kReleaseTime: return "release_time";
    case Metric::kTestingTime: return "testing_time";
    case Metric::kDevelopmentTime: return "development_time";
    case Metric::kDeploymentTime: return "deployment_time";
    case Metric::kLocChanged: return "loc_changed";
  }
  return "";
}

std::string_view metric_column(Metric metric) {
  switch (metric) {
    case Metric::kDefects: return "defects";
    case Metric::kReleaseTime: return "release";
    case Metric::kTestingTime: return "testing";
    case Metric::kDevelopmentTime: return "development";
    case Metric::kDeploymentTime: return "deployment";
    case Metric::kLocChanged: return "loc";
  }
  return "";
}

double ProjectMetrics::get(Metric metric) const {
  switch (metric) {
    case Metric::kDefects: return defects;
    case Metric::kReleaseTime: return release_time;
    case Metric::kTestingTime: return testing_time;
    case Metric::kDevelopmentTime: return development_time;
    case Metric::kDeploymentTime: return deployment_time;
    case Metric::kLocChanged: return loc_changed;
  }
  return 0;
}

MetricsError::MetricsError(Code code, std::string detail)
    : std::runtime_error([&] {
        switch (code) {
          case Code::kBadRow: return "BadRow: " + detail;
          case Code::kProjectMismatch: return "ProjectMismatch: " + detail;
          case Code::kZeroBaseline: return "ZeroBaseline: " + detail;
        }
        return detail;
      }()),
      code_(code) {}

std::vector<ProjectMetrics> load_metrics_table(std::string_view text) {
  std::vector<ProjectMetrics> rows;
  std::set<std::string, std::less<>> seen;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = strip(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto bad = [&](std::string_view reason) {
      return MetricsError(MetricsError::Code::kBadRow,
                          fmt::format("line {}: {}", line_no, reason));
    };

    if (!header_seen) {
      if (line != kMetricsHeader) throw bad(fmt::format("expected header `{}`", kMetricsHeader));
      header_seen = true;
      continue;
    }

    const auto c = cells(line);
    if (c.size() != 7) throw bad(fmt::format("expected 7 cells, found {}", c.size()));
    if (c[0].empty()) throw bad("empty project id");
    if (!seen.insert(std::string(c[0])).second) {
      throw bad(fmt::format("duplicate project `{}`", c[0]));
    }

    std::array<double, 6> values{};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto cell = c[i + 1];
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), values[i]);
      if (cell.empty() || ec != std::errc{} || p != cell.data() + cell.size() ||
          !std::isfinite(values[i])) {
        throw bad(fmt::format("`{}` is not a number", cell));
      }
      if (values[i] < 0) throw bad(fmt::format("negative value `{}`", cell));
    }
    rows.push_back(ProjectMetrics{std::string(c[0]), values[0], values[1], values[2],
                                  values[3], values[4], values[5]});
  }
  if (!header_seen) {
    throw MetricsError(MetricsError::Code::kBadRow, "line 1: missing header");
  }
  return rows;
}

const MetricChange& ImprovementReport::at(Metric metric) const {
  for (const auto& c : changes) {
    if (c.metric == metric) return c;
  }
  throw std::out_of_range(fmt::format("no change recorded for {}", metric_name(metric)));
}

ImprovementReport aggregate_metrics(std::span<const ProjectMetrics> baseline,
                                    std::span<const ProjectMetrics> treatment) {
  std::set<std::string> base_ids, treat_ids;
  for (const auto& p : baseline) base_ids.insert(p.project);
  for (const auto& p : treatment) treat_ids.insert(p.project);
  if (baseline.empty() || base_ids != treat_ids || base_ids.size() != baseline.size() ||
      treat_ids.size() != treatment.size()) {
    throw MetricsError(MetricsError::Code::kProjectMismatch,
                       "baseline and treatment must list the same projects once each");
  }

  ImprovementReport report;
  for (const Metric metric : kAllMetrics) {
    MetricChange c;
    c.metric = metric;
    c.baseline_mean = mean(baseline, metric);
    c.treatment_mean = mean(treatment, metric);
    if (!(c.baseline_mean > 0)) {
      throw MetricsError(MetricsError::Code::kZeroBaseline, std::string(metric_name(metric)));
    }
    c.percent_change = (c.treatment_mean - c.baseline_mean) / c.baseline_mean * 100.0;
    report.changes.push_back(c);
  }
  return report;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double magnitude = std::floor(std::fabs(value) * scale + 0.5) / scale;
  return std::copysign(magnitude, value);
}

std::string format_percent(double percent) {
  const double rounded = round_half_up(percent, 2);
  if (rounded == 0) return "0.00%";
  return fmt::format("{:+.2f}%", rounded);
}

}  // namespace scpa::impact

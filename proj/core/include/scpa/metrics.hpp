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

#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scpa::impact {

enum class Metric { kDefects, kReleaseTime, kTestingTime, kDevelopmentTime, kDeploymentTime, kLocChanged };

inline constexpr std::array<Metric, 6> kAllMetrics = {
    Metric::kDefects,         Metric::kReleaseTime,    Metric::kTestingTime,
    Metric::kDevelopmentTime, Metric::kDeploymentTime, Metric::kLocChanged};

/// Report name, e.g. "release_time".
std::string_view metric_name(Metric metric);
/// CSV column, e.g. "release".
std::string_view metric_column(Metric metric);

/// Per-project averages per release. Times are in days.
struct ProjectMetrics {
  std::string project;
  double defects = 0;
  double release_time = 0;
  double testing_time = 0;
  double development_time = 0;
  double deployment_time = 0;
  double loc_changed = 0;

  double get(Metric metric) const;
};

class MetricsError : public std::runtime_error {
 public:
  enum class Code { kBadRow, kProjectMismatch, kZeroBaseline };
  MetricsError(Code code, std::string detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

inline constexpr std::string_view kMetricsHeader =
    "project,defects,release,testing,development,deployment,loc";

/// Parses the metrics CSV (header row then one row per project). Throws
/// MetricsError kBadRow naming the line.
std::vector<ProjectMetrics> load_metrics_table(std::string_view text);

struct MetricChange {
  Metric metric;
  double baseline_mean = 0;
  double treatment_mean = 0;
  /// (treatment - baseline) / baseline * 100; negative is a reduction.
  double percent_change = 0;
};

struct ImprovementReport {
  std::vector<MetricChange> changes;
  const MetricChange& at(Metric metric) const;
};

/// Compares cross-project means per metric. Both sets must cover the same
/// projects (order does not matter).
ImprovementReport aggregate_metrics(std::span<const ProjectMetrics> baseline,
                                    std::span<const ProjectMetrics> treatment);

/// Rounds half away from zero at `decimals` places.
double round_half_up(double value, int decimals);
/// "-42.99%", "+22.58%", "0.00%".
std::string format_percent(double percent);

}  // namespace scpa::impact

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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "scpa/drop_folder.hpp"
#include "scpa/host.hpp"
#include "scpa/impact.hpp"
#include "scpa/metrics.hpp"

#ifdef SCPA_WITH_DEMO
#include "legacy_app.hpp"
#endif

namespace fs = std::filesystem;

namespace scpa::cli {
namespace {

// Operational failures carry their message to `err` and exit 1.
struct CommandFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { kText, kCsv };

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandFailed(fmt::format("cannot read {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void print_table(std::ostream& out, Format format, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  if (format == Format::kCsv) {
    const auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (i > 0) out << ',';
        if (!quote) {
          out << cells[i];
          continue;
        }
        out << '"';
        for (char c : cells[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
        out << '"';
      }
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return;
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (std::size_t i = 0; i < header.size(); ++i) widths[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < widths.size(); ++i) {
      widths[i] = std::max(widths[i], r[i].size());
    }
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string text;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) text += "  ";
      text += fmt::format("{:<{}}", cells[i], widths[i]);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

// ---------------------------------------------------------------------------
// list / status

int cmd_list(const fs::path& drop, Format format, std::ostream& out) {
  const ScanResult disk = scan(drop);
  const ActivationPlan plan = plan_activations(disk);

  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, unit] : disk.units) {
    std::optional<Version> active;
    const bool pin_dangling =
        unit.pin && std::find(unit.versions.begin(), unit.versions.end(), *unit.pin) ==
                        unit.versions.end();
    if (!unit.disabled && !pin_dangling) active = resolved_version(unit);
    for (const auto& v : unit.versions) {
      rows.push_back({name, v.to_string(), active == v ? "yes" : "no",
                      unit.pin == v ? "yes" : "no", unit.disabled ? "disabled" : "ok", ""});
    }
  }

  std::vector<Reject> rejects = disk.rejects;
  rejects.insert(rejects.end(), plan.notes.begin(), plan.notes.end());
  for (const auto& r : rejects) {
    const fs::path rel = r.path.lexically_relative(drop);
    auto part = rel.begin();
    const std::string name = part != rel.end() ? (part++)->string() : r.path.string();
    const std::string version =
        part != rel.end() && *part != kPinFile ? part->string() : std::string("-");
    rows.push_back({name, version, "no", "-", r.code, r.detail});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a[0] < b[0];
  });
  print_table(out, format, {"unit", "version", "active", "pinned", "status", "detail"}, rows);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(HostConfig config, bool demo, const std::string& fixtures,
            std::int64_t max_runtime_ms, std::ostream& out, std::ostream& err) {
  if (config.diagnostics == "stderr") {
    config.sink = std::make_shared<StreamSink>(err);
  } else if (config.diagnostics == "stdout") {
    config.sink = std::make_shared<StreamSink>(out);
  }
  if (demo) config.default_policy = ErrorPolicy::kFailOpen;

  auto host = Host::start(std::move(config));
  out << fmt::format("scpa-host {} serving {} at epoch {}\n", kHostVersion,
                     host->config().drop_dir.string(), host->status().epoch);

#ifdef SCPA_WITH_DEMO
  std::unique_ptr<demo::LegacyApp> app;
  if (demo) {
    app = std::make_unique<demo::LegacyApp>(
        fixtures, [h = host.get()](std::string_view point, ValueMap payload) {
          return h->dispatch(point, std::move(payload));
        });
  }
#else
  if (demo) throw CommandFailed("this build has no demo application");
  (void)fixtures;
#endif

  const auto started = std::chrono::steady_clock::now();
  std::optional<std::uint64_t> rendered_epoch;
  while (!stop_requested().load()) {
#ifdef SCPA_WITH_DEMO
    // Re-render whenever the set of units changes.
    if (app) {
      const auto epoch = host->status().epoch;
      if (rendered_epoch != epoch) {
        out << fmt::format("-- product listing at epoch {}\n", epoch)
            << app->render_product_listing() << std::flush;
        rendered_epoch = epoch;
      }
    }
#endif
    if (max_runtime_ms >= 0 &&
        std::chrono::steady_clock::now() - started >= std::chrono::milliseconds(max_runtime_ms)) {
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  host->stop();
  out << "scpa-host stopped\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// impact / paper-metrics

int cmd_impact(const fs::path& graph_file, const std::string& changed, Format format,
               std::ostream& out) {
  const auto graph = impact::parse_graph(read_file(graph_file));
  const auto c = impact::compare_closures(graph, changed);
  const auto join = [](const std::set<std::string>& s, std::string_view sep) {
    std::string text;
    for (const auto& id : s) text += (text.empty() ? "" : std::string(sep)) + id;
    return text;
  };
  if (format == Format::kCsv) {
    print_table(out, format,
                {"changed", "layered_size", "scpa_size", "reduction_percent", "layered_closure"},
                {{changed, std::to_string(c.layered.size()), std::to_string(c.scpa.size()),
                  fmt::format("{:.2f}", impact::round_half_up(c.reduction_percent, 2)),
                  join(c.layered, ";")}});
    return kExitOk;
  }
  out << fmt::format("changed component: {}\n", changed);
  out << fmt::format("layered rebuild closure ({}): {}\n", c.layered.size(), join(c.layered, " "));
  out << fmt::format("scpa rebuild closure ({}): {}\n", c.scpa.size(), join(c.scpa, " "));
  out << fmt::format("closure size {} vs {}: {:.2f}% fewer components to rebuild\n",
                     c.layered.size(), c.scpa.size(),
                     impact::round_half_up(c.reduction_percent, 2));
  return kExitOk;
}

// Figures printed in the published evaluation, for side-by-side notes.
std::optional<double> published_change(impact::Metric metric) {
  switch (metric) {
    case impact::Metric::kDefects: return -85.54;
    case impact::Metric::kReleaseTime: return -42.99;
    case impact::Metric::kLocChanged: return 22.58;
    default: return std::nullopt;
  }
}

int cmd_paper_metrics(const fs::path& baseline_file, const fs::path& treatment_file,
                      Format format, std::ostream& out) {
  const auto baseline = impact::load_metrics_table(read_file(baseline_file));
  const auto treatment = impact::load_metrics_table(read_file(treatment_file));
  const auto report = impact::aggregate_metrics(baseline, treatment);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;
  for (const auto& c : report.changes) {
    const auto published = published_change(c.metric);
    rows.push_back({std::string(impact::metric_name(c.metric)),
                    fmt::format("{:.4f}", c.baseline_mean), fmt::format("{:.4f}", c.treatment_mean),
                    impact::format_percent(c.percent_change),
                    published ? impact::format_percent(*published) : std::string("-")});
    if (published && impact::round_half_up(c.percent_change, 2) != *published) {
      notes.push_back(fmt::format(
          "note: {} is published as {}; the table means give {} ({:.2f} points apart)",
          impact::metric_name(c.metric), impact::format_percent(*published),
          impact::format_percent(c.percent_change),
          std::fabs(impact::round_half_up(c.percent_change, 2) - *published)));
    }
  }
  print_table(out, format, {"metric", "baseline_mean", "treatment_mean", "change", "published"},
              rows);
  if (format == Format::kText) {
    out << fmt::format("means over {} projects; change = (treatment - baseline) / baseline\n",
                       baseline.size());
    for (const auto& n : notes) out << n << '\n';
  }
  return kExitOk;
}

}  // namespace

std::atomic<bool>& stop_requested() {
  static std::atomic<bool> flag{false};
  return flag;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pipeline-unit host and operator tool", "scpa-host"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kHostVersion));

  std::string drop_dir;
  std::string format_name = "text";
  const std::map<std::string, Format> formats{{"text", Format::kText}, {"csv", Format::kCsv}};
  const auto add_drop = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--drop-dir", drop_dir, "Drop folder holding unit bundles");
    if (required) opt->required();
  };
  const auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format_name, "Output format")
        ->check(CLI::IsMember({"text", "csv"}));
  };

  // run
  auto* run = app.add_subcommand("run", "Start the host and serve until interrupted");
  add_drop(run, false);
  std::string config_file;
  std::string fixtures = SCPA_DEFAULT_FIXTURES;
  bool demo = false;
  std::int64_t max_runtime_ms = -1;
  std::string diagnostics;
  run->add_option("--config", config_file, "Host config file (key: value lines)");
  run->add_option("--diagnostics", diagnostics,
                  "Where TRACE/REJECT/EPOCH lines go: stderr, stdout, none or a file");
  run->add_flag("--demo", demo, "Drive the product-listing demo app through the host");
  run->add_option("--fixtures", fixtures, "Demo fixture directory");
  run->add_option("--max-runtime-ms", max_runtime_ms, "Stop after this many milliseconds")
      ->check(CLI::NonNegativeNumber);

  // list / status
  auto* list = app.add_subcommand("list", "Show unit versions in the drop folder");
  auto* status = app.add_subcommand("status", "Same report as list");
  for (auto* cmd : {list, status}) {
    add_drop(cmd, true);
    add_format(cmd);
  }

  // deploy / disable / enable / rollback / unpin
  std::string bundle;
  auto* deploy = app.add_subcommand("deploy", "Verify a bundle and copy it into the drop folder");
  deploy->add_option("bundle", bundle, "Bundle directory (manifest.scpa + payload)")->required();
  add_drop(deploy, true);

  std::string unit_name;
  auto* disable = app.add_subcommand("disable", "Switch a unit off with the disabled marker");
  auto* enable = app.add_subcommand("enable", "Remove the disabled marker");
  auto* rollback = app.add_subcommand("rollback", "Pin the next older version of a unit");
  auto* unpin = app.add_subcommand("unpin", "Remove a unit's version pin");
  for (auto* cmd : {disable, enable, rollback, unpin}) {
    cmd->add_option("name", unit_name, "Unit name")->required();
    add_drop(cmd, true);
  }

  // impact / paper-metrics
  std::string graph_file, changed;
  auto* impact_cmd = app.add_subcommand("impact", "Layered vs self-contained rebuild closure");
  impact_cmd->add_option("--graph", graph_file, "Graph file")->required();
  impact_cmd->add_option("--changed", changed, "Changed component id")->required();
  add_format(impact_cmd);

  std::string baseline_file, treatment_file;
  auto* metrics = app.add_subcommand("paper-metrics", "Percent change between metric tables");
  metrics->add_option("--baseline", baseline_file, "Baseline CSV")->required();
  metrics->add_option("--treatment", treatment_file, "Treatment CSV")->required();
  add_format(metrics);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const Format format = formats.at(format_name);

  try {
    if (run->parsed()) {
      HostConfig config = config_file.empty() ? HostConfig{} : load_host_config(config_file);
      if (!drop_dir.empty()) config.drop_dir = drop_dir;
      if (!diagnostics.empty()) config.diagnostics = diagnostics;
      if (config.drop_dir.empty()) {
        err << "run: --drop-dir is required (or drop_dir in --config)\n" << run->help();
        return kExitUsage;
      }
      return cmd_run(std::move(config), demo, fixtures, max_runtime_ms, out, err);
    }
    if (list->parsed() || status->parsed()) return cmd_list(drop_dir, format, out);
    if (deploy->parsed()) {
      const auto r = deploy_bundle(bundle, drop_dir);
      out << fmt::format("{} {}@{}{}\n", to_string(r.outcome), r.name, r.version.to_string(),
                         r.outcome == DeployOutcome::kUnchanged ? " (identical bundle, no-op)"
                                                                : "");
      return kExitOk;
    }
    if (disable->parsed() || enable->parsed()) {
      const bool off = disable->parsed();
      const bool changed_state = set_disabled(drop_dir, unit_name, off);
      out << fmt::format("{} {}{}\n", off ? "disabled" : "enabled", unit_name,
                         changed_state ? "" : " (already)");
      return kExitOk;
    }
    if (rollback->parsed()) {
      const Version v = pin_previous_version(drop_dir, unit_name);
      out << fmt::format("pinned {}@{}\n", unit_name, v.to_string());
      return kExitOk;
    }
    if (unpin->parsed()) {
      const bool had = clear_pin(drop_dir, unit_name);
      out << fmt::format("unpinned {}{}\n", unit_name, had ? "" : " (no pin)");
      return kExitOk;
    }
    if (impact_cmd->parsed()) return cmd_impact(graph_file, changed, format, out);
    if (metrics->parsed()) {
      return cmd_paper_metrics(baseline_file, treatment_file, format, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace scpa::cli

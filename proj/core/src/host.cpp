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

#include "scpa/host.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "scpa/loader.hpp"

namespace fs = std::filesystem;

namespace scpa {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::int64_t parse_ms(std::string_view key, std::string_view value) {
  std::int64_t ms = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), ms);
  if (ec != std::errc{} || p != value.data() + value.size() || value.empty()) {
    throw std::invalid_argument(fmt::format("config `{}`: `{}` is not an integer", key, value));
  }
  return ms;
}

Value config_literal(std::string_view text) {
  if (text == "true") return Value(true);
  if (text == "false") return Value(false);
  std::int64_t i = 0;
  auto [ip, iec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (iec == std::errc{} && ip == text.data() + text.size() && !text.empty()) return Value(i);
  double d = 0;
  auto [dp, dec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (dec == std::errc{} && dp == text.data() + text.size() && !text.empty()) return Value(d);
  return Value(std::string(text));
}

std::string random_prefix() {
  std::random_device rd;
  return fmt::format("{:08x}", rd());
}

}  // namespace

void HostConfig::validate() const {
  if (scan_interval < std::chrono::milliseconds(10)) {
    throw std::invalid_argument("scan interval must be at least 10 ms");
  }
  if (unit_timeout < std::chrono::milliseconds(1)) {
    throw std::invalid_argument("unit timeout must be at least 1 ms");
  }
}

HostConfig parse_host_config(std::string_view text, const fs::path& base_dir) {
  HostConfig config;
  const auto resolve = [&](std::string_view p) {
    fs::path path{std::string(p)};
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument(fmt::format("config line {}: expected `key: value`", line_no));
    }
    const auto key = trim(line.substr(0, colon));
    const auto value = trim(line.substr(colon + 1));

    if (key == "drop_dir") {
      config.drop_dir = resolve(value);
    } else if (key == "scan_interval_ms") {
      config.scan_interval = std::chrono::milliseconds(parse_ms(key, value));
    } else if (key == "unit_timeout_ms") {
      config.unit_timeout = std::chrono::milliseconds(parse_ms(key, value));
    } else if (key == "error_policy") {
      auto policy = parse_error_policy(value);
      if (!policy) {
        throw std::invalid_argument(
            fmt::format("config `error_policy`: expected fail-open or fail-closed"));
      }
      config.default_policy = *policy;
    } else if (key == "diagnostics") {
      config.diagnostics = (value == "stderr" || value == "stdout" || value == "none")
                               ? std::string(value)
                               : resolve(value).string();
    } else if (key == "data_root") {
      config.data_root = resolve(value);
    } else if (key.substr(0, 5) == "unit.") {
      const auto rest = key.substr(5);
      const auto dot = rest.find('.');
      if (dot == std::string_view::npos || dot == 0 || dot + 1 == rest.size()) {
        throw std::invalid_argument(
            fmt::format("config line {}: expected unit.<name>.<key>", line_no));
      }
      config.unit_config[std::string(rest.substr(0, dot))].set(
          std::string(rest.substr(dot + 1)), config_literal(value));
    } else {
      throw std::invalid_argument(fmt::format("config line {}: unknown key `{}`", line_no, key));
    }
  }
  return config;
}

HostConfig load_host_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(fmt::format("cannot read config {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_host_config(text.str(), path.parent_path());
}

Host::Host(HostConfig config)
    : config_(std::move(config)),
      started_(std::chrono::steady_clock::now()),
      id_prefix_(random_prefix()) {
  sink_ = config_.sink ? config_.sink : make_sink(config_.diagnostics);
  if (config_.data_root.empty()) config_.data_root = config_.drop_dir / ".scpa-data";

  Registry::Options options;
  options.host_version = std::string(kHostVersion);
  options.data_root = config_.data_root;
  options.unit_config = [configs = config_.unit_config](const Manifest& m) {
    auto it = configs.find(m.name);
    return it == configs.end() ? ValueMap{} : it->second;
  };
  registry_ = std::make_unique<Registry>(config_.loader ? config_.loader : payload_loader(),
                                         std::move(options));
}

std::unique_ptr<Host> Host::start(HostConfig config) {
  config.validate();
  std::error_code ec;
  if (!fs::is_directory(config.drop_dir, ec)) {
    throw RegistryError(RegistryError::Code::kDropDirUnreadable, config.drop_dir.string(),
                        "not a readable directory");
  }
  std::unique_ptr<Host> host(new Host(std::move(config)));
  // Surface an unreadable drop dir from start() rather than the first tick.
  scan(host->config_.drop_dir);
  host->hot_swap_cycle();
  if (host->config_.watch) host->watcher_ = std::thread([h = host.get()] { h->watch_loop(); });
  return host;
}

Host::~Host() { stop(); }

void Host::stop() {
  {
    std::lock_guard lock(watch_mutex_);
    if (stopped_) return;
    stopped_ = true;
    stopping_ = true;
  }
  watch_cv_.notify_all();
  if (watcher_.joinable()) watcher_.join();

  std::lock_guard lock(coordinator_);
  registry_->shutdown(config_.unit_timeout + std::chrono::milliseconds(100));
}

void Host::watch_loop() {
  std::unique_lock lock(watch_mutex_);
  while (!stopping_) {
    if (watch_cv_.wait_for(lock, config_.scan_interval, [this] { return stopping_; })) break;
    lock.unlock();
    try {
      hot_swap_cycle();
    } catch (const std::exception& e) {
      emit(fmt::format("ERROR watcher {}", e.what()));
    }
    lock.lock();
  }
}

void Host::emit(const std::string& line) { sink_->write_line(line); }

SwapReport Host::hot_swap_cycle() {
  std::lock_guard lock(coordinator_);
  SwapReport report;
  report.epoch_before = registry_->epoch();
  report.epoch_after = report.epoch_before;

  ScanResult disk;
  try {
    disk = scan(config_.drop_dir);
  } catch (const RegistryError& e) {
    report.rejects.push_back({config_.drop_dir, std::string(e.code_name()), e.detail()});
    const auto line = format_reject_line(config_.drop_dir.string(), e.code_name(), e.detail());
    if (last_rejects_[config_.drop_dir.string()] != line) emit(line);
    last_rejects_[config_.drop_dir.string()] = line;
    return report;
  }

  const ActivationPlan plan = plan_activations(disk, [this](const Manifest& m) {
    return registry_->has_failed(m.name, m.version, m.checksum);
  });

  // Only repeat a REJECT line when its content changes.
  report.rejects = disk.rejects;
  report.rejects.insert(report.rejects.end(), plan.notes.begin(), plan.notes.end());
  std::map<std::string, std::string> current_rejects;
  for (const auto& r : report.rejects) {
    const auto line = format_reject_line(r.path.string(), r.code, r.detail);
    if (last_rejects_[r.path.string()] != line) emit(line);
    current_rejects[r.path.string()] = line;
  }
  last_rejects_ = std::move(current_rejects);

  for (const auto& name : registry_->snapshot()->unit_names()) {
    if (plan.targets.contains(name) || plan.held.contains(name)) continue;
    const auto version = registry_->active_version(name);
    const auto snap = registry_->deactivate(name);
    emit(format_epoch_line(snap->epoch, fmt::format("deactivate {}@{}", name,
                                                    version ? version->to_string() : "?")));
    report.deactivated.push_back(name);
  }

  for (const auto& [name, deployment] : plan.targets) {
    const auto active = registry_->active_version(name);
    if (active == deployment.manifest.version &&
        registry_->active_checksum(name) == deployment.manifest.checksum) {
      continue;
    }
    const auto label = fmt::format("{}@{}", name, deployment.manifest.version.to_string());
    try {
      const auto snap = registry_->activate(deployment);
      emit(format_epoch_line(
          snap->epoch, active ? fmt::format("swap {}@{} -> {}", name, active->to_string(),
                                            deployment.manifest.version.to_string())
                              : fmt::format("activate {}", label)));
      report.activated.push_back(label);
    } catch (const RegistryError& e) {
      emit(format_reject_line(deployment.bundle_dir.string(), e.code_name(), e.detail()));
      report.failed.push_back(label);
    }
  }

  report.retired = registry_->reap();
  report.epoch_after = registry_->epoch();
  return report;
}

SwapReport Host::rollback(std::string_view name) {
  const Version pinned = pin_previous_version(config_.drop_dir, name);
  registry_->set_pin(name, pinned);
  return hot_swap_cycle();
}

ValueMap Host::dispatch(std::string_view extension_point, ValueMap payload) {
  return dispatch(extension_point, std::move(payload), config_.default_policy);
}

ValueMap Host::dispatch(std::string_view extension_point, ValueMap payload,
                        ErrorPolicy policy) {
  return dispatch_envelope(extension_point, std::move(payload), policy).payload;
}

Envelope Host::dispatch_envelope(std::string_view extension_point, ValueMap payload,
                                 ErrorPolicy policy) {
  // One snapshot for the whole run: a concurrent swap cannot leak in.
  const auto snap = registry_->snapshot();
  Envelope env;
  env.id = fmt::format("{}-{:08x}", id_prefix_, next_envelope_.fetch_add(1));
  env.extension_point = std::string(extension_point);
  env.payload = std::move(payload);

  ChainOptions options;
  options.timeout = config_.unit_timeout;
  options.trace_sink = sink_.get();
  return run_chain(*snap, extension_point, std::move(env), policy, options);
}

HostStatus Host::status() const {
  HostStatus status;
  status.epoch = registry_->epoch();
  status.drop_dir = config_.drop_dir;
  status.uptime = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started_);

  // State of the latest incarnation; counters summed over incarnations so
  // they never go backwards for a unit version.
  std::map<std::pair<std::string, Version>, UnitStatus> latest;
  std::map<std::pair<std::string, Version>, std::uint64_t> total_micros;
  for (const auto& r : registry_->records()) {
    UnitStatus& u = latest[{r.name, r.version}];
    u.name = r.name;
    u.version = r.version;
    u.state = r.state;
    u.failure = r.failure;
    if (r.slot) {
      u.dispatches += r.slot->calls.load();
      u.errors += r.slot->errors.load();
      u.in_flight += r.slot->in_flight.load();
      total_micros[{r.name, r.version}] += r.slot->total_micros.load();
    }
  }
  for (auto& [key, u] : latest) {
    if (u.dispatches > 0) {
      u.mean_micros =
          static_cast<double>(total_micros[key]) / static_cast<double>(u.dispatches);
    }
  }
  for (auto& [key, u] : latest) status.units.push_back(std::move(u));
  return status;
}

std::shared_ptr<const RegistrySnapshot> Host::snapshot() const { return registry_->snapshot(); }

}  // namespace scpa

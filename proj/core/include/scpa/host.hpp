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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "scpa/chain.hpp"
#include "scpa/diagnostics.hpp"
#include "scpa/drop_folder.hpp"
#include "scpa/registry.hpp"

namespace scpa {

inline constexpr std::string_view kHostVersion = "1.0.0";

struct HostConfig {
  std::filesystem::path drop_dir;
  std::chrono::milliseconds scan_interval{1000};
  ErrorPolicy default_policy = ErrorPolicy::kFailClosed;
  std::chrono::milliseconds unit_timeout = kDefaultUnitTimeout;
  /// "stderr", "stdout", "none" or a file path; ignored when `sink` is set.
  std::string diagnostics = "stderr";
  std::shared_ptr<DiagnosticSink> sink;

  /// Per-unit settings handed to load() through HostContext::config.
  std::map<std::string, ValueMap, std::less<>> unit_config;
  /// Defaults to `<drop_dir>/.scpa-data`.
  std::filesystem::path data_root;
  /// Run the polling watcher thread. Tests drive hot_swap_cycle() directly.
  bool watch = true;
  /// Defaults to payload_loader().
  UnitLoader loader;

  /// Throws std::invalid_argument when scan_interval < 10 ms or
  /// unit_timeout < 1 ms.
  void validate() const;
};

/// Parses `key: value` lines:
///   drop_dir, scan_interval_ms, error_policy (fail-open|fail-closed),
///   unit_timeout_ms, diagnostics, data_root, unit.<name>.<key>
/// Relative paths are resolved against `base_dir`.
HostConfig parse_host_config(std::string_view text,
                             const std::filesystem::path& base_dir = {});
HostConfig load_host_config(const std::filesystem::path& path);

struct SwapReport {
  std::uint64_t epoch_before = 0;
  std::uint64_t epoch_after = 0;
  std::vector<std::string> deactivated;
  std::vector<std::string> activated;  // "<name>@<version>"
  std::vector<std::string> failed;
  std::vector<Reject> rejects;
  std::size_t retired = 0;

  bool changed() const { return epoch_after != epoch_before; }
};

struct UnitStatus {
  std::string name;
  Version version;
  UnitState state = UnitState::kDiscovered;
  std::uint64_t dispatches = 0;
  std::uint64_t errors = 0;
  double mean_micros = 0.0;
  std::uint64_t in_flight = 0;
  std::string failure;
};

struct HostStatus {
  std::uint64_t epoch = 0;
  std::vector<UnitStatus> units;
  std::filesystem::path drop_dir;
  std::chrono::milliseconds uptime{0};
};

/// Long-running runtime: owns the registry, polls the drop folder and
/// dispatches envelopes. dispatch() may be called from any thread; every
/// dispatch runs against one snapshot from start to finish.
class Host {
 public:
  /// Scans and activates before returning. Throws RegistryError
  /// kDropDirUnreadable or std::invalid_argument for a bad config.
  static std::unique_ptr<Host> start(HostConfig config);
  ~Host();

  Host(const Host&) = delete;
  Host& operator=(const Host&) = delete;

  /// Stops the watcher and retires every unit. Idempotent.
  void stop();

  ValueMap dispatch(std::string_view extension_point, ValueMap payload);
  ValueMap dispatch(std::string_view extension_point, ValueMap payload, ErrorPolicy policy);
  /// Like dispatch() but returns the envelope with its trace.
  Envelope dispatch_envelope(std::string_view extension_point, ValueMap payload,
                             ErrorPolicy policy);

  /// One watcher tick: diff the drop folder against the registry, apply
  /// deactivations then activations (one epoch each) and retire drained
  /// versions. Never throws for bad bundles.
  SwapReport hot_swap_cycle();

  /// Pins the previous version on disk and applies it immediately.
  SwapReport rollback(std::string_view name);

  HostStatus status() const;
  std::shared_ptr<const RegistrySnapshot> snapshot() const;
  const HostConfig& config() const { return config_; }
  const Registry& registry() const { return *registry_; }

 private:
  explicit Host(HostConfig config);
  void watch_loop();
  void emit(const std::string& line);

  HostConfig config_;
  std::shared_ptr<DiagnosticSink> sink_;
  std::unique_ptr<Registry> registry_;
  const std::chrono::steady_clock::time_point started_;
  const std::string id_prefix_;
  std::atomic<std::uint64_t> next_envelope_{1};

  std::mutex coordinator_;  // serialises hot_swap_cycle / rollback / stop
  std::map<std::string, std::string> last_rejects_;

  std::mutex watch_mutex_;
  std::condition_variable watch_cv_;
  bool stopping_ = false;
  bool stopped_ = false;
  std::thread watcher_;
};

}  // namespace scpa

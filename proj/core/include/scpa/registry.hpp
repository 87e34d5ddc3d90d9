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
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scpa/manifest.hpp"
#include "scpa/semver.hpp"
#include "scpa/unit.hpp"

namespace scpa {

enum class UnitState { kDiscovered, kValidated, kActive, kDraining, kRetired, kFailed };

std::string_view to_string(UnitState state);
/// Discovered→Validated→Active→Draining→Retired, and any non-Failed state
/// may move to Failed.
bool is_legal_transition(UnitState from, UnitState to);

class RegistryError : public std::runtime_error {
 public:
  enum class Code {
    kLoadFailed,
    kNotActive,
    kNoPriorVersion,
    kPinMissing,
    kDropDirUnreadable,
    kDeployFailed,
  };

  RegistryError(Code code, std::string subject, std::string detail = {});

  Code code() const noexcept { return code_; }
  std::string_view code_name() const noexcept;
  const std::string& subject() const noexcept { return subject_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Code code_;
  std::string subject_;
  std::string detail_;
};

/// A manifest plus the directory its payload_ref is relative to.
struct Deployment {
  Manifest manifest;
  std::filesystem::path bundle_dir;
};

/// One loaded incarnation of a unit version. Snapshots share ownership, so a
/// slot stays alive while any dispatch still holds a snapshot that routes to
/// it; the registry only unloads it once it is the sole owner.
struct UnitSlot {
  UnitSlot(std::shared_ptr<const Manifest> m, std::shared_ptr<PipelineUnit> u)
      : manifest(std::move(m)), unit(std::move(u)) {}

  std::shared_ptr<const Manifest> manifest;
  std::shared_ptr<PipelineUnit> unit;
  std::mutex gate;  // serialises calls when the unit is not reentrant

  std::atomic<std::uint64_t> in_flight{0};
  std::atomic<std::uint64_t> calls{0};
  std::atomic<std::uint64_t> errors{0};
  std::atomic<std::uint64_t> total_micros{0};
};

struct HandlerRef {
  std::string unit;
  Version version;
  std::string handler;
  Layer layer = Layer::kBusiness;
  int priority = 0;
  bool reentrant = false;
  std::shared_ptr<UnitSlot> slot;

  /// Compares routing identity only; the slot is ignored.
  friend bool operator==(const HandlerRef& a, const HandlerRef& b) {
    return a.unit == b.unit && a.version == b.version && a.handler == b.handler &&
           a.layer == b.layer && a.priority == b.priority && a.reentrant == b.reentrant;
  }
};

/// Ascending (priority, unit name); handlers of one unit keep manifest order.
bool handler_precedes(const HandlerRef& a, const HandlerRef& b);

using RouteTable = std::map<std::string, std::vector<HandlerRef>, std::less<>>;

/// Immutable view of every active handler at one epoch.
struct RegistrySnapshot {
  std::uint64_t epoch = 0;
  RouteTable routes;

  /// Empty for unbound extension points.
  std::span<const HandlerRef> route(std::string_view extension_point) const;
  std::optional<Version> version_of(std::string_view unit) const;
  std::vector<std::string> unit_names() const;
};

/// Builds the route table for a set of active manifests, as if each had been
/// activated into an empty registry.
RouteTable build_routes(std::span<const Manifest> manifests);

/// Creates the unit instance for a deployment; throws on failure.
using UnitLoader = std::function<std::shared_ptr<PipelineUnit>(const Deployment&)>;

struct Transition {
  std::string unit;
  Version version;
  std::uint64_t incarnation = 0;
  UnitState from;
  UnitState to;
  std::string reason;
};

struct UnitRecord {
  std::string name;
  Version version;
  std::string checksum;
  std::uint64_t incarnation = 0;
  UnitState state = UnitState::kDiscovered;
  std::string failure;
  std::shared_ptr<UnitSlot> slot;  // null unless load succeeded
};

/// Picks the version to run: the pin when set, otherwise the highest
/// available. Throws RegistryError(kPinMissing) for a pin not in `available`.
Version resolve_active(std::string_view name, std::span<const Version> available,
                       std::optional<Version> pin);

/// Owns unit lifecycles and publishes snapshots. Mutating calls must come
/// from a single coordinator; snapshot() may be called from any thread.
class Registry {
 public:
  struct Options {
    std::string host_version = "0.0.0";
    /// Units get `<data_root>/<name>` as their data directory when set.
    std::filesystem::path data_root;
    std::function<ValueMap(const Manifest&)> unit_config;
  };

  explicit Registry(UnitLoader loader);
  Registry(UnitLoader loader, Options options);
  ~Registry();

  Registry(const Registry&) = delete;
  Registry& operator=(const Registry&) = delete;

  std::shared_ptr<const RegistrySnapshot> snapshot() const;
  std::uint64_t epoch() const { return snapshot()->epoch; }

  /// Loads and publishes `deployment`, replacing any other active version of
  /// the same unit in the same epoch (the old one starts draining). Returns
  /// the current snapshot unchanged if this exact build is already active.
  /// Throws RegistryError(kLoadFailed); the version is then Failed.
  std::shared_ptr<const RegistrySnapshot> activate(const Deployment& deployment);

  /// Throws RegistryError(kNotActive).
  std::shared_ptr<const RegistrySnapshot> deactivate(std::string_view name);

  /// Pins the next-highest version below the active one and swaps to it in
  /// one epoch. Throws RegistryError(kNoPriorVersion) or kNotActive.
  std::shared_ptr<const RegistrySnapshot> rollback(std::string_view name,
                                                   std::span<const Deployment> available);

  /// Retires draining versions no dispatch can reach any more, calling
  /// unload() on each. Returns how many were retired.
  std::size_t reap();

  /// Deactivates everything and retires what has drained within `grace`.
  void shutdown(std::chrono::milliseconds grace);

  std::optional<Version> pin(std::string_view name) const;
  void set_pin(std::string_view name, std::optional<Version> version);

  std::optional<Version> active_version(std::string_view name) const;
  std::optional<std::string> active_checksum(std::string_view name) const;
  bool has_failed(std::string_view name, const Version& version,
                  std::string_view checksum) const;

  std::vector<UnitRecord> records() const;
  std::vector<Transition> transitions() const;

 private:
  UnitRecord& new_record(const Manifest& manifest);
  void transition(UnitRecord& record, UnitState to, std::string reason);
  void publish(std::shared_ptr<const RegistrySnapshot> next);
  UnitRecord* active_record(std::string_view name);
  const UnitRecord* active_record(std::string_view name) const;

  UnitLoader loader_;
  Options options_;

  mutable std::mutex mutex_;  // guards everything below except current_
  std::deque<UnitRecord> records_;
  std::vector<Transition> transitions_;
  std::map<std::string, std::size_t, std::less<>> active_;
  std::map<std::string, Version, std::less<>> pins_;
  std::uint64_t next_incarnation_ = 1;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const RegistrySnapshot> current_;
};

}  // namespace scpa

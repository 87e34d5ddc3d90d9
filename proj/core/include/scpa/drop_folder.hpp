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

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scpa/registry.hpp"

namespace scpa {

// Drop folder layout:
//
//   <drop>/<name>/<version>/manifest.scpa   one bundle per version directory
//   <drop>/<name>/<version>/<payload_ref>
//   <drop>/<name>/pin                       optional, "pin: <version>"
//   <drop>/<name>/disabled                  optional empty marker
//
// Entries whose names start with '.' are ignored; deploys stage there.

inline constexpr std::string_view kManifestFile = "manifest.scpa";
inline constexpr std::string_view kPinFile = "pin";
inline constexpr std::string_view kDisabledFile = "disabled";

struct Reject {
  std::filesystem::path path;
  std::string code;
  std::string detail;

  friend bool operator==(const Reject&, const Reject&) = default;
};

struct UnitDiskState {
  std::string name;
  std::optional<Version> pin;
  bool bad_pin = false;  // a pin file exists but does not parse
  bool disabled = false;
  std::vector<Version> versions;  // valid bundles, ascending
  std::size_t rejected_bundles = 0;
};

struct ScanResult {
  std::filesystem::path drop_dir;
  std::vector<Deployment> discoveries;
  std::vector<Reject> rejects;
  std::map<std::string, UnitDiskState, std::less<>> units;
};

/// Reads the drop folder. Malformed bundles become rejects; only an
/// unreadable drop directory throws (RegistryError kDropDirUnreadable).
ScanResult scan(const std::filesystem::path& drop_dir);

/// What the registry should be running, derived from a scan.
struct ActivationPlan {
  std::map<std::string, Deployment, std::less<>> targets;
  /// Units whose on-disk state is ambiguous this tick (bad pin, only
  /// incomplete bundles); whatever is running for them stays untouched.
  std::set<std::string, std::less<>> held;
  std::vector<Reject> notes;
};

/// `failed` reports builds that must not be retried.
ActivationPlan plan_activations(
    const ScanResult& scan,
    const std::function<bool(const Manifest&)>& failed = {});

/// Reads a bundle directory (manifest + payload) and verifies its checksum.
/// Throws ManifestError, ChecksumMismatch or std::runtime_error.
Deployment read_bundle(const std::filesystem::path& bundle_dir);

std::optional<Version> read_pin(const std::filesystem::path& unit_dir);

/// Writes `<drop>/<name>/pin` atomically. The version must exist on disk
/// (RegistryError kPinMissing otherwise).
void write_pin(const std::filesystem::path& drop_dir, std::string_view name,
               const Version& version);
/// Returns false if there was no pin.
bool clear_pin(const std::filesystem::path& drop_dir, std::string_view name);

/// Creates or removes the `disabled` marker. Returns false when the marker
/// was already in the requested state.
bool set_disabled(const std::filesystem::path& drop_dir, std::string_view name,
                  bool disabled);

enum class DeployOutcome { kDeployed, kReplaced, kUnchanged };
std::string_view to_string(DeployOutcome outcome);

struct DeployResult {
  DeployOutcome outcome;
  std::string name;
  Version version;
  std::filesystem::path target;
};

/// Verifies `bundle_dir` and copies it to `<drop>/<name>/<version>` via a
/// staging directory and rename. Re-deploying identical content is a no-op.
DeployResult deploy_bundle(const std::filesystem::path& bundle_dir,
                           const std::filesystem::path& drop_dir);

/// The version a host would run for `name` given pin and valid bundles, or
/// nullopt when the unit has no valid bundle.
std::optional<Version> resolved_version(const UnitDiskState& unit);

/// Pins the next-highest valid version below the currently resolved one.
/// Throws RegistryError kNoPriorVersion (or kNotActive if nothing resolves).
Version pin_previous_version(const std::filesystem::path& drop_dir, std::string_view name);

}  // namespace scpa

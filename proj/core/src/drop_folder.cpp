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

#include "scpa/drop_folder.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <unistd.h>

#include "scpa/digest.hpp"

namespace fs = std::filesystem;

namespace scpa {
namespace {

bool hidden(const fs::path& p) {
  const auto name = p.filename().string();
  return !name.empty() && name.front() == '.';
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string unique_suffix() {
  static std::atomic<unsigned> counter{0};
  static const unsigned nonce = std::random_device{}();
  return fmt::format("{}-{:x}-{}", ::getpid(), nonce, counter.fetch_add(1));
}

void write_file_atomically(const fs::path& target, std::string_view content) {
  const fs::path tmp =
      target.parent_path() / fmt::format(".{}.tmp-{}", target.filename().string(),
                                         unique_suffix());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << content;
    if (!out.flush()) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error(fmt::format("cannot replace {}", target.string()));
  }
}

std::vector<fs::path> sorted_children(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

void require_drop_dir(const fs::path& drop_dir) {
  std::error_code ec;
  if (!fs::is_directory(drop_dir, ec)) {
    throw RegistryError(RegistryError::Code::kDropDirUnreadable, drop_dir.string(),
                        "not a readable directory");
  }
}

std::optional<Version> parse_pin_text(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) {
    text.remove_suffix(1);
  }
  constexpr std::string_view kPrefix = "pin:";
  if (text.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  text.remove_prefix(kPrefix.size());
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  if (text.find('\n') != std::string_view::npos) return std::nullopt;
  return Version::parse(text);
}

}  // namespace

Deployment read_bundle(const fs::path& bundle_dir) {
  const fs::path manifest_path = bundle_dir / std::string(kManifestFile);
  if (!fs::is_regular_file(manifest_path)) {
    throw std::runtime_error(fmt::format("MissingManifest: no {} in {}", kManifestFile,
                                         bundle_dir.string()));
  }
  Deployment d;
  d.manifest = parse_manifest(read_text(manifest_path));
  d.bundle_dir = bundle_dir;
  const fs::path payload = bundle_dir / d.manifest.payload_ref;
  if (!fs::is_regular_file(payload)) {
    throw std::runtime_error(fmt::format("PayloadMissing: {}", payload.string()));
  }
  const auto actual = sha256_file(payload);
  if (actual != d.manifest.checksum) throw ChecksumMismatch(d.manifest.checksum, actual);
  return d;
}

std::optional<Version> read_pin(const fs::path& unit_dir) {
  const fs::path pin = unit_dir / std::string(kPinFile);
  std::error_code ec;
  if (!fs::is_regular_file(pin, ec)) return std::nullopt;
  return parse_pin_text(read_text(pin));
}

ScanResult scan(const fs::path& drop_dir) {
  require_drop_dir(drop_dir);
  ScanResult result;
  result.drop_dir = drop_dir;

  std::vector<fs::path> unit_dirs;
  try {
    unit_dirs = sorted_children(drop_dir);
  } catch (const fs::filesystem_error& e) {
    throw RegistryError(RegistryError::Code::kDropDirUnreadable, drop_dir.string(), e.what());
  }

  for (const auto& unit_dir : unit_dirs) {
    std::error_code ec;
    if (hidden(unit_dir) || !fs::is_directory(unit_dir, ec)) continue;
    const std::string name = unit_dir.filename().string();
    if (!is_valid_unit_name(name)) {
      result.rejects.push_back({unit_dir, "BadLayout", "directory is not a valid unit name"});
      continue;
    }

    UnitDiskState state;
    state.name = name;
    state.disabled = fs::exists(unit_dir / std::string(kDisabledFile), ec);
    const fs::path pin_path = unit_dir / std::string(kPinFile);
    if (fs::exists(pin_path, ec)) {
      try {
        state.pin = read_pin(unit_dir);
      } catch (const std::exception&) {
        state.pin.reset();
      }
      if (!state.pin) {
        state.bad_pin = true;
        result.rejects.push_back({pin_path, "BadPin", "expected `pin: <major.minor.patch>`"});
      }
    }

    std::vector<fs::path> version_dirs;
    try {
      version_dirs = sorted_children(unit_dir);
    } catch (const fs::filesystem_error& e) {
      result.rejects.push_back({unit_dir, "IoError", e.what()});
      continue;
    }

    for (const auto& version_dir : version_dirs) {
      if (hidden(version_dir) || !fs::is_directory(version_dir, ec)) continue;
      const std::string dir_version = version_dir.filename().string();
      auto reject = [&](std::string code, std::string detail) {
        result.rejects.push_back({version_dir, std::move(code), std::move(detail)});
        ++state.rejected_bundles;
      };

      const auto parsed_version = Version::parse(dir_version);
      if (!parsed_version) {
        reject("BadLayout", "directory is not a major.minor.patch version");
        continue;
      }
      const fs::path manifest_path = version_dir / std::string(kManifestFile);
      if (!fs::is_regular_file(manifest_path, ec)) {
        reject("MissingManifest", fmt::format("no {}", kManifestFile));
        continue;
      }
      try {
        Deployment d;
        d.manifest = parse_manifest(read_text(manifest_path));
        d.bundle_dir = version_dir;
        if (d.manifest.name != name || d.manifest.version != *parsed_version) {
          reject("NameVersionMismatch",
                 fmt::format("directory says {}@{} but manifest says {}@{}", name,
                             dir_version, d.manifest.name, d.manifest.version.to_string()));
          continue;
        }
        const fs::path payload = version_dir / d.manifest.payload_ref;
        if (!fs::is_regular_file(payload, ec)) {
          reject("PayloadMissing", d.manifest.payload_ref);
          continue;
        }
        const auto actual = sha256_file(payload);
        if (actual != d.manifest.checksum) {
          reject("ChecksumMismatch",
                 fmt::format("expected {} actual {}", d.manifest.checksum, actual));
          continue;
        }
        state.versions.push_back(d.manifest.version);
        result.discoveries.push_back(std::move(d));
      } catch (const ManifestError& e) {
        reject(std::string(e.code_name()),
               e.detail().empty() ? e.key() : e.key() + ": " + e.detail());
      } catch (const std::exception& e) {
        reject("IoError", e.what());
      }
    }
    std::sort(state.versions.begin(), state.versions.end());
    result.units.emplace(name, std::move(state));
  }
  return result;
}

ActivationPlan plan_activations(const ScanResult& scan,
                                const std::function<bool(const Manifest&)>& failed) {
  ActivationPlan plan;
  for (const auto& [name, unit] : scan.units) {
    if (unit.disabled) continue;
    // An unreadable pin leaves the operator's intent unknown.
    if (unit.bad_pin) {
      plan.held.insert(name);
      continue;
    }

    std::vector<const Deployment*> candidates;
    for (const auto& d : scan.discoveries) {
      if (d.manifest.name != name) continue;
      if (failed && failed(d.manifest)) continue;
      candidates.push_back(&d);
    }
    if (candidates.empty()) {
      if (unit.rejected_bundles > 0) plan.held.insert(name);
      continue;
    }

    std::vector<Version> available;
    for (const auto* d : candidates) available.push_back(d->manifest.version);
    try {
      const Version chosen = resolve_active(name, available, unit.pin);
      for (const auto* d : candidates) {
        if (d->manifest.version == chosen) plan.targets.emplace(name, *d);
      }
    } catch (const RegistryError& e) {
      plan.held.insert(name);
      plan.notes.push_back({scan.drop_dir / name / std::string(kPinFile),
                            std::string(e.code_name()), e.detail()});
    }
  }
  return plan;
}

void write_pin(const fs::path& drop_dir, std::string_view name, const Version& version) {
  require_drop_dir(drop_dir);
  const fs::path unit_dir = drop_dir / std::string(name);
  if (!fs::is_directory(unit_dir / version.to_string())) {
    throw RegistryError(RegistryError::Code::kPinMissing, std::string(name),
                        fmt::format("version {} is not on disk", version.to_string()));
  }
  write_file_atomically(unit_dir / std::string(kPinFile),
                        fmt::format("pin: {}\n", version.to_string()));
}

bool clear_pin(const fs::path& drop_dir, std::string_view name) {
  require_drop_dir(drop_dir);
  std::error_code ec;
  return fs::remove(drop_dir / std::string(name) / std::string(kPinFile), ec);
}

bool set_disabled(const fs::path& drop_dir, std::string_view name, bool disabled) {
  require_drop_dir(drop_dir);
  const fs::path unit_dir = drop_dir / std::string(name);
  const fs::path marker = unit_dir / std::string(kDisabledFile);
  std::error_code ec;
  if (!fs::is_directory(unit_dir, ec)) {
    throw RegistryError(RegistryError::Code::kNotActive, std::string(name),
                        "no such unit in the drop folder");
  }
  const bool present = fs::exists(marker, ec);
  if (present == disabled) return false;
  if (disabled) {
    write_file_atomically(marker, "");
  } else {
    fs::remove(marker, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot remove {}", marker.string()));
  }
  return true;
}

std::string_view to_string(DeployOutcome outcome) {
  switch (outcome) {
    case DeployOutcome::kDeployed: return "deployed";
    case DeployOutcome::kReplaced: return "replaced";
    case DeployOutcome::kUnchanged: return "unchanged";
  }
  return "deployed";
}

DeployResult deploy_bundle(const fs::path& bundle_dir, const fs::path& drop_dir) {
  require_drop_dir(drop_dir);
  Deployment source;
  try {
    source = read_bundle(bundle_dir);
  } catch (const std::exception& e) {
    throw RegistryError(RegistryError::Code::kDeployFailed, bundle_dir.string(), e.what());
  }

  const std::string& name = source.manifest.name;
  const fs::path unit_dir = drop_dir / name;
  const fs::path target = unit_dir / source.manifest.version.to_string();
  DeployResult result{DeployOutcome::kDeployed, name, source.manifest.version, target};

  std::error_code ec;
  if (fs::exists(target, ec)) {
    try {
      if (read_bundle(target).manifest == source.manifest) {
        result.outcome = DeployOutcome::kUnchanged;
        return result;
      }
    } catch (const std::exception&) {
      // broken or partial copy on disk: replace it
    }
    result.outcome = DeployOutcome::kReplaced;
  }

  fs::create_directories(unit_dir, ec);
  if (ec) {
    throw RegistryError(RegistryError::Code::kDeployFailed, name,
                        fmt::format("cannot create {}: {}", unit_dir.string(), ec.message()));
  }
  const fs::path staging = unit_dir / fmt::format(".staging-{}", unique_suffix());
  fs::copy(bundle_dir, staging, fs::copy_options::recursive, ec);
  if (ec) {
    fs::remove_all(staging, ec);
    throw RegistryError(RegistryError::Code::kDeployFailed, name,
                        fmt::format("copy failed: {}", ec.message()));
  }

  fs::path retired;
  if (result.outcome == DeployOutcome::kReplaced) {
    retired = unit_dir / fmt::format(".retired-{}", unique_suffix());
    fs::rename(target, retired, ec);
    if (ec) {
      fs::remove_all(staging, ec);
      throw RegistryError(RegistryError::Code::kDeployFailed, name,
                          fmt::format("cannot move old bundle aside: {}", ec.message()));
    }
  }
  fs::rename(staging, target, ec);
  if (ec) {
    const auto message = ec.message();
    fs::remove_all(staging, ec);
    throw RegistryError(RegistryError::Code::kDeployFailed, name,
                        fmt::format("cannot publish bundle: {}", message));
  }
  if (!retired.empty()) fs::remove_all(retired, ec);
  return result;
}

std::optional<Version> resolved_version(const UnitDiskState& unit) {
  if (unit.versions.empty()) return std::nullopt;
  if (unit.pin &&
      std::find(unit.versions.begin(), unit.versions.end(), *unit.pin) != unit.versions.end()) {
    return unit.pin;
  }
  return unit.versions.back();
}

Version pin_previous_version(const fs::path& drop_dir, std::string_view name) {
  const ScanResult result = scan(drop_dir);
  auto it = result.units.find(name);
  if (it == result.units.end() || it->second.versions.empty()) {
    throw RegistryError(RegistryError::Code::kNotActive, std::string(name),
                        "no valid bundle in the drop folder");
  }
  const UnitDiskState& unit = it->second;
  const Version current = *resolved_version(unit);
  std::optional<Version> prior;
  for (const auto& v : unit.versions) {
    if (v < current) prior = v;  // versions are ascending
  }
  if (!prior) {
    throw RegistryError(RegistryError::Code::kNoPriorVersion, std::string(name),
                        fmt::format("nothing older than {}", current.to_string()));
  }
  write_pin(drop_dir, name, *prior);
  return *prior;
}

}  // namespace scpa

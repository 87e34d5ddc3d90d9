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

#include "scpa/registry.hpp"

#include <algorithm>
#include <system_error>
#include <thread>

#include <fmt/format.h>

namespace scpa {

std::string_view to_string(UnitState state) {
  switch (state) {
    case UnitState::kDiscovered: return "Discovered";
    case UnitState::kValidated: return "Validated";
    case UnitState::kActive: return "Active";
    case UnitState::kDraining: return "Draining";
    case UnitState::kRetired: return "Retired";
    case UnitState::kFailed: return "Failed";
  }
  return "Failed";
}

bool is_legal_transition(UnitState from, UnitState to) {
  if (from == UnitState::kFailed) return false;
  if (to == UnitState::kFailed) return true;
  switch (from) {
    case UnitState::kDiscovered: return to == UnitState::kValidated;
    case UnitState::kValidated: return to == UnitState::kActive;
    case UnitState::kActive: return to == UnitState::kDraining;
    case UnitState::kDraining: return to == UnitState::kRetired;
    default: return false;
  }
}

namespace {

std::string_view registry_code_name(RegistryError::Code code) {
  using Code = RegistryError::Code;
  switch (code) {
    case Code::kLoadFailed: return "LoadFailed";
    case Code::kNotActive: return "NotActive";
    case Code::kNoPriorVersion: return "NoPriorVersion";
    case Code::kPinMissing: return "PinMissing";
    case Code::kDropDirUnreadable: return "DropDirUnreadable";
    case Code::kDeployFailed: return "DeployFailed";
  }
  return "LoadFailed";
}

}  // namespace

RegistryError::RegistryError(Code code, std::string subject, std::string detail)
    : std::runtime_error(
          detail.empty()
              ? fmt::format("{}({})", registry_code_name(code), subject)
              : fmt::format("{}({}): {}", registry_code_name(code), subject, detail)),
      code_(code),
      subject_(std::move(subject)),
      detail_(std::move(detail)) {}

std::string_view RegistryError::code_name() const noexcept {
  return registry_code_name(code_);
}

bool handler_precedes(const HandlerRef& a, const HandlerRef& b) {
  if (a.priority != b.priority) return a.priority < b.priority;
  return a.unit < b.unit;
}

std::span<const HandlerRef> RegistrySnapshot::route(std::string_view extension_point) const {
  auto it = routes.find(extension_point);
  if (it == routes.end()) return {};
  return it->second;
}

std::optional<Version> RegistrySnapshot::version_of(std::string_view unit) const {
  for (const auto& [ep, handlers] : routes) {
    for (const auto& h : handlers) {
      if (h.unit == unit) return h.version;
    }
  }
  return std::nullopt;
}

std::vector<std::string> RegistrySnapshot::unit_names() const {
  std::vector<std::string> names;
  for (const auto& [ep, handlers] : routes) {
    for (const auto& h : handlers) names.push_back(h.unit);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

namespace {

void insert_handlers(RouteTable& routes, const Manifest& manifest,
                     const std::shared_ptr<UnitSlot>& slot) {
  for (const auto& b : manifest.bindings) {
    auto& list = routes[b.extension_point];
    HandlerRef ref{manifest.name, manifest.version, b.handler,          b.layer,
                   manifest.priority, manifest.reentrant, slot};
    // upper_bound keeps earlier bindings of the same unit ahead of later ones.
    auto pos = std::upper_bound(list.begin(), list.end(), ref, handler_precedes);
    list.insert(pos, std::move(ref));
  }
}

void erase_unit(RouteTable& routes, std::string_view name) {
  for (auto it = routes.begin(); it != routes.end();) {
    auto& list = it->second;
    list.erase(std::remove_if(list.begin(), list.end(),
                              [&](const HandlerRef& h) { return h.unit == name; }),
               list.end());
    if (list.empty()) {
      it = routes.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace

RouteTable build_routes(std::span<const Manifest> manifests) {
  RouteTable routes;
  for (const auto& m : manifests) insert_handlers(routes, m, nullptr);
  return routes;
}

Version resolve_active(std::string_view name, std::span<const Version> available,
                       std::optional<Version> pin) {
  if (pin) {
    if (std::find(available.begin(), available.end(), *pin) == available.end()) {
      throw RegistryError(RegistryError::Code::kPinMissing, std::string(name),
                          fmt::format("pinned version {} is not available", pin->to_string()));
    }
    return *pin;
  }
  if (available.empty()) {
    throw std::invalid_argument(fmt::format("no versions available for {}", name));
  }
  return *std::max_element(available.begin(), available.end());
}

Registry::Registry(UnitLoader loader) : Registry(std::move(loader), Options{}) {}

Registry::Registry(UnitLoader loader, Options options)
    : loader_(std::move(loader)),
      options_(std::move(options)),
      current_(std::make_shared<const RegistrySnapshot>()) {}

Registry::~Registry() { shutdown(std::chrono::milliseconds(0)); }

std::shared_ptr<const RegistrySnapshot> Registry::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

void Registry::publish(std::shared_ptr<const RegistrySnapshot> next) {
  std::lock_guard lock(snapshot_mutex_);
  current_ = std::move(next);
}

UnitRecord& Registry::new_record(const Manifest& manifest) {
  UnitRecord& r = records_.emplace_back();
  r.name = manifest.name;
  r.version = manifest.version;
  r.checksum = manifest.checksum;
  r.incarnation = next_incarnation_++;
  r.state = UnitState::kDiscovered;
  return r;
}

void Registry::transition(UnitRecord& record, UnitState to, std::string reason) {
  transitions_.push_back(Transition{record.name, record.version, record.incarnation,
                                    record.state, to, std::move(reason)});
  record.state = to;
}

UnitRecord* Registry::active_record(std::string_view name) {
  auto it = active_.find(name);
  return it == active_.end() ? nullptr : &records_[it->second];
}

const UnitRecord* Registry::active_record(std::string_view name) const {
  auto it = active_.find(name);
  return it == active_.end() ? nullptr : &records_[it->second];
}

std::shared_ptr<const RegistrySnapshot> Registry::activate(const Deployment& deployment) {
  std::lock_guard lock(mutex_);
  const Manifest& manifest = deployment.manifest;

  if (const UnitRecord* current = active_record(manifest.name)) {
    if (current->version == manifest.version && current->checksum == manifest.checksum) {
      return snapshot();
    }
  }

  UnitRecord& record = new_record(manifest);
  const auto fail = [&](std::string reason) -> RegistryError {
    record.failure = reason;
    transition(record, UnitState::kFailed, reason);
    return RegistryError(RegistryError::Code::kLoadFailed,
                         fmt::format("{}@{}", manifest.name, manifest.version.to_string()),
                         std::move(reason));
  };

  // Re-parsing the canonical text enforces every manifest invariant, also
  // for deployments that were built in memory rather than read from disk.
  try {
    if (parse_manifest(serialize_manifest(manifest)) != manifest) {
      throw fail("manifest does not survive canonical round trip");
    }
  } catch (const ManifestError& e) {
    throw fail(e.what());
  }
  transition(record, UnitState::kValidated, "manifest valid");

  std::shared_ptr<PipelineUnit> unit;
  try {
    unit = loader_(deployment);
    if (!unit) throw std::runtime_error("loader returned no unit");
  } catch (const std::exception& e) {
    throw fail(e.what());
  }

  HostContext context;
  context.host_version = options_.host_version;
  context.unit_name = manifest.name;
  if (options_.unit_config) context.config = options_.unit_config(manifest);
  if (!options_.data_root.empty()) {
    context.data_dir = options_.data_root / manifest.name;
    std::error_code ec;
    std::filesystem::create_directories(context.data_dir, ec);
    if (ec) throw fail(fmt::format("cannot create data dir: {}", ec.message()));
  }

  LoadReport report;
  try {
    report = unit->load(context);
  } catch (const std::exception& e) {
    report = LoadReport::Failed(e.what());
  } catch (...) {
    report = LoadReport::Failed("load threw a non-standard exception");
  }
  if (!report.ok) throw fail(report.message.empty() ? "load failed" : report.message);

  auto manifest_ptr = std::make_shared<const Manifest>(manifest);
  record.slot = std::make_shared<UnitSlot>(manifest_ptr, std::move(unit));

  const auto base = snapshot();
  auto next = std::make_shared<RegistrySnapshot>();
  next->epoch = base->epoch + 1;
  next->routes = base->routes;
  erase_unit(next->routes, manifest.name);
  insert_handlers(next->routes, manifest, record.slot);

  if (UnitRecord* previous = active_record(manifest.name)) {
    transition(*previous, UnitState::kDraining,
               fmt::format("replaced by {}", manifest.version.to_string()));
  }
  transition(record, UnitState::kActive, "activated");
  active_[manifest.name] = records_.size() - 1;
  publish(std::move(next));
  return snapshot();
}

std::shared_ptr<const RegistrySnapshot> Registry::deactivate(std::string_view name) {
  std::lock_guard lock(mutex_);
  UnitRecord* record = active_record(name);
  if (record == nullptr) {
    throw RegistryError(RegistryError::Code::kNotActive, std::string(name));
  }
  const auto base = snapshot();
  auto next = std::make_shared<RegistrySnapshot>();
  next->epoch = base->epoch + 1;
  next->routes = base->routes;
  erase_unit(next->routes, name);

  transition(*record, UnitState::kDraining, "deactivated");
  active_.erase(active_.find(name));
  publish(std::move(next));
  return snapshot();
}

std::shared_ptr<const RegistrySnapshot> Registry::rollback(
    std::string_view name, std::span<const Deployment> available) {
  std::optional<Version> current;
  {
    std::lock_guard lock(mutex_);
    const UnitRecord* record = active_record(name);
    if (record == nullptr) {
      throw RegistryError(RegistryError::Code::kNotActive, std::string(name));
    }
    current = record->version;
  }

  const Deployment* prior = nullptr;
  for (const auto& d : available) {
    if (d.manifest.name != name || !(d.manifest.version < *current)) continue;
    if (has_failed(name, d.manifest.version, d.manifest.checksum)) continue;
    if (prior == nullptr || prior->manifest.version < d.manifest.version) prior = &d;
  }
  if (prior == nullptr) {
    throw RegistryError(RegistryError::Code::kNoPriorVersion, std::string(name),
                        fmt::format("nothing older than {}", current->to_string()));
  }
  auto result = activate(*prior);
  set_pin(name, prior->manifest.version);
  return result;
}

std::size_t Registry::reap() {
  std::lock_guard lock(mutex_);
  std::size_t retired = 0;
  for (auto& record : records_) {
    if (record.state != UnitState::kDraining) continue;
    // Snapshots and in-progress calls hold their own references to the slot.
    if (record.slot && record.slot.use_count() > 1) continue;
    if (record.slot && record.slot->unit) {
      try {
        record.slot->unit->unload();
      } catch (...) {
        // unload failures do not block retirement
      }
      record.slot->unit.reset();
    }
    transition(record, UnitState::kRetired, "drained");
    ++retired;
  }
  return retired;
}

void Registry::shutdown(std::chrono::milliseconds grace) {
  std::vector<std::string> names;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [name, index] : active_) names.push_back(name);
  }
  for (const auto& name : names) deactivate(name);

  const auto deadline = std::chrono::steady_clock::now() + grace;
  while (true) {
    reap();
    bool draining = false;
    {
      std::lock_guard lock(mutex_);
      for (const auto& r : records_) draining |= r.state == UnitState::kDraining;
    }
    if (!draining || std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

std::optional<Version> Registry::pin(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = pins_.find(name);
  if (it == pins_.end()) return std::nullopt;
  return it->second;
}

void Registry::set_pin(std::string_view name, std::optional<Version> version) {
  std::lock_guard lock(mutex_);
  if (version) {
    pins_.insert_or_assign(std::string(name), *version);
  } else if (auto it = pins_.find(name); it != pins_.end()) {
    pins_.erase(it);
  }
}

std::optional<Version> Registry::active_version(std::string_view name) const {
  std::lock_guard lock(mutex_);
  const UnitRecord* r = active_record(name);
  if (r == nullptr) return std::nullopt;
  return r->version;
}

std::optional<std::string> Registry::active_checksum(std::string_view name) const {
  std::lock_guard lock(mutex_);
  const UnitRecord* r = active_record(name);
  if (r == nullptr) return std::nullopt;
  return r->checksum;
}

bool Registry::has_failed(std::string_view name, const Version& version,
                          std::string_view checksum) const {
  std::lock_guard lock(mutex_);
  return std::any_of(records_.begin(), records_.end(), [&](const UnitRecord& r) {
    return r.state == UnitState::kFailed && r.name == name && r.version == version &&
           r.checksum == checksum;
  });
}

std::vector<UnitRecord> Registry::records() const {
  std::lock_guard lock(mutex_);
  return {records_.begin(), records_.end()};
}

std::vector<Transition> Registry::transitions() const {
  std::lock_guard lock(mutex_);
  return transitions_;
}

}  // namespace scpa

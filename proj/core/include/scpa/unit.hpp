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
#include <stdexcept>
#include <string>
#include <string_view>

#include "scpa/envelope.hpp"
#include "scpa/value.hpp"

namespace scpa {

/// Per-unit runtime context handed to load(). Every unit gets its own
/// data directory; the host never hands the same directory to two units.
struct HostContext {
  std::string host_version;
  std::string unit_name;
  ValueMap config;
  std::filesystem::path data_dir;
};

struct LoadReport {
  bool ok = true;
  std::string message;

  static LoadReport Ok(std::string message = {}) { return {true, std::move(message)}; }
  static LoadReport Failed(std::string message) { return {false, std::move(message)}; }
};

/// Thrown by units to signal a handler failure. Any other exception escaping
/// execute() or next() is treated the same way.
class UnitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The three-method contract every pipeline unit implements.
///
/// The host calls load() once per activation, then any number of
/// execute()/next() pairs. next() is only called after execute() succeeded on
/// the envelope it returned. `handler` is the handler name from the binding
/// that routed the call, so one unit can serve several layers.
///
/// execute() receives a const envelope and returns the transformed copy; a
/// throwing execute() leaves the chain's envelope untouched.
class PipelineUnit {
 public:
  virtual ~PipelineUnit() = default;

  virtual LoadReport load(const HostContext& context) = 0;
  virtual Envelope execute(std::string_view handler, const Envelope& env) = 0;
  virtual ChainDirective next(std::string_view handler, const Envelope& env) = 0;

  /// Called once when a retired version is released, after its last call.
  virtual void unload() {}
};

/// Shared-library units export these C symbols.
inline constexpr int kUnitAbiVersion = 1;
inline constexpr const char* kUnitCreateSymbol = "scpa_unit_create";
inline constexpr const char* kUnitDestroySymbol = "scpa_unit_destroy";
inline constexpr const char* kUnitAbiSymbol = "scpa_unit_abi_version";

using UnitCreateFn = PipelineUnit* (*)();
using UnitDestroyFn = void (*)(PipelineUnit*);
using UnitAbiFn = int (*)();

}  // namespace scpa

/// Expands to the three exported entry points for a unit class.
#define SCPA_EXPORT_UNIT(UnitClass)                                          \
  extern "C" __attribute__((visibility("default"))) scpa::PipelineUnit*      \
  scpa_unit_create() {                                                       \
    return new UnitClass();                                                  \
  }                                                                          \
  extern "C" __attribute__((visibility("default"))) void scpa_unit_destroy( \
      scpa::PipelineUnit* unit) {                                            \
    delete unit;                                                             \
  }                                                                          \
  extern "C" __attribute__((visibility("default"))) int                      \
  scpa_unit_abi_version() {                                                  \
    return scpa::kUnitAbiVersion;                                            \
  }

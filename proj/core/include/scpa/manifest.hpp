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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scpa/semver.hpp"

namespace scpa {

enum class Layer { kUi, kBusiness, kData };

std::string_view to_string(Layer layer);
std::optional<Layer> parse_layer(std::string_view text);

struct LayerBinding {
  Layer layer = Layer::kBusiness;
  std::string extension_point;
  std::string handler;

  friend bool operator==(const LayerBinding&, const LayerBinding&) = default;
};

inline constexpr int kMinPriority = 0;
inline constexpr int kMaxPriority = 10000;

/// Host-side declaration of a pipeline unit, read from `manifest.scpa`.
struct Manifest {
  std::string name;
  Version version;
  int priority = 0;
  bool reentrant = false;
  std::vector<LayerBinding> bindings;
  std::string payload_ref;
  std::string checksum;
  std::string description;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

class ManifestError : public std::runtime_error {
 public:
  enum class Code { kMissingField, kBadValue, kDuplicateBinding };

  ManifestError(Code code, std::string key, std::string detail);

  Code code() const noexcept { return code_; }
  /// The offending key (or "line N" for unparseable lines).
  const std::string& key() const noexcept { return key_; }
  const std::string& detail() const noexcept { return detail_; }
  /// "MissingField", "BadValue" or "DuplicateBinding".
  std::string_view code_name() const noexcept;

 private:
  Code code_;
  std::string key_;
  std::string detail_;
};

bool is_valid_unit_name(std::string_view name);
bool is_valid_extension_point(std::string_view ep);
bool is_valid_handler(std::string_view handler);
bool is_valid_checksum(std::string_view checksum);

/// Parses `key: value` manifest text (LF or CRLF, `#` comment lines).
/// Unknown keys are skipped and reported through `warnings` when given.
Manifest parse_manifest(std::string_view text,
                        std::vector<std::string>* warnings = nullptr);

/// Canonical text form; parse_manifest(serialize_manifest(m)) == m.
std::string serialize_manifest(const Manifest& manifest);

}  // namespace scpa

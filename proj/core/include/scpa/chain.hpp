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

#include <chrono>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scpa/diagnostics.hpp"
#include "scpa/envelope.hpp"
#include "scpa/registry.hpp"

namespace scpa {

enum class ErrorPolicy { kFailOpen, kFailClosed };

std::string_view to_string(ErrorPolicy policy);
/// Accepts "fail-open"/"fail-closed" (also with underscores).
std::optional<ErrorPolicy> parse_error_policy(std::string_view text);

/// Raised under FailClosed when a unit errors; carries the trace up to and
/// including the failing unit.
class ChainError : public std::runtime_error {
 public:
  ChainError(const HandlerRef& failing, std::string message, Envelope partial);

  const std::string& unit() const noexcept { return unit_; }
  const Version& version() const noexcept { return version_; }
  const std::string& handler() const noexcept { return handler_; }
  const std::string& message() const noexcept { return message_; }
  const Envelope& partial() const noexcept { return partial_; }

 private:
  std::string unit_;
  Version version_;
  std::string handler_;
  std::string message_;
  Envelope partial_;
};

class DivertError : public std::runtime_error {
 public:
  enum class Code { kBackwardDivert, kUnknownDivertTarget };
  DivertError(Code code, std::string unit, std::string target);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Sorts handlers of one extension point ascending by (priority, unit name).
/// Stable, so a unit's own handlers keep their relative order.
std::vector<HandlerRef> order_units(std::vector<HandlerRef> handlers);

/// Index of the next handler to run, or nullopt when the chain ends.
/// Divert must land strictly after `position`; throws DivertError otherwise.
std::optional<std::size_t> apply_directive(const ChainDirective& directive,
                                           std::size_t position,
                                           std::span<const HandlerRef> order);

inline constexpr std::chrono::milliseconds kDefaultUnitTimeout{5000};

struct ChainOptions {
  std::chrono::milliseconds timeout = kDefaultUnitTimeout;
  /// Receives one TRACE line per execution record when set.
  DiagnosticSink* trace_sink = nullptr;
};

/// Runs `env` through every handler bound to `extension_point` in
/// `snapshot`. The returned envelope carries the snapshot's epoch and one
/// trace record per executed (or failed) handler; handlers jumped over by
/// a divert are not recorded. Throws ChainError under FailClosed.
///
/// Each call runs on a worker thread so that a unit exceeding
/// `options.timeout` can be abandoned; its late result is discarded.
Envelope run_chain(const RegistrySnapshot& snapshot, std::string_view extension_point,
                   Envelope env, ErrorPolicy policy = ErrorPolicy::kFailClosed,
                   const ChainOptions& options = {});

}  // namespace scpa

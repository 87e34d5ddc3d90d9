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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scpa/value.hpp"

namespace scpa {

/// Routing decision a unit returns from next(): keep going, end the chain
/// here, or jump forward to a named unit bound to the same extension point.
class ChainDirective {
 public:
  enum class Kind { kContinue, kStop, kDivert };

  static ChainDirective Continue() { return ChainDirective(Kind::kContinue, {}); }
  static ChainDirective Stop() { return ChainDirective(Kind::kStop, {}); }
  static ChainDirective Divert(std::string target) {
    return ChainDirective(Kind::kDivert, std::move(target));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_continue() const noexcept { return kind_ == Kind::kContinue; }
  bool is_stop() const noexcept { return kind_ == Kind::kStop; }
  bool is_divert() const noexcept { return kind_ == Kind::kDivert; }
  /// Empty unless is_divert().
  const std::string& target() const noexcept { return target_; }

  /// "continue", "stop" or "divert:<target>".
  std::string to_string() const {
    switch (kind_) {
      case Kind::kContinue: return "continue";
      case Kind::kStop: return "stop";
      case Kind::kDivert: return "divert:" + target_;
    }
    return "continue";
  }

  friend bool operator==(const ChainDirective&, const ChainDirective&) = default;

 private:
  ChainDirective(Kind kind, std::string target)
      : kind_(kind), target_(std::move(target)) {}

  Kind kind_;
  std::string target_;
};

enum class Outcome { kOk, kError, kSkipped };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kOk: return "ok";
    case Outcome::kError: return "error";
    case Outcome::kSkipped: return "skipped";
  }
  return "ok";
}

struct ExecutionRecord {
  std::string unit;
  std::string version;
  std::string handler;
  Outcome outcome = Outcome::kOk;
  std::int64_t micros = 0;
  std::optional<ChainDirective> directive;  // set iff outcome == kOk
  std::string error;                        // set iff outcome == kError

  friend bool operator==(const ExecutionRecord&, const ExecutionRecord&) = default;
};

/// The message passed down a chain. The engine owns id, extension_point,
/// epoch and trace; units may only change payload and annotations.
struct Envelope {
  std::string id;
  std::string extension_point;
  ValueMap payload;
  ValueMap annotations;
  std::uint64_t epoch = 0;
  std::vector<ExecutionRecord> trace;
};

}  // namespace scpa

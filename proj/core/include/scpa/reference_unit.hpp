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
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scpa/unit.hpp"

namespace scpa {

/// One payload transformation step of a reference unit.
struct RefAction {
  enum class Kind { kAppend, kPush, kSet, kFail, kSleep };

  Kind kind = Kind::kAppend;
  std::string key;
  Value value;           // text for append/push, literal for set
  std::string message;   // fail
  std::chrono::milliseconds delay{0};

  static RefAction Append(std::string key, std::string text);
  static RefAction Push(std::string key, std::string text);
  static RefAction Set(std::string key, Value value);
  static RefAction Fail(std::string message);
  static RefAction Sleep(std::chrono::milliseconds delay);
};

/// Behaviour for calls whose handler name (or, failing that, extension
/// point) equals `selector`.
struct RefRule {
  std::string selector;
  std::vector<RefAction> actions;
  ChainDirective directive = ChainDirective::Continue();
};

/// Declarative behaviour table for a test-double unit. Calls that match no
/// rule pass the envelope through and continue.
struct ReferenceSpec {
  std::vector<RefRule> rules;
  std::optional<std::string> load_failure;

  ReferenceSpec& on(std::string selector, std::vector<RefAction> actions,
                    ChainDirective directive = ChainDirective::Continue());
  const RefRule* match(std::string_view handler, std::string_view extension_point) const;
};

/// Parses the `.ref` table format:
///
///   # comment
///   load fail <message...>
///   rule <selector> <action> [; <action>]... => continue | stop | divert <unit>
///
/// where an action is `append <key> <text>`, `push <key> <text>`,
/// `set <key> <literal>`, `fail <message...>`, `sleep <ms>` or `pass`.
/// Throws std::invalid_argument with the line number on malformed input.
ReferenceSpec parse_reference_spec(std::string_view text);

/// Thread-safe log of the host calls a reference unit observed.
class CallLog {
 public:
  /// kExecuteEnd is logged only when execute() returns normally.
  enum class Call { kLoad, kExecute, kExecuteEnd, kNext, kUnload };
  struct Entry {
    Call call;
    std::string handler;
  };

  void record(Call call, std::string_view handler = {});
  std::vector<Entry> entries() const;
  /// True when the sequential log is a prefix of
  /// load (execute [end next])* unload, i.e. next only follows a successful
  /// execute and nothing runs before load or after unload.
  bool follows_contract() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
};

std::unique_ptr<PipelineUnit> make_reference_unit(ReferenceSpec spec,
                                                  std::shared_ptr<CallLog> log = nullptr);

}  // namespace scpa

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

#include "scpa/reference_unit.hpp"

#include <charconv>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace scpa {
namespace {

std::vector<std::string_view> tokens_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string_view>& parts, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < parts.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += parts[i];
  }
  return out;
}

Value parse_literal(std::string_view text) {
  if (text == "true") return Value(true);
  if (text == "false") return Value(false);
  std::int64_t i = 0;
  auto [ip, iec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (iec == std::errc{} && ip == text.data() + text.size()) return Value(i);
  if (text.find('.') != std::string_view::npos) {
    double d = 0;
    auto [dp, dec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (dec == std::errc{} && dp == text.data() + text.size()) return Value(d);
  }
  return Value(std::string(text));
}

[[noreturn]] void malformed(std::size_t line, std::string_view what) {
  throw std::invalid_argument(fmt::format("reference table line {}: {}", line, what));
}

RefAction parse_action(std::string_view text, std::size_t line) {
  const auto t = tokens_of(text);
  if (t.empty()) malformed(line, "empty action");
  const auto verb = t[0];
  if (verb == "append" || verb == "push") {
    if (t.size() != 3) malformed(line, fmt::format("`{}` takes <key> <text>", verb));
    return verb == "append" ? RefAction::Append(std::string(t[1]), std::string(t[2]))
                            : RefAction::Push(std::string(t[1]), std::string(t[2]));
  }
  if (verb == "set") {
    if (t.size() != 3) malformed(line, "`set` takes <key> <literal>");
    return RefAction::Set(std::string(t[1]), parse_literal(t[2]));
  }
  if (verb == "fail") {
    if (t.size() < 2) malformed(line, "`fail` takes a message");
    return RefAction::Fail(join(t, 1));
  }
  if (verb == "sleep") {
    int ms = 0;
    if (t.size() != 2) malformed(line, "`sleep` takes <ms>");
    auto [p, ec] = std::from_chars(t[1].data(), t[1].data() + t[1].size(), ms);
    if (ec != std::errc{} || p != t[1].data() + t[1].size() || ms < 0) {
      malformed(line, "bad sleep duration");
    }
    return RefAction::Sleep(std::chrono::milliseconds(ms));
  }
  malformed(line, fmt::format("unknown action `{}`", verb));
}

class ReferenceUnit final : public PipelineUnit {
 public:
  ReferenceUnit(ReferenceSpec spec, std::shared_ptr<CallLog> log)
      : spec_(std::move(spec)), log_(std::move(log)) {}

  LoadReport load(const HostContext& context) override {
    note(CallLog::Call::kLoad, context.unit_name);
    if (spec_.load_failure) return LoadReport::Failed(*spec_.load_failure);
    return LoadReport::Ok();
  }

  Envelope execute(std::string_view handler, const Envelope& env) override {
    note(CallLog::Call::kExecute, handler);
    Envelope out = env;
    if (const RefRule* rule = spec_.match(handler, env.extension_point)) {
      for (const auto& action : rule->actions) apply(action, out.payload);
    }
    note(CallLog::Call::kExecuteEnd, handler);
    return out;
  }

  ChainDirective next(std::string_view handler, const Envelope& env) override {
    note(CallLog::Call::kNext, handler);
    if (const RefRule* rule = spec_.match(handler, env.extension_point)) {
      return rule->directive;
    }
    return ChainDirective::Continue();
  }

  void unload() override { note(CallLog::Call::kUnload, {}); }

 private:
  void note(CallLog::Call call, std::string_view handler) {
    if (log_) log_->record(call, handler);
  }

  static void apply(const RefAction& action, ValueMap& payload) {
    switch (action.kind) {
      case RefAction::Kind::kAppend: {
        Value* slot = payload.find(action.key);
        if (slot == nullptr) slot = &payload.set(action.key, std::string{});
        if (!slot->is_text()) {
          throw UnitError(fmt::format("cannot append to non-text key `{}`", action.key));
        }
        slot->as_text() += action.value.as_text();
        break;
      }
      case RefAction::Kind::kPush: {
        Value* slot = payload.find(action.key);
        if (slot == nullptr) slot = &payload.set(action.key, ValueList{});
        if (!slot->is_list()) {
          throw UnitError(fmt::format("cannot push to non-list key `{}`", action.key));
        }
        slot->as_list().push_back(action.value);
        break;
      }
      case RefAction::Kind::kSet:
        payload.set(action.key, action.value);
        break;
      case RefAction::Kind::kFail:
        throw UnitError(action.message);
      case RefAction::Kind::kSleep:
        std::this_thread::sleep_for(action.delay);
        break;
    }
  }

  ReferenceSpec spec_;
  std::shared_ptr<CallLog> log_;
};

}  // namespace

RefAction RefAction::Append(std::string key, std::string text) {
  RefAction a;
  a.kind = Kind::kAppend;
  a.key = std::move(key);
  a.value = Value(std::move(text));
  return a;
}

RefAction RefAction::Push(std::string key, std::string text) {
  RefAction a = Append(std::move(key), std::move(text));
  a.kind = Kind::kPush;
  return a;
}

RefAction RefAction::Set(std::string key, Value value) {
  RefAction a;
  a.kind = Kind::kSet;
  a.key = std::move(key);
  a.value = std::move(value);
  return a;
}

RefAction RefAction::Fail(std::string message) {
  RefAction a;
  a.kind = Kind::kFail;
  a.message = std::move(message);
  return a;
}

RefAction RefAction::Sleep(std::chrono::milliseconds delay) {
  RefAction a;
  a.kind = Kind::kSleep;
  a.delay = delay;
  return a;
}

ReferenceSpec& ReferenceSpec::on(std::string selector, std::vector<RefAction> actions,
                                 ChainDirective directive) {
  rules.push_back(RefRule{std::move(selector), std::move(actions), std::move(directive)});
  return *this;
}

const RefRule* ReferenceSpec::match(std::string_view handler,
                                    std::string_view extension_point) const {
  for (const auto& r : rules) {
    if (r.selector == handler) return &r;
  }
  for (const auto& r : rules) {
    if (r.selector == extension_point) return &r;
  }
  return nullptr;
}

ReferenceSpec parse_reference_spec(std::string_view text) {
  ReferenceSpec spec;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto t = tokens_of(line);
    if (t.empty() || t[0].front() == '#') continue;

    if (t[0] == "load") {
      if (t.size() < 3 || t[1] != "fail") malformed(line_no, "expected `load fail <message>`");
      spec.load_failure = join(t, 2);
      continue;
    }
    if (t[0] != "rule" || t.size() < 2) malformed(line_no, "expected `rule` or `load`");

    const auto arrow = line.find("=>");
    if (arrow == std::string_view::npos) malformed(line_no, "missing `=> <directive>`");
    const auto body_start =
        static_cast<std::size_t>(t[1].data() - line.data()) + t[1].size();
    if (body_start > arrow) malformed(line_no, "missing actions");
    const std::string_view body = line.substr(body_start, arrow - body_start);
    const auto directive = tokens_of(line.substr(arrow + 2));

    RefRule rule;
    rule.selector = std::string(t[1]);
    std::size_t start = 0;
    while (start <= body.size()) {
      auto semi = body.find(';', start);
      if (semi == std::string_view::npos) semi = body.size();
      const auto piece = body.substr(start, semi - start);
      start = semi + 1;
      const auto words = tokens_of(piece);
      if (words.empty()) malformed(line_no, "empty action");
      if (words.size() == 1 && words[0] == "pass") continue;
      rule.actions.push_back(parse_action(piece, line_no));
    }

    if (directive.size() == 1 && directive[0] == "continue") {
      rule.directive = ChainDirective::Continue();
    } else if (directive.size() == 1 && directive[0] == "stop") {
      rule.directive = ChainDirective::Stop();
    } else if (directive.size() == 2 && directive[0] == "divert") {
      rule.directive = ChainDirective::Divert(std::string(directive[1]));
    } else {
      malformed(line_no, "directive must be continue, stop or divert <unit>");
    }
    spec.rules.push_back(std::move(rule));
  }
  return spec;
}

void CallLog::record(Call call, std::string_view handler) {
  std::lock_guard lock(mutex_);
  entries_.push_back(Entry{call, std::string(handler)});
}

std::vector<CallLog::Entry> CallLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

bool CallLog::follows_contract() const {
  enum class State { kFresh, kLoaded, kExecuting, kExecuted, kUnloaded };
  State state = State::kFresh;
  for (const auto& e : entries()) {
    switch (e.call) {
      case Call::kLoad:
        if (state != State::kFresh) return false;
        state = State::kLoaded;
        break;
      case Call::kExecute:
        // A failed execute leaves the unit in kExecuting with no end event.
        if (state != State::kLoaded && state != State::kExecuting) return false;
        state = State::kExecuting;
        break;
      case Call::kExecuteEnd:
        if (state != State::kExecuting) return false;
        state = State::kExecuted;
        break;
      case Call::kNext:
        if (state != State::kExecuted) return false;
        state = State::kLoaded;
        break;
      case Call::kUnload:
        if (state != State::kLoaded && state != State::kExecuting) return false;
        state = State::kUnloaded;
        break;
    }
  }
  return true;
}

std::unique_ptr<PipelineUnit> make_reference_unit(ReferenceSpec spec,
                                                  std::shared_ptr<CallLog> log) {
  return std::make_unique<ReferenceUnit>(std::move(spec), std::move(log));
}

}  // namespace scpa

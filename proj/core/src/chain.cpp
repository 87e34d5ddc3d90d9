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

#include "scpa/chain.hpp"

#include <algorithm>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace scpa {
namespace {

struct CallResult {
  bool ok = false;
  Envelope out;
  ChainDirective directive = ChainDirective::Continue();
  std::string error;
};

struct PendingCall {
  std::mutex mutex;
  std::condition_variable done_cv;
  bool done = false;
  CallResult result;
};

// Runs execute() then next() on a worker. The worker owns copies of
// everything it touches, so abandoning it on timeout is safe; the slot
// reference keeps the unit loaded until the call returns.
CallResult invoke(const HandlerRef& ref, const Envelope& env,
                  std::chrono::milliseconds timeout) {
  auto pending = std::make_shared<PendingCall>();
  auto slot = ref.slot;
  if (!slot || !slot->unit) {
    CallResult r;
    r.error = "unit is not loaded";
    return r;
  }

  auto work = [pending, slot, handler = ref.handler, reentrant = ref.reentrant, env]() mutable {
    CallResult r;
    {
      std::unique_lock<std::mutex> gate(slot->gate, std::defer_lock);
      if (!reentrant) gate.lock();
      slot->in_flight.fetch_add(1);
      try {
        r.out = slot->unit->execute(handler, env);
        r.directive = slot->unit->next(handler, r.out);
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      } catch (...) {
        r.error = "unit threw a non-standard exception";
      }
      slot->in_flight.fetch_sub(1);
    }
    // Drop the unit before signalling so a drained slot is reapable as soon
    // as the dispatch that used it returns.
    slot.reset();
    std::lock_guard lock(pending->mutex);
    pending->result = std::move(r);
    pending->done = true;
    pending->done_cv.notify_all();
  };

  try {
    std::thread(std::move(work)).detach();
  } catch (const std::system_error& e) {
    CallResult r;
    r.error = fmt::format("cannot start worker: {}", e.what());
    return r;
  }

  std::unique_lock lock(pending->mutex);
  if (!pending->done_cv.wait_for(lock, timeout, [&] { return pending->done; })) {
    CallResult r;
    r.error = fmt::format("timed out after {} ms", timeout.count());
    return r;
  }
  return std::move(pending->result);
}

}  // namespace

std::string_view to_string(ErrorPolicy policy) {
  return policy == ErrorPolicy::kFailOpen ? "fail-open" : "fail-closed";
}

std::optional<ErrorPolicy> parse_error_policy(std::string_view text) {
  if (text == "fail-open" || text == "fail_open" || text == "FailOpen") {
    return ErrorPolicy::kFailOpen;
  }
  if (text == "fail-closed" || text == "fail_closed" || text == "FailClosed") {
    return ErrorPolicy::kFailClosed;
  }
  return std::nullopt;
}

ChainError::ChainError(const HandlerRef& failing, std::string message, Envelope partial)
    : std::runtime_error(fmt::format("ChainError({}@{} {}): {}", failing.unit,
                                     failing.version.to_string(), failing.handler, message)),
      unit_(failing.unit),
      version_(failing.version),
      handler_(failing.handler),
      message_(std::move(message)),
      partial_(std::move(partial)) {}

DivertError::DivertError(Code code, std::string unit, std::string target)
    : std::runtime_error(code == Code::kBackwardDivert
                             ? fmt::format("BackwardDivert({} -> {})", unit, target)
                             : fmt::format("UnknownDivertTarget({} -> {})", unit, target)),
      code_(code) {}

std::vector<HandlerRef> order_units(std::vector<HandlerRef> handlers) {
  std::stable_sort(handlers.begin(), handlers.end(), handler_precedes);
  return handlers;
}

std::optional<std::size_t> apply_directive(const ChainDirective& directive,
                                           std::size_t position,
                                           std::span<const HandlerRef> order) {
  switch (directive.kind()) {
    case ChainDirective::Kind::kContinue:
      if (position + 1 >= order.size()) return std::nullopt;
      return position + 1;
    case ChainDirective::Kind::kStop:
      return std::nullopt;
    case ChainDirective::Kind::kDivert: {
      bool seen = false;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i].unit != directive.target()) continue;
        seen = true;
        if (i > position) return i;
      }
      throw DivertError(seen ? DivertError::Code::kBackwardDivert
                             : DivertError::Code::kUnknownDivertTarget,
                        order[position].unit, directive.target());
    }
  }
  return std::nullopt;
}

Envelope run_chain(const RegistrySnapshot& snapshot, std::string_view extension_point,
                   Envelope env, ErrorPolicy policy, const ChainOptions& options) {
  if (env.extension_point != extension_point) {
    throw std::invalid_argument(fmt::format("envelope is for `{}`, not `{}`",
                                            env.extension_point, extension_point));
  }
  if (!env.trace.empty()) throw std::invalid_argument("envelope trace must start empty");

  env.epoch = snapshot.epoch;
  const auto route = snapshot.route(extension_point);
  const std::vector<HandlerRef> order =
      order_units(std::vector<HandlerRef>(route.begin(), route.end()));

  std::optional<std::size_t> position;
  if (!order.empty()) position = 0;

  while (position) {
    const HandlerRef& ref = order[*position];
    const auto started = std::chrono::steady_clock::now();
    CallResult call = invoke(ref, env, options.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();

    ExecutionRecord record;
    record.unit = ref.unit;
    record.version = ref.version.to_string();
    record.handler = ref.handler;
    record.micros = std::max<std::int64_t>(0, micros);

    std::optional<std::size_t> next_position;
    if (call.ok) {
      try {
        next_position = apply_directive(call.directive, *position, order);
      } catch (const DivertError& e) {
        call.ok = false;
        call.error = e.what();
      }
    }

    if (ref.slot) {
      ref.slot->calls.fetch_add(1);
      ref.slot->total_micros.fetch_add(static_cast<std::uint64_t>(record.micros));
      if (!call.ok) ref.slot->errors.fetch_add(1);
    }

    if (call.ok) {
      record.outcome = Outcome::kOk;
      record.directive = call.directive;
      // Units only own payload and annotations; identity and trace stay ours.
      env.payload = std::move(call.out.payload);
      env.annotations = std::move(call.out.annotations);
    } else {
      record.outcome = Outcome::kError;
      record.error = call.error;
    }
    env.trace.push_back(record);
    if (options.trace_sink != nullptr) {
      options.trace_sink->write_line(format_trace_line(env.id, env.epoch, record));
    }

    if (!call.ok) {
      if (policy == ErrorPolicy::kFailClosed) throw ChainError(ref, call.error, env);
      next_position = *position + 1 < order.size()
                          ? std::optional<std::size_t>(*position + 1)
                          : std::nullopt;
    }
    position = next_position;
  }
  return env;
}

}  // namespace scpa

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
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "scpa/envelope.hpp"

namespace scpa {

/// Line-oriented machine-readable output (TRACE, REJECT, EPOCH records).
/// Implementations must accept concurrent writers.
class DiagnosticSink {
 public:
  virtual ~DiagnosticSink() = default;
  virtual void write_line(std::string_view line) = 0;
};

class NullSink final : public DiagnosticSink {
 public:
  void write_line(std::string_view) override {}
};

class StreamSink final : public DiagnosticSink {
 public:
  explicit StreamSink(std::ostream& out) : out_(out) {}
  void write_line(std::string_view line) override;

 private:
  std::mutex mutex_;
  std::ostream& out_;
};

class FileSink final : public DiagnosticSink {
 public:
  explicit FileSink(const std::filesystem::path& path);
  void write_line(std::string_view line) override;

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

/// Keeps every line in memory; used by tests and the demo driver.
class MemorySink final : public DiagnosticSink {
 public:
  void write_line(std::string_view line) override;
  std::vector<std::string> lines() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> lines_;
};

/// "stderr", "stdout", "none", or a file path.
std::shared_ptr<DiagnosticSink> make_sink(std::string_view target);

/// TRACE <envelope-id> <epoch> <unit>@<version> <handler> <outcome> <micros> <directive>
std::string format_trace_line(std::string_view envelope_id, std::uint64_t epoch,
                              const ExecutionRecord& record);
/// REJECT <path> <reason-code> <detail>
std::string format_reject_line(std::string_view path, std::string_view code,
                               std::string_view detail);
/// EPOCH <n> <reason>
std::string format_epoch_line(std::uint64_t epoch, std::string_view reason);

struct TraceLine {
  std::string envelope_id;
  std::uint64_t epoch = 0;
  std::string unit;
  std::string version;
  std::string handler;
  std::string outcome;
  std::int64_t micros = 0;
  std::string directive;
};

/// Inverse of format_trace_line; false for lines that are not TRACE records.
bool parse_trace_line(std::string_view line, TraceLine& out);

}  // namespace scpa

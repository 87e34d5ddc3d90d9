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

#include "scpa/diagnostics.hpp"

#include <charconv>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace scpa {
namespace {

// Keeps every record on one line with space-separated fields.
std::string single_token(std::string_view s) {
  std::string out(s.empty() ? std::string_view("-") : s);
  for (char& c : out) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
  }
  return out;
}

std::string single_line(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace

void StreamSink::write_line(std::string_view line) {
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
}

FileSink::FileSink(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open diagnostic file " + path.string());
}

void FileSink::write_line(std::string_view line) {
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
}

void MemorySink::write_line(std::string_view line) {
  std::lock_guard lock(mutex_);
  lines_.emplace_back(line);
}

std::vector<std::string> MemorySink::lines() const {
  std::lock_guard lock(mutex_);
  return lines_;
}

void MemorySink::clear() {
  std::lock_guard lock(mutex_);
  lines_.clear();
}

std::shared_ptr<DiagnosticSink> make_sink(std::string_view target) {
  if (target.empty() || target == "stderr") return std::make_shared<StreamSink>(std::cerr);
  if (target == "stdout") return std::make_shared<StreamSink>(std::cout);
  if (target == "none") return std::make_shared<NullSink>();
  return std::make_shared<FileSink>(std::filesystem::path(target));
}

std::string format_trace_line(std::string_view envelope_id, std::uint64_t epoch,
                              const ExecutionRecord& r) {
  return fmt::format("TRACE {} {} {}@{} {} {} {} {}", single_token(envelope_id), epoch,
                     single_token(r.unit), single_token(r.version),
                     single_token(r.handler), to_string(r.outcome), r.micros,
                     r.directive ? single_token(r.directive->to_string()) : "-");
}

std::string format_reject_line(std::string_view path, std::string_view code,
                               std::string_view detail) {
  return fmt::format("REJECT {} {} {}", single_token(path), single_token(code),
                     single_line(detail));
}

std::string format_epoch_line(std::uint64_t epoch, std::string_view reason) {
  return fmt::format("EPOCH {} {}", epoch, single_line(reason));
}

bool parse_trace_line(std::string_view line, TraceLine& out) {
  std::istringstream in{std::string(line)};
  std::string tag, unit_at_version;
  if (!(in >> tag) || tag != "TRACE") return false;
  if (!(in >> out.envelope_id >> out.epoch >> unit_at_version >> out.handler >>
        out.outcome >> out.micros >> out.directive)) {
    return false;
  }
  const auto at = unit_at_version.rfind('@');
  if (at == std::string::npos) return false;
  out.unit = unit_at_version.substr(0, at);
  out.version = unit_at_version.substr(at + 1);
  return true;
}

}  // namespace scpa

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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "scpa/manifest.hpp"

namespace scpa {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);
/// Streams the file; throws std::runtime_error if it cannot be read.
std::string sha256_file(const std::filesystem::path& path);

class ChecksumMismatch : public std::runtime_error {
 public:
  ChecksumMismatch(std::string expected, std::string actual);
  const std::string& expected() const noexcept { return expected_; }
  const std::string& actual() const noexcept { return actual_; }

 private:
  std::string expected_;
  std::string actual_;
};

/// Throws ChecksumMismatch unless SHA-256(payload) equals manifest.checksum.
void verify_payload(const Manifest& manifest, std::span<const std::uint8_t> payload);
void verify_payload(const Manifest& manifest, std::string_view payload);

}  // namespace scpa

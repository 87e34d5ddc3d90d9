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

#include "scpa/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace scpa {
namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t'; };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  if (b >= e) return {};
  return s.substr(static_cast<std::size_t>(b - s.begin()),
                  static_cast<std::size_t>(e - b));
}

std::vector<std::string_view> split_tokens(std::string_view s) {
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

[[noreturn]] void bad_value(std::string key, std::string detail) {
  throw ManifestError(ManifestError::Code::kBadValue, std::move(key), std::move(detail));
}

bool is_safe_relative_path(std::string_view ref) {
  if (ref.empty() || ref.front() == '/') return false;
  const std::filesystem::path p(ref);
  if (p.is_absolute()) return false;
  for (const auto& part : p) {
    if (part == "..") return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::kUi: return "ui";
    case Layer::kBusiness: return "business";
    case Layer::kData: return "data";
  }
  return "business";
}

std::optional<Layer> parse_layer(std::string_view text) {
  if (text == "ui") return Layer::kUi;
  if (text == "business") return Layer::kBusiness;
  if (text == "data") return Layer::kData;
  return std::nullopt;
}

ManifestError::ManifestError(Code code, std::string key, std::string detail)
    : std::runtime_error([&] {
        switch (code) {
          case Code::kMissingField: return fmt::format("MissingField({})", key);
          case Code::kBadValue: return fmt::format("BadValue({}): {}", key, detail);
          case Code::kDuplicateBinding:
            return fmt::format("DuplicateBinding({})", detail);
        }
        return key;
      }()),
      code_(code),
      key_(std::move(key)),
      detail_(std::move(detail)) {}

std::string_view ManifestError::code_name() const noexcept {
  switch (code_) {
    case Code::kMissingField: return "MissingField";
    case Code::kBadValue: return "BadValue";
    case Code::kDuplicateBinding: return "DuplicateBinding";
  }
  return "BadValue";
}

bool is_valid_unit_name(std::string_view name) {
  if (name.empty() || name.size() > 64 || !is_lower(name.front())) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return is_lower(c) || is_digit(c) || c == '-'; });
}

bool is_valid_extension_point(std::string_view ep) {
  // segment ( '.' segment )+ where segment = [a-z][a-z0-9_]*
  std::size_t segments = 0;
  std::size_t i = 0;
  while (true) {
    if (i >= ep.size() || !is_lower(ep[i])) return false;
    ++i;
    while (i < ep.size() && (is_lower(ep[i]) || is_digit(ep[i]) || ep[i] == '_')) ++i;
    ++segments;
    if (i == ep.size()) break;
    if (ep[i] != '.') return false;
    ++i;
  }
  return segments >= 2;
}

bool is_valid_handler(std::string_view handler) {
  if (handler.empty()) return false;
  const auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!alpha(handler.front())) return false;
  return std::all_of(handler.begin(), handler.end(),
                     [&](char c) { return alpha(c) || is_digit(c); });
}

bool is_valid_checksum(std::string_view checksum) {
  return checksum.size() == 64 &&
         std::all_of(checksum.begin(), checksum.end(),
                     [](char c) { return is_digit(c) || (c >= 'a' && c <= 'f'); });
}

Manifest parse_manifest(std::string_view text, std::vector<std::string>* warnings) {
  Manifest m;
  std::set<std::string, std::less<>> seen;
  std::set<std::pair<Layer, std::string>> binding_keys;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;

    const auto colon = content.find(':');
    if (colon == std::string_view::npos) {
      bad_value(fmt::format("line {}", line_no), "expected `key: value`");
    }
    const std::string key(trim(content.substr(0, colon)));
    const std::string_view value = trim(content.substr(colon + 1));

    if (key == "binding") {
      const auto tokens = split_tokens(value);
      if (tokens.size() != 3) {
        bad_value(key, "expected `<layer> <extension_point> <handler>`");
      }
      auto layer = parse_layer(tokens[0]);
      if (!layer) bad_value(key, fmt::format("unknown layer `{}`", tokens[0]));
      if (!is_valid_extension_point(tokens[1])) {
        bad_value(key, fmt::format("invalid extension point `{}`", tokens[1]));
      }
      if (!is_valid_handler(tokens[2])) {
        bad_value(key, fmt::format("invalid handler `{}`", tokens[2]));
      }
      std::string ep(tokens[1]);
      if (!binding_keys.emplace(*layer, ep).second) {
        throw ManifestError(ManifestError::Code::kDuplicateBinding, key,
                            fmt::format("{} {}", tokens[0], ep));
      }
      m.bindings.push_back(LayerBinding{*layer, std::move(ep), std::string(tokens[2])});
      continue;
    }

    static constexpr std::string_view kScalarKeys[] = {
        "name", "version", "priority", "reentrant", "payload_ref", "checksum", "description"};
    if (std::find(std::begin(kScalarKeys), std::end(kScalarKeys), key) ==
        std::end(kScalarKeys)) {
      if (warnings != nullptr) {
        warnings->push_back(fmt::format("line {}: unknown key `{}` ignored", line_no, key));
      }
      continue;
    }
    if (!seen.insert(key).second) bad_value(key, "duplicate key");

    if (key == "name") {
      if (!is_valid_unit_name(value)) {
        bad_value(key, "must match [a-z][a-z0-9-]* and be 1-64 characters");
      }
      m.name = std::string(value);
    } else if (key == "version") {
      auto v = Version::parse(value);
      if (!v) bad_value(key, fmt::format("`{}` is not major.minor.patch", value));
      m.version = *v;
    } else if (key == "priority") {
      int p = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), p);
      if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
        bad_value(key, fmt::format("`{}` is not an integer", value));
      }
      if (p < kMinPriority || p > kMaxPriority) {
        bad_value(key, fmt::format("{} outside {}..{}", p, kMinPriority, kMaxPriority));
      }
      m.priority = p;
    } else if (key == "reentrant") {
      if (value == "true") {
        m.reentrant = true;
      } else if (value == "false") {
        m.reentrant = false;
      } else {
        bad_value(key, "expected true or false");
      }
    } else if (key == "payload_ref") {
      if (!is_safe_relative_path(value)) {
        bad_value(key, "must be a relative path inside the bundle");
      }
      m.payload_ref = std::string(value);
    } else if (key == "checksum") {
      if (!is_valid_checksum(value)) bad_value(key, "expected 64 lowercase hex digits");
      m.checksum = std::string(value);
    } else if (key == "description") {
      m.description = std::string(value);
    }
  }

  for (std::string_view required :
       {"name", "version", "priority", "reentrant", "payload_ref", "checksum"}) {
    if (!seen.contains(required)) {
      throw ManifestError(ManifestError::Code::kMissingField, std::string(required), {});
    }
  }
  if (m.bindings.empty()) {
    throw ManifestError(ManifestError::Code::kMissingField, "binding", {});
  }
  return m;
}

std::string serialize_manifest(const Manifest& m) {
  std::string out;
  out += fmt::format("name: {}\n", m.name);
  out += fmt::format("version: {}\n", m.version.to_string());
  out += fmt::format("priority: {}\n", m.priority);
  out += fmt::format("reentrant: {}\n", m.reentrant ? "true" : "false");
  out += fmt::format("payload_ref: {}\n", m.payload_ref);
  out += fmt::format("checksum: {}\n", m.checksum);
  if (!m.description.empty()) out += fmt::format("description: {}\n", m.description);
  for (const auto& b : m.bindings) {
    out += fmt::format("binding: {} {} {}\n", to_string(b.layer), b.extension_point,
                       b.handler);
  }
  return out;
}

}  // namespace scpa

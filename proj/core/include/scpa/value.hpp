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

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace scpa {

class Value;

using Bytes = std::vector<std::uint8_t>;
using ValueList = std::vector<Value>;

/// Ordered text-keyed map of Values. Keys are non-empty; lookups are
/// logarithmic. Backed by a sorted vector so that Value can nest itself.
class ValueMap {
 public:
  using Entry = std::pair<std::string, Value>;
  using const_iterator = std::vector<Entry>::const_iterator;

  ValueMap() = default;
  ValueMap(std::initializer_list<Entry> entries);

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const_iterator begin() const noexcept { return entries_.begin(); }
  const_iterator end() const noexcept { return entries_.end(); }

  bool contains(std::string_view key) const { return find(key) != nullptr; }
  const Value* find(std::string_view key) const;
  Value* find(std::string_view key);
  const Value& at(std::string_view key) const;

  /// Inserts or replaces. Throws std::invalid_argument on an empty key.
  Value& set(std::string key, Value value);
  bool erase(std::string_view key);

  friend bool operator==(const ValueMap& a, const ValueMap& b);

 private:
  std::vector<Entry>::iterator lower_bound(std::string_view key);
  std::vector<Entry>::const_iterator lower_bound(std::string_view key) const;

  std::vector<Entry> entries_;
};

/// A dynamically typed payload value: text, 64-bit integer, double,
/// boolean, raw bytes, list, or nested map. Equality is deep.
class Value {
 public:
  using Storage = std::variant<std::string, std::int64_t, double, bool, Bytes,
                               ValueList, ValueMap>;

  Value() : storage_(std::string{}) {}
  Value(std::string v) : storage_(std::move(v)) {}
  Value(const char* v) : storage_(std::string(v)) {}
  Value(std::string_view v) : storage_(std::string(v)) {}
  Value(std::int64_t v) : storage_(v) {}
  Value(int v) : storage_(static_cast<std::int64_t>(v)) {}
  Value(double v) : storage_(v) {}
  Value(bool v) : storage_(v) {}
  Value(Bytes v) : storage_(std::move(v)) {}
  Value(ValueList v) : storage_(std::move(v)) {}
  Value(ValueMap v) : storage_(std::move(v)) {}

  bool is_text() const noexcept { return holds<std::string>(); }
  bool is_integer() const noexcept { return holds<std::int64_t>(); }
  bool is_decimal() const noexcept { return holds<double>(); }
  bool is_bool() const noexcept { return holds<bool>(); }
  bool is_bytes() const noexcept { return holds<Bytes>(); }
  bool is_list() const noexcept { return holds<ValueList>(); }
  bool is_map() const noexcept { return holds<ValueMap>(); }

  const std::string& as_text() const { return get<std::string>("text"); }
  std::string& as_text() { return get<std::string>("text"); }
  std::int64_t as_integer() const { return get<std::int64_t>("integer"); }
  double as_decimal() const { return get<double>("decimal"); }
  bool as_bool() const { return get<bool>("boolean"); }
  const Bytes& as_bytes() const { return get<Bytes>("bytes"); }
  const ValueList& as_list() const { return get<ValueList>("list"); }
  ValueList& as_list() { return get<ValueList>("list"); }
  const ValueMap& as_map() const { return get<ValueMap>("map"); }
  ValueMap& as_map() { return get<ValueMap>("map"); }

  /// Integer or decimal widened to double.
  double as_number() const {
    if (is_integer()) return static_cast<double>(as_integer());
    return as_decimal();
  }

  const Storage& storage() const noexcept { return storage_; }

  friend bool operator==(const Value& a, const Value& b) {
    return a.storage_ == b.storage_;
  }

 private:
  template <typename T>
  bool holds() const noexcept {
    return std::holds_alternative<T>(storage_);
  }
  template <typename T>
  const T& get(const char* what) const {
    if (const T* p = std::get_if<T>(&storage_)) return *p;
    throw std::logic_error(std::string("value is not a ") + what);
  }
  template <typename T>
  T& get(const char* what) {
    if (T* p = std::get_if<T>(&storage_)) return *p;
    throw std::logic_error(std::string("value is not a ") + what);
  }

  Storage storage_;
};

inline ValueMap::ValueMap(std::initializer_list<Entry> entries) {
  for (const auto& e : entries) set(e.first, e.second);
}

inline std::vector<ValueMap::Entry>::iterator ValueMap::lower_bound(
    std::string_view key) {
  return std::lower_bound(
      entries_.begin(), entries_.end(), key,
      [](const Entry& e, std::string_view k) { return e.first < k; });
}

inline std::vector<ValueMap::Entry>::const_iterator ValueMap::lower_bound(
    std::string_view key) const {
  return std::lower_bound(
      entries_.begin(), entries_.end(), key,
      [](const Entry& e, std::string_view k) { return e.first < k; });
}

inline const Value* ValueMap::find(std::string_view key) const {
  auto it = lower_bound(key);
  if (it != entries_.end() && it->first == key) return &it->second;
  return nullptr;
}

inline Value* ValueMap::find(std::string_view key) {
  auto it = lower_bound(key);
  if (it != entries_.end() && it->first == key) return &it->second;
  return nullptr;
}

inline const Value& ValueMap::at(std::string_view key) const {
  if (const Value* v = find(key)) return *v;
  throw std::out_of_range("no such key: " + std::string(key));
}

inline Value& ValueMap::set(std::string key, Value value) {
  if (key.empty()) throw std::invalid_argument("value map keys must be non-empty");
  auto it = lower_bound(key);
  if (it != entries_.end() && it->first == key) {
    it->second = std::move(value);
    return it->second;
  }
  return entries_.insert(it, Entry{std::move(key), std::move(value)})->second;
}

inline bool ValueMap::erase(std::string_view key) {
  auto it = lower_bound(key);
  if (it == entries_.end() || it->first != key) return false;
  entries_.erase(it);
  return true;
}

inline bool operator==(const ValueMap& a, const ValueMap& b) {
  return a.entries_ == b.entries_;
}

}  // namespace scpa

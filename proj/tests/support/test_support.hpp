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
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "scpa/envelope.hpp"
#include "scpa/manifest.hpp"
#include "scpa/reference_unit.hpp"
#include "scpa/registry.hpp"

namespace scpa::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

struct BindingSpec {
  std::string layer;
  std::string extension_point;
  std::string handler;
};

Manifest make_manifest(std::string name, std::string version, int priority,
                       std::vector<BindingSpec> bindings, bool reentrant = true);

// Writes `<drop>/<name>/<version>/{manifest.scpa,payload.ref}` whose manifest
// checksum matches `ref_text`. Returns the bundle directory.
std::filesystem::path write_ref_bundle(const std::filesystem::path& drop, const std::string& name,
                                       const std::string& version, int priority,
                                       const std::vector<BindingSpec>& bindings,
                                       const std::string& ref_text, bool reentrant = true);

// Loader that builds reference units from in-memory specs keyed by
// "<name>@<version>" and keeps one call log per incarnation.
class SpecLoader {
 public:
  void add(const std::string& name, const std::string& version, ReferenceSpec spec);
  UnitLoader loader();
  // All logs created so far for `name@version`, in load order.
  std::vector<std::shared_ptr<CallLog>> logs(const std::string& key) const;
  std::size_t loads() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ReferenceSpec> specs_;
  std::map<std::string, std::vector<std::shared_ptr<CallLog>>> logs_;
};

Deployment make_deployment(Manifest manifest);

Envelope make_envelope(std::string extension_point, ValueMap payload = {});

// ---------------------------------------------------------------------------
// Oracles. Written from first principles so they share nothing with the
// code under test.

// FIPS 180-4 SHA-256, lowercase hex.
std::string sha256_oracle(const std::vector<std::uint8_t>& data);

// Numeric component-wise comparison of two "a.b.c" strings.
bool semver_less_oracle(const std::string& a, const std::string& b);

using Edge = std::pair<std::string, std::string>;  // (from, to): from depends on to

// Reverse BFS: repeatedly scan the edge list for edges pointing into the
// frontier.
std::set<std::string> reverse_bfs_oracle(const std::vector<Edge>& edges,
                                         const std::string& changed);
// Iterate "add every node with an edge into the set" until nothing changes.
std::set<std::string> fixpoint_closure_oracle(const std::vector<Edge>& edges,
                                              const std::string& changed);

struct RandomDag {
  std::vector<std::string> nodes;  // in a topological order: edges go i -> j with i < j
  std::vector<Edge> edges;
};
RandomDag random_dag(std::mt19937_64& rng, std::size_t max_nodes, double edge_probability);

// Handlers for one extension point ordered by (priority, name) via plain
// insertion sort on an explicit key.
std::vector<std::string> expected_order(std::vector<std::pair<int, std::string>> units);

}  // namespace scpa::testing

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

#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scpa::impact {

enum class NodeLayer { kUi, kBusiness, kData, kShared, kPipeline };

std::string_view to_string(NodeLayer layer);
std::optional<NodeLayer> parse_node_layer(std::string_view text);

class GraphError : public std::runtime_error {
 public:
  enum class Code { kBadLine, kUnknownComponent, kDuplicateNode, kCycle, kUnknownUnit };
  GraphError(Code code, std::string detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Component dependency graph. An edge (a, b) means "a depends on b", so a
/// change to b forces a rebuild of a. Always acyclic.
class DependencyGraph {
 public:
  DependencyGraph() = default;

  /// Throws GraphError kDuplicateNode.
  void add_node(std::string id, NodeLayer layer);
  /// Throws kUnknownComponent for missing endpoints, kCycle if the edge
  /// would close a cycle (the graph is left unchanged).
  void add_edge(const std::string& from, const std::string& to);

  bool contains(std::string_view id) const { return nodes_.find(id) != nodes_.end(); }
  std::optional<NodeLayer> layer(std::string_view id) const;
  std::size_t node_count() const { return nodes_.size(); }
  const std::map<std::string, NodeLayer, std::less<>>& nodes() const { return nodes_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }

  /// Components that depend directly on `id`.
  const std::set<std::string>& dependents(std::string_view id) const;

 private:
  bool reaches(const std::string& from, const std::string& to) const;

  std::map<std::string, NodeLayer, std::less<>> nodes_;
  std::vector<std::pair<std::string, std::string>> edges_;
  std::map<std::string, std::set<std::string>, std::less<>> dependents_;
  std::map<std::string, std::set<std::string>, std::less<>> dependencies_;
};

/// Parses `node <id> <layer>` and `edge <from> <to>` lines (`#` comments).
/// Every node referenced by an edge must be declared first.
DependencyGraph parse_graph(std::string_view text);

/// Everything that must be rebuilt when `changed` changes: `changed` plus all
/// components that reach it along depends-on edges.
std::set<std::string> rebuild_closure(const DependencyGraph& graph, std::string_view changed);

/// A self-contained unit rebuilds alone: {unit}. Throws kUnknownUnit when
/// `unit` is not among `units`.
std::set<std::string> scpa_closure(std::span<const std::string> units, std::string_view unit);

struct ClosureComparison {
  std::set<std::string> layered;
  std::set<std::string> scpa;
  /// 100 * (1 - |scpa| / |layered|)
  double reduction_percent = 0.0;
};

/// Layered closure of `changed` against the same change packaged as one unit.
ClosureComparison compare_closures(const DependencyGraph& graph, std::string_view changed);

}  // namespace scpa::impact

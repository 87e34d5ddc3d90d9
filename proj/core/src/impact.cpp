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

#include "scpa/impact.hpp"

#include <algorithm>
#include <vector>

#include <fmt/format.h>

namespace scpa::impact {
namespace {

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

const std::set<std::string> kNoDependents;

}  // namespace

std::string_view to_string(NodeLayer layer) {
  switch (layer) {
    case NodeLayer::kUi: return "ui";
    case NodeLayer::kBusiness: return "business";
    case NodeLayer::kData: return "data";
    case NodeLayer::kShared: return "shared";
    case NodeLayer::kPipeline: return "pipeline";
  }
  return "shared";
}

std::optional<NodeLayer> parse_node_layer(std::string_view text) {
  if (text == "ui") return NodeLayer::kUi;
  if (text == "business") return NodeLayer::kBusiness;
  if (text == "data") return NodeLayer::kData;
  if (text == "shared") return NodeLayer::kShared;
  if (text == "pipeline") return NodeLayer::kPipeline;
  return std::nullopt;
}

GraphError::GraphError(Code code, std::string detail)
    : std::runtime_error([&] {
        switch (code) {
          case Code::kBadLine: return "BadLine: " + detail;
          case Code::kUnknownComponent: return "UnknownComponent: " + detail;
          case Code::kDuplicateNode: return "DuplicateNode: " + detail;
          case Code::kCycle: return "Cycle: " + detail;
          case Code::kUnknownUnit: return "UnknownUnit: " + detail;
        }
        return detail;
      }()),
      code_(code) {}

void DependencyGraph::add_node(std::string id, NodeLayer layer) {
  if (id.empty()) throw GraphError(GraphError::Code::kBadLine, "empty component id");
  if (contains(id)) throw GraphError(GraphError::Code::kDuplicateNode, id);
  nodes_.emplace(std::move(id), layer);
}

bool DependencyGraph::reaches(const std::string& from, const std::string& to) const {
  std::vector<std::string> stack{from};
  std::set<std::string> seen{from};
  while (!stack.empty()) {
    const std::string current = std::move(stack.back());
    stack.pop_back();
    if (current == to) return true;
    auto it = dependencies_.find(current);
    if (it == dependencies_.end()) continue;
    for (const auto& dep : it->second) {
      if (seen.insert(dep).second) stack.push_back(dep);
    }
  }
  return false;
}

void DependencyGraph::add_edge(const std::string& from, const std::string& to) {
  if (!contains(from)) throw GraphError(GraphError::Code::kUnknownComponent, from);
  if (!contains(to)) throw GraphError(GraphError::Code::kUnknownComponent, to);
  if (from == to || reaches(to, from)) {
    throw GraphError(GraphError::Code::kCycle, fmt::format("{} -> {}", from, to));
  }
  if (!dependencies_[from].insert(to).second) return;
  dependents_[to].insert(from);
  edges_.emplace_back(from, to);
}

std::optional<NodeLayer> DependencyGraph::layer(std::string_view id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return std::nullopt;
  return it->second;
}

const std::set<std::string>& DependencyGraph::dependents(std::string_view id) const {
  auto it = dependents_.find(id);
  return it == dependents_.end() ? kNoDependents : it->second;
}

DependencyGraph parse_graph(std::string_view text) {
  DependencyGraph graph;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto w = words(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (w.empty() || w[0].front() == '#') continue;

    if (w[0] == "node" && w.size() == 3) {
      auto layer = parse_node_layer(w[2]);
      if (!layer) {
        throw GraphError(GraphError::Code::kBadLine,
                         fmt::format("line {}: unknown layer `{}`", line_no, w[2]));
      }
      graph.add_node(std::string(w[1]), *layer);
    } else if (w[0] == "edge" && w.size() == 3) {
      graph.add_edge(std::string(w[1]), std::string(w[2]));
    } else {
      throw GraphError(GraphError::Code::kBadLine,
                       fmt::format("line {}: expected `node <id> <layer>` or `edge <from> <to>`",
                                   line_no));
    }
  }
  return graph;
}

std::set<std::string> rebuild_closure(const DependencyGraph& graph, std::string_view changed) {
  if (!graph.contains(changed)) {
    throw GraphError(GraphError::Code::kUnknownComponent, std::string(changed));
  }
  std::set<std::string> closure{std::string(changed)};
  std::vector<std::string> stack{std::string(changed)};
  while (!stack.empty()) {
    const std::string current = std::move(stack.back());
    stack.pop_back();
    for (const auto& dependent : graph.dependents(current)) {
      if (closure.insert(dependent).second) stack.push_back(dependent);
    }
  }
  return closure;
}

std::set<std::string> scpa_closure(std::span<const std::string> units, std::string_view unit) {
  if (std::find(units.begin(), units.end(), unit) == units.end()) {
    throw GraphError(GraphError::Code::kUnknownUnit, std::string(unit));
  }
  return {std::string(unit)};
}

ClosureComparison compare_closures(const DependencyGraph& graph, std::string_view changed) {
  ClosureComparison c;
  c.layered = rebuild_closure(graph, changed);
  const std::string unit(changed);
  c.scpa = scpa_closure(std::span<const std::string>(&unit, 1), unit);
  c.reduction_percent = 100.0 * (1.0 - static_cast<double>(c.scpa.size()) /
                                           static_cast<double>(c.layered.size()));
  return c;
}

}  // namespace scpa::impact

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace subdiff {

using NodeId = std::int64_t;

struct Node {
  NodeId id = 0;
  std::string api;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Dataflow from the output of `src` into parameter `param` of `dst`.
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  std::string param;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// A labeled DAG of operator invocations. Instances are validated on
/// construction and immutable afterwards.
class ComputationGraph {
 public:
  ComputationGraph() = default;

  /// Validates every invariant against the operator registry and throws
  /// ValidationError naming the offending node or edge.
  ComputationGraph(std::vector<Node> nodes, std::vector<Edge> edges);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  bool contains(NodeId id) const { return index_.count(id) != 0; }
  const Node& node(NodeId id) const;
  const std::string& api(NodeId id) const { return node(id).api; }

  std::vector<Edge> in_edges(NodeId id) const;
  std::vector<Edge> out_edges(NodeId id) const;

  /// Connectivity of the undirected skeleton. The empty graph is connected.
  bool connected() const;

  friend bool operator==(const ComputationGraph& a, const ComputationGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<NodeId, size_t> index_;
};

/// Kahn's algorithm; ties broken by ascending node id. Throws
/// ValidationError listing one cycle if the graph is cyclic.
std::vector<NodeId> topo_order(const ComputationGraph& g);

/// All nodes with a directed path to `n`, excluding `n`.
std::set<NodeId> ancestors(const ComputationGraph& g, NodeId n);

/// All nodes reachable from `n`, excluding `n`.
std::set<NodeId> descendants(const ComputationGraph& g, NodeId n);

/// Nodes with no incoming edge.
std::set<NodeId> entry_nodes(const ComputationGraph& g);

struct GraphEntry {
  std::string id;
  ComputationGraph graph;
};

struct GraphCorpus {
  std::vector<GraphEntry> graphs;

  const ComputationGraph* find(const std::string& id) const;
};

}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "subdiff/api.hpp"
#include "subdiff/errors.hpp"

namespace subdiff {

namespace {

std::string describe(const Edge& e) {
  std::ostringstream os;
  os << "edge " << e.src << "->" << e.dst << " (param '" << e.param << "')";
  return os.str();
}

// Kahn's algorithm over a node index; on failure reports one cycle found by
// walking predecessors among the unprocessed nodes.
std::vector<NodeId> kahn(const std::vector<Node>& nodes, const std::vector<Edge>& edges) {
  std::map<NodeId, int> indegree;
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& n : nodes) indegree[n.id] = 0;
  for (const auto& e : edges) {
    ++indegree[e.dst];
    succ[e.src].push_back(e.dst);
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }
  std::vector<NodeId> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (NodeId s : succ[id]) {
      if (--indegree[s] == 0) ready.push(s);
    }
  }
  if (order.size() == nodes.size()) return order;

  std::map<NodeId, NodeId> pred_in_cycle;
  for (const auto& e : edges) {
    if (indegree[e.src] > 0 && indegree[e.dst] > 0) pred_in_cycle[e.dst] = e.src;
  }
  NodeId cur = pred_in_cycle.begin()->first;
  std::set<NodeId> seen;
  while (seen.insert(cur).second) cur = pred_in_cycle[cur];
  std::vector<NodeId> cycle{cur};
  for (NodeId p = pred_in_cycle[cur]; p != cur; p = pred_in_cycle[p]) cycle.push_back(p);
  std::reverse(cycle.begin(), cycle.end());
  std::ostringstream os;
  os << "graph contains a cycle: ";
  for (NodeId id : cycle) os << id << " -> ";
  os << cycle.front();
  throw ValidationError(os.str());
}

}  // namespace

ComputationGraph::ComputationGraph(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const auto& registry = ApiRegistry::instance();
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw ValidationError("duplicate node id " + std::to_string(nodes_[i].id));
    }
    if (registry.find(nodes_[i].api) == nullptr) {
      throw ValidationError("node " + std::to_string(nodes_[i].id) + ": unknown api '" +
                            nodes_[i].api + "'");
    }
  }
  std::set<std::pair<NodeId, std::string>> targeted;
  for (const auto& e : edges_) {
    if (!contains(e.src) || !contains(e.dst)) {
      throw ValidationError(describe(e) + ": endpoint does not exist");
    }
    const ApiSignature& sig = registry.at(api(e.dst));
    const ApiParam* p = sig.find(e.param);
    if (p == nullptr) {
      throw ValidationError(describe(e) + ": '" + sig.name + "' has no parameter '" + e.param +
                            "'");
    }
    if (p->kind != ParamKind::kTensor || !p->dependent_capable) {
      throw ValidationError(describe(e) + ": parameter '" + e.param + "' of '" + sig.name +
                            "' cannot receive a predecessor output");
    }
    if (!targeted.emplace(e.dst, e.param).second) {
      throw ValidationError(describe(e) + ": parameter already has an incoming edge");
    }
  }
  kahn(nodes_, edges_);
}

const Node& ComputationGraph::node(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown node id " + std::to_string(id));
  return nodes_[it->second];
}

std::vector<Edge> ComputationGraph::in_edges(NodeId id) const {
  std::vector<Edge> out;
  for (const auto& e : edges_) {
    if (e.dst == id) out.push_back(e);
  }
  return out;
}

std::vector<Edge> ComputationGraph::out_edges(NodeId id) const {
  std::vector<Edge> out;
  for (const auto& e : edges_) {
    if (e.src == id) out.push_back(e);
  }
  return out;
}

bool ComputationGraph::connected() const {
  if (nodes_.empty()) return true;
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const auto& e : edges_) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::set<NodeId> seen{nodes_.front().id};
  std::vector<NodeId> stack{nodes_.front().id};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId n : adj[cur]) {
      if (seen.insert(n).second) stack.push_back(n);
    }
  }
  return seen.size() == nodes_.size();
}

std::vector<NodeId> topo_order(const ComputationGraph& g) { return kahn(g.nodes(), g.edges()); }

namespace {

std::set<NodeId> reach(const ComputationGraph& g, NodeId n, bool backwards) {
  if (!g.contains(n)) throw ValidationError("unknown node id " + std::to_string(n));
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const auto& e : g.edges()) {
    if (backwards) {
      adj[e.dst].push_back(e.src);
    } else {
      adj[e.src].push_back(e.dst);
    }
  }
  std::set<NodeId> seen;
  std::vector<NodeId> stack{n};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    for (NodeId next : adj[cur]) {
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  seen.erase(n);
  return seen;
}

}  // namespace

std::set<NodeId> ancestors(const ComputationGraph& g, NodeId n) { return reach(g, n, true); }

std::set<NodeId> descendants(const ComputationGraph& g, NodeId n) { return reach(g, n, false); }

std::set<NodeId> entry_nodes(const ComputationGraph& g) {
  std::set<NodeId> out;
  for (const auto& n : g.nodes()) out.insert(n.id);
  for (const auto& e : g.edges()) out.erase(e.dst);
  return out;
}

const ComputationGraph* GraphCorpus::find(const std::string& id) const {
  for (const auto& entry : graphs) {
    if (entry.id == id) return &entry.graph;
  }
  return nullptr;
}

}  // namespace subdiff

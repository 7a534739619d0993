// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <set>
#include <string>
#include <vector>

#include "subdiff/graph.hpp"

namespace subdiff {

struct MiningConfig {
  int min_support = 5;
  int min_nodes = 2;
  int max_nodes = 7;

  // Throws std::invalid_argument when the bounds are inconsistent.
  void validate() const;
};

/// Orientation of the dataflow arc relative to a DFS-code tuple (from, to).
enum class ArcDirection : int { kForward = 0, kBackward = 1 };

/// One DFS-code tuple: (from, to, from_label, direction, param, to_label).
/// `from`/`to` are DFS discovery indices. A single-vertex pattern is encoded
/// as the lone tuple (0, 0, label, kForward, "", label).
struct DfsEdge {
  int from = 0;
  int to = 0;
  std::string from_label;
  ArcDirection direction = ArcDirection::kForward;
  std::string param;
  std::string to_label;

  auto operator<=>(const DfsEdge&) const = default;
};

using DfsCode = std::vector<DfsEdge>;

std::string to_string(const DfsCode& code);

struct FrequentSubgraph {
  ComputationGraph pattern;  // node ids are DFS discovery indices
  int support = 0;
  std::set<std::string> supporting_graphs;
  DfsCode code;
};

/// Every connected pattern with min_nodes..max_nodes nodes whose transaction
/// support reaches min_support, once per isomorphism class. Sorted by
/// descending support, ascending node count, then code.
std::vector<FrequentSubgraph> mine(const GraphCorpus& corpus, const MiningConfig& cfg);

/// Minimum DFS code. Equal codes iff the patterns are isomorphic as labeled
/// directed graphs with parameter-labeled edges. Throws ValidationError for a
/// disconnected pattern.
DfsCode canonical_code(const ComputationGraph& pattern);

/// Rebuilds a pattern graph from a DFS code (node ids = DFS indices).
ComputationGraph pattern_from_code(const DfsCode& code);

/// Injective, label-, direction- and param-preserving mapping of pattern into
/// host (not necessarily induced).
bool contains_embedding(const ComputationGraph& host, const ComputationGraph& pattern);

}  // namespace subdiff

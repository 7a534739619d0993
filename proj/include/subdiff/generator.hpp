// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "subdiff/graph.hpp"
#include "subdiff/rng.hpp"
#include "subdiff/test_case.hpp"
#include "subdiff/trace.hpp"

namespace subdiff {

/// Partition of a node's signature parameters, each list in signature order.
struct ParamClasses {
  std::vector<std::string> entry_generated;
  std::vector<std::string> dependent;
  std::vector<std::string> non_dependent;
};

ParamClasses classify_params(const ComputationGraph& pattern, NodeId n);

/// No trace record matches the inferred dependent dtypes/shapes of a node.
/// The case is abandoned.
class NoCompatibleRecord : public std::runtime_error {
 public:
  NoCompatibleRecord(NodeId node, DependentBindings bindings, const std::string& api);
  NodeId node() const { return node_; }
  const DependentBindings& bindings() const { return bindings_; }

 private:
  NodeId node_;
  DependentBindings bindings_;
};

/// Shape inference rejected the inputs assembled for a node. Counted as an
/// invalid generated input.
class InvalidGeneratedInput : public std::runtime_error {
 public:
  InvalidGeneratedInput(NodeId node, const std::string& message);
  NodeId node() const { return node_; }

 private:
  NodeId node_;
};

/// Elementwise-independent uniform sample over [vmin, vmax]; element k uses
/// stream.unit(k). Values are clamped after rounding to the feature dtype so
/// they stay inside the range whenever the dtype can represent a point in it.
TensorValue sample_tensor(const TensorFeature& feature, const CounterStream& stream);

/// Builds a fully bound case by walking the pattern in topological order.
/// Record choices use (seed, kRecordPick, node, 0) index 0; tensor parameter
/// p of node n uses (seed, kTensor, n, ordinal(p)). Deterministic in
/// (pattern, store, seed). Throws NoCompatibleRecord or InvalidGeneratedInput.
TestCase generate_case(const ComputationGraph& pattern, const TraceStore& store, std::uint64_t seed,
                       std::string case_id = {}, std::string pattern_id = {});

/// Seed of case `index` of pattern `pattern_index` in a campaign seeded with
/// `campaign_seed`: CounterStream(campaign_seed, kCaseSeed, pattern_index, index).word(0).
std::uint64_t case_seed(std::uint64_t campaign_seed, std::uint64_t pattern_index, std::uint64_t index);

}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "subdiff/graph.hpp"
#include "subdiff/trace.hpp"

namespace subdiff {

/// A tensor argument a model supplies itself (weights, constants, inputs).
struct TensorSpec {
  Shape shape;
  double lo = -1.0;
  double hi = 1.0;
};

struct NodeConfig {
  std::map<std::string, TensorSpec> tensors;
  std::map<std::string, ScalarValue> scalars;
};

struct DeskModel {
  std::string id;
  ComputationGraph graph;
  std::map<NodeId, NodeConfig> configs;  // every non-edged argument
};

/// Small synthetic models built from two shape families: image blocks on
/// f32 [2,8,4,4] activations and token blocks on f32 [2,8,16], joined by
/// flatten(start_dim=2). Every operator keeps a single activation shape, so
/// any frequent pattern can be fed from any record of its first operator.
std::vector<DeskModel> desk_zoo();

GraphCorpus corpus_of(const std::vector<DeskModel>& models);

/// Runs every model once on the f32 reference kernels and records one
/// InputRecord per invocation with the observed dtype, shape and value
/// range of each tensor argument. Record ids are "<model>#<node>".
TraceStore record_trace(const std::vector<DeskModel>& models, std::uint64_t seed);

}  // namespace subdiff

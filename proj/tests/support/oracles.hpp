// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

// Test-only reference implementations. Nothing here calls into the code it
// is used to check, apart from the data types.

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "subdiff/backend.hpp"
#include "subdiff/graph.hpp"
#include "subdiff/harness.hpp"
#include "subdiff/kernels.hpp"
#include "subdiff/trace.hpp"

namespace subdiff::oracle {

// ---- graphs ---------------------------------------------------------------

/// Transitive closure by Floyd-Warshall; reach[i][j] over positions in g.nodes().
std::vector<std::vector<bool>> reachability(const ComputationGraph& g);
std::set<NodeId> ancestors_of(const ComputationGraph& g, NodeId n);
std::set<NodeId> descendants_of(const ComputationGraph& g, NodeId n);

/// Minimum over all node orderings of the labels followed by the sorted
/// (position(src), position(dst), param) edge list.
std::string canonical_form(const ComputationGraph& g);

struct OraclePattern {
  std::string form;
  size_t nodes = 0;
  std::set<std::string> graphs;
};

/// Exhaustive enumeration of connected (not necessarily induced) subgraphs
/// with min_nodes..max_nodes nodes, grouped by canonical form and filtered
/// by transaction support.
std::map<std::string, OraclePattern> brute_force_mine(const GraphCorpus& corpus, int min_support, int min_nodes,
                                                      int max_nodes);

/// Random DAG over `labels`: each dependent-capable parameter of each node
/// is wired to a random earlier node with probability `p_edge`. Node ids are
/// a random permutation of 0..n-1 so id order is not topological order.
ComputationGraph random_dag(std::mt19937_64& rng, int nodes, const std::vector<std::string>& labels, double p_edge);

/// A random connected DAG (retries random_dag until connected).
ComputationGraph random_connected_dag(std::mt19937_64& rng, int nodes, const std::vector<std::string>& labels,
                                      double p_edge);

GraphCorpus random_corpus(std::mt19937_64& rng, int graphs, int max_nodes, const std::vector<std::string>& labels);

/// Five labels with one or two dependent inputs.
const std::vector<std::string>& small_labels();

// ---- fixtures -------------------------------------------------------------

/// ResNet fragment conv2d->batch_norm->relu->conv2d->batch_norm and DenseNet
/// fragment conv2d->batch_norm->relu->max_pool2d, all edges into "input".
GraphCorpus two_model_corpus();

/// conv2d record: input f32 [16,3,224,224] in [-102.91, 152.38], weight
/// [64,3,7,7] in [-0.20, 0.30], bias [64] in [-0.10, 0.10], stride 1,
/// padding 3, dilation 1, groups 1.
InputRecord conv2d_record();

/// batch_norm record: input f32 [16,64,224,224], running_mean [64] in
/// [-0.03, 0.10], running_var [64] in [0.5, 1.5], training false.
InputRecord batch_norm_record(Shape input_shape = {16, 64, 224, 224});

/// Chain from `apis`, node i feeding parameter "input" of node i+1.
ComputationGraph chain(const std::vector<std::string>& apis);

// ---- kernels --------------------------------------------------------------

struct Dense {
  Shape shape;
  std::vector<double> v;
};

Dense dense(const TensorValue& t);

Dense naive_add(const Dense& a, const Dense& b);
Dense naive_mul(const Dense& a, const Dense& b);
Dense naive_div(const Dense& a, const Dense& b);
Dense naive_relu(const Dense& x);
Dense naive_gelu(const Dense& x, bool tanh_form);
Dense naive_softmax(const Dense& x, std::int64_t dim);
Dense naive_flatten(const Dense& x, std::int64_t start, std::int64_t end);
Dense naive_matmul(const Dense& a, const Dense& b);
Dense naive_linear(const Dense& x, const Dense& w, const Dense* b);
Dense naive_conv2d(const Dense& x, const Dense& w, const Dense* b, std::int64_t stride, std::int64_t padding,
                   std::int64_t dilation, std::int64_t groups);
Dense naive_max_pool2d(const Dense& x, std::int64_t kernel, std::int64_t stride, std::int64_t padding,
                       std::int64_t dilation, bool ceil_mode);
Dense naive_adaptive_avg_pool2d(const Dense& x, std::int64_t oh, std::int64_t ow);
Dense naive_batch_norm(const Dense& x, const Dense& mean, const Dense& var, const Dense* w, const Dense* b, double eps);
Dense naive_layer_norm(const Dense& x, size_t normalized_dims, const Dense* w, const Dense* b, double eps);

/// A random valid call of `api` together with its oracle result. Tensor
/// values are f32-representable and stored as f64, so both precisions see
/// identical inputs.
struct KernelCase {
  std::string api;
  Args args;
  Dense expected;
};

KernelCase random_kernel_case(const std::string& api, std::mt19937_64& rng);

/// Largest |a - b| over elements; infinity on a shape mismatch.
double max_abs_diff(const TensorValue& actual, const Dense& expected);

// ---- harness --------------------------------------------------------------

/// Failing nodes recomputed from raw outputs: one side NaN where the other is
/// not, |a - b| > threshold, shape divergence, a crash on exactly one side, or
/// crashes in different categories.
std::set<NodeId> failing_nodes(const CaseOutputs& a, const CaseOutputs& b, double threshold);

/// Failing nodes plus their ancestors, through reachability().
std::set<NodeId> implicated(const ComputationGraph& g, const std::set<NodeId>& failing);

}  // namespace subdiff::oracle

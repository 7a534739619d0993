// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "subdiff/graph.hpp"
#include "subdiff/kernels.hpp"
#include "subdiff/test_case.hpp"

namespace subdiff {

/// A node that produced no tensor: it raised (kError) or was not run
/// because an upstream node failed (kSkipped).
struct Crash {
  enum class Kind { kError, kSkipped };
  Kind kind = Kind::kError;
  std::string category;  // "validity", "skipped", "remote", ...
  std::string message;
};

using NodeOutcome = std::variant<TensorValue, Crash>;
using CaseOutputs = std::map<NodeId, NodeOutcome>;

/// Which nodes a perturbation targets: an explicit id list, every node, or
/// the entry nodes.
struct NodeSpec {
  enum class Mode { kList, kAll, kEntry };
  Mode mode = Mode::kList;
  std::set<NodeId> ids;

  bool matches(const ComputationGraph& g, NodeId n) const;
  std::string to_string() const;
  static NodeSpec parse(const std::string& text);  // "all" | "entry" | "0,2,5"
};

/// Backend selector.
///   ref-f32 | ref-f64
///   perturb:EPS:NODESPEC[:BASE]   BASE is ref-f32 or ref-f64 (default ref-f64)
///   bridge:CMD:DEVICE             CMD runs under /bin/sh; DEVICE is cpu|cuda
struct BackendId {
  enum class Kind { kRefF32, kRefF64, kPerturb, kBridge };
  Kind kind = Kind::kRefF64;
  // kPerturb
  double epsilon = 0.0;
  NodeSpec targets;
  DType base_precision = DType::kF64;
  // kBridge
  std::string command;
  std::string device;

  static BackendId ref(DType precision);
  static BackendId perturb(double epsilon, NodeSpec targets, DType base = DType::kF64);
  static BackendId parse(const std::string& text);  // throws std::invalid_argument
  std::string to_string() const;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// Executes nodes in topological order and records every node's outcome.
  /// Throws BackendUnavailable when the backend itself fails.
  virtual CaseOutputs run_case(const TestCase& c) = 0;
};

/// Pure reference kernels at a fixed precision, optionally adding
/// e = epsilon * |x| with a hashed sign to every element of targeted nodes
/// before successors consume them.
class ReferenceBackend final : public Backend {
 public:
  explicit ReferenceBackend(DType precision) : precision_(precision) {}
  ReferenceBackend(DType precision, double epsilon, NodeSpec targets);

  std::string name() const override;
  CaseOutputs run_case(const TestCase& c) override;

 private:
  DType precision_;
  double epsilon_ = 0.0;
  std::optional<NodeSpec> targets_;
};

/// Argument list of node `n` in `c`, wiring dependent parameters from
/// `outputs`. Throws ValidityError if a dependency has no tensor output.
Args node_args(const TestCase& c, NodeId n, const CaseOutputs& outputs);

/// Instantiates a backend. Each call returns an independent instance; a
/// bridge backend owns its own child process.
std::unique_ptr<Backend> make_backend(const BackendId& id);

}  // namespace subdiff

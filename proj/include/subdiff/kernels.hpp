// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <variant>

#include "subdiff/api.hpp"
#include "subdiff/graph.hpp"
#include "subdiff/tensor.hpp"
#include "subdiff/trace.hpp"

namespace subdiff {

struct TensorMeta {
  DType dtype = DType::kF32;
  Shape shape;

  friend bool operator==(const TensorMeta&, const TensorMeta&) = default;
};

// Argument lists keyed by parameter name. std::monostate is an explicit
// none; an absent key falls back to the operator default.
using MetaArg = std::variant<std::monostate, TensorMeta, ScalarValue>;
using MetaArgs = std::map<std::string, MetaArg>;
using Arg = std::variant<std::monostate, TensorValue, ScalarValue>;
using Args = std::map<std::string, Arg>;

MetaArgs meta_of(const Args& args);

/// Per-invocation context used by stochastic operators (dropout's mask).
struct ExecContext {
  std::uint64_t seed = 0;
  NodeId node = 0;
};

/// Shape- and value-level validity check of one call. Throws ValidityError
/// with a human-readable description of the violated constraint.
void validate(const std::string& api, const MetaArgs& args);

/// Output dtype/shape of a valid call; the dtype is the promoted dtype of
/// the tensor arguments. Throws ValidityError.
TensorMeta infer_output(const std::string& api, const MetaArgs& args);

/// Runs one operator. Tensor arguments are converted to `precision` and all
/// arithmetic (including accumulation, in sequential row-major order) is
/// carried out in it; the result has dtype `precision`. NaN/Inf propagate.
TensorValue execute_node(const std::string& api, const Args& args, DType precision,
                         const ExecContext& ctx = {});

}  // namespace subdiff

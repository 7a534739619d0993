// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace subdiff {

enum class ParamKind { kTensor, kInt, kFloat, kBool, kIntTuple, kString };

std::string_view to_string(ParamKind kind);

struct ApiParam {
  std::string name;
  ParamKind kind = ParamKind::kTensor;
  // Only tensor parameters may receive a predecessor's output.
  bool dependent_capable = false;
  // None-able: the parameter may be absent (or explicitly none) and the
  // operator falls back to its default.
  bool optional = false;
};

struct ApiSignature {
  std::string name;
  std::vector<ApiParam> params;

  const ApiParam* find(std::string_view param) const;
  // Position of `param` in `params`, or -1.
  int ordinal(std::string_view param) const;
};

/// The operator registry. Contains the 15 operators the reference backend
/// implements; signatures follow torch.nn.functional naming.
class ApiRegistry {
 public:
  static const ApiRegistry& instance();

  const ApiSignature* find(std::string_view api) const;
  const ApiSignature& at(std::string_view api) const;  // throws ValidationError
  const std::vector<ApiSignature>& all() const { return signatures_; }

 private:
  ApiRegistry();
  std::vector<ApiSignature> signatures_;
};

}  // namespace subdiff

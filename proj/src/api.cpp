// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/api.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "subdiff/errors.hpp"

namespace subdiff {

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::kTensor: return "tensor";
    case ParamKind::kInt: return "int";
    case ParamKind::kFloat: return "float";
    case ParamKind::kBool: return "bool";
    case ParamKind::kIntTuple: return "int-tuple";
    case ParamKind::kString: return "string";
  }
  return "?";
}

const ApiParam* ApiSignature::find(std::string_view param) const {
  for (const auto& p : params) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

int ApiSignature::ordinal(std::string_view param) const {
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].name == param) return static_cast<int>(i);
  }
  return -1;
}

namespace {

ApiParam dep(std::string name) { return {std::move(name), ParamKind::kTensor, true, false}; }
ApiParam tensor(std::string name, bool optional = false) {
  return {std::move(name), ParamKind::kTensor, false, optional};
}
ApiParam scalar(std::string name, ParamKind kind, bool optional = true) {
  return {std::move(name), kind, false, optional};
}

}  // namespace

ApiRegistry::ApiRegistry() {
  using K = ParamKind;
  signatures_ = {
      {"flatten", {dep("input"), scalar("start_dim", K::kInt), scalar("end_dim", K::kInt)}},
      {"__mul__", {dep("input"), dep("other")}},
      {"div", {dep("input"), dep("other")}},
      {"softmax", {dep("input"), scalar("dim", K::kInt)}},
      {"adaptive_avg_pool2d", {dep("input"), scalar("output_size", K::kIntTuple, false)}},
      {"matmul", {dep("input"), dep("other")}},
      {"max_pool2d",
       {dep("input"), scalar("kernel_size", K::kInt, false), scalar("stride", K::kInt),
        scalar("padding", K::kInt), scalar("dilation", K::kInt), scalar("ceil_mode", K::kBool)}},
      {"batch_norm",
       {dep("input"), tensor("running_mean"), tensor("running_var"), tensor("weight", true),
        tensor("bias", true), scalar("training", K::kBool), scalar("momentum", K::kFloat),
        scalar("eps", K::kFloat)}},
      {"dropout",
       {dep("input"), scalar("p", K::kFloat), scalar("training", K::kBool),
        scalar("inplace", K::kBool)}},
      {"relu", {dep("input"), scalar("inplace", K::kBool)}},
      {"conv2d",
       {dep("input"), tensor("weight"), tensor("bias", true), scalar("stride", K::kInt),
        scalar("padding", K::kInt), scalar("dilation", K::kInt), scalar("groups", K::kInt)}},
      {"gelu", {dep("input"), scalar("approximate", K::kString)}},
      {"linear", {dep("input"), tensor("weight"), tensor("bias", true)}},
      {"layer_norm",
       {dep("input"), scalar("normalized_shape", K::kIntTuple, false), tensor("weight", true),
        tensor("bias", true), scalar("eps", K::kFloat)}},
      {"__add__", {dep("input"), dep("other")}},
  };
  for (const auto& sig : signatures_) {
    std::set<std::string> names;
    for (const auto& p : sig.params) {
      if (!names.insert(p.name).second || (p.dependent_capable && p.kind != ParamKind::kTensor)) {
        throw std::logic_error("malformed signature for " + sig.name);
      }
    }
  }
}

const ApiRegistry& ApiRegistry::instance() {
  static const ApiRegistry registry;
  return registry;
}

const ApiSignature* ApiRegistry::find(std::string_view api) const {
  auto it = std::find_if(signatures_.begin(), signatures_.end(),
                         [&](const ApiSignature& s) { return s.name == api; });
  return it == signatures_.end() ? nullptr : &*it;
}

const ApiSignature& ApiRegistry::at(std::string_view api) const {
  const ApiSignature* sig = find(api);
  if (sig == nullptr) throw ValidationError("unknown api '" + std::string(api) + "'");
  return *sig;
}

}  // namespace subdiff

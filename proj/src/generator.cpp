// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/generator.hpp"

#include <cmath>
#include <limits>

#include "subdiff/api.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/kernels.hpp"

namespace subdiff {

ParamClasses classify_params(const ComputationGraph& pattern, NodeId n) {
  const ApiSignature& sig = ApiRegistry::instance().at(pattern.api(n));
  const auto in = pattern.in_edges(n);
  ParamClasses out;
  for (const auto& p : sig.params) {
    bool edged = false;
    for (const auto& e : in) edged = edged || e.param == p.name;
    if (in.empty()) {
      out.entry_generated.push_back(p.name);
    } else if (edged) {
      out.dependent.push_back(p.name);
    } else {
      out.non_dependent.push_back(p.name);
    }
  }
  return out;
}

namespace {

std::string describe(const DependentBindings& b) {
  std::string s;
  for (const auto& [param, ds] : b) {
    if (!s.empty()) s += ", ";
    s += param + ": " + std::string(to_string(ds.first)) + " " + shape_string(ds.second);
  }
  return "{" + s + "}";
}

template <class T>
T clamp_rounded(double x, double lo, double hi) {
  T v = static_cast<T>(x);
  const T inf = std::numeric_limits<T>::infinity();
  while (static_cast<double>(v) < lo && v < inf) {
    const T next = std::nextafter(v, inf);
    if (static_cast<double>(next) > hi) break;
    v = next;
  }
  while (static_cast<double>(v) > hi && v > -inf) {
    const T next = std::nextafter(v, -inf);
    if (static_cast<double>(next) < lo) break;
    v = next;
  }
  return v;
}

template <class T>
std::vector<T> sample_values(const TensorFeature& f, const CounterStream& stream) {
  std::vector<T> data(static_cast<size_t>(numel(f.shape)));
  const double width = f.vmax - f.vmin;
  for (size_t k = 0; k < data.size(); ++k) {
    const double x = width == 0.0 ? f.vmin : std::min(f.vmax, f.vmin + stream.unit(k) * width);
    data[k] = clamp_rounded<T>(x, f.vmin, f.vmax);
  }
  return data;
}

}  // namespace

NoCompatibleRecord::NoCompatibleRecord(NodeId node, DependentBindings bindings, const std::string& api)
    : std::runtime_error("no compatible " + api + " record for node " + std::to_string(node) + " with " +
                         describe(bindings)),
      node_(node),
      bindings_(std::move(bindings)) {}

InvalidGeneratedInput::InvalidGeneratedInput(NodeId node, const std::string& message)
    : std::runtime_error("node " + std::to_string(node) + ": " + message), node_(node) {}

TensorValue sample_tensor(const TensorFeature& feature, const CounterStream& stream) {
  feature.validate();
  if (feature.dtype == DType::kF32) return TensorValue(feature.shape, sample_values<float>(feature, stream));
  return TensorValue(feature.shape, sample_values<double>(feature, stream));
}

std::uint64_t case_seed(std::uint64_t campaign_seed, std::uint64_t pattern_index, std::uint64_t index) {
  return CounterStream(campaign_seed, RngDomain::kCaseSeed, pattern_index, index).word(0);
}

TestCase generate_case(const ComputationGraph& pattern, const TraceStore& store, std::uint64_t seed,
                       std::string case_id, std::string pattern_id) {
  TestCase c{std::move(case_id), std::move(pattern_id), pattern, {}, seed, {}};
  std::map<NodeId, TensorMeta> inferred;

  for (NodeId n : topo_order(pattern)) {
    const std::string& api = pattern.api(n);
    const ApiSignature& sig = ApiRegistry::instance().at(api);
    const ParamClasses classes = classify_params(pattern, n);

    DependentBindings dep;
    for (const auto& e : pattern.in_edges(n)) {
      const TensorMeta& m = inferred.at(e.src);
      dep[e.param] = {m.dtype, m.shape};
      c.bindings[{n, e.param}] = Dependent{e.src};
    }

    const std::vector<std::string>& to_fill = dep.empty() ? classes.entry_generated : classes.non_dependent;
    if (to_fill.empty()) {
      c.provenance[n] = kNoRecord;
    } else {
      const auto candidates = dep.empty() ? store.query(api) : store.match_records(api, dep);
      if (candidates.empty()) throw NoCompatibleRecord(n, dep, api);
      const CounterStream pick(seed, RngDomain::kRecordPick, static_cast<std::uint64_t>(n), 0);
      const InputRecord& rec = *candidates[pick.below(0, candidates.size())];
      c.provenance[n] = rec.id;

      for (const auto& name : to_fill) {
        const ApiParam& p = *sig.find(name);
        if (p.kind == ParamKind::kTensor) {
          auto it = rec.tensors.find(name);
          if (it == rec.tensors.end()) {
            c.bindings[{n, name}] = ScalarValue::none();
          } else {
            const CounterStream stream(seed, RngDomain::kTensor, static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(sig.ordinal(name)));
            c.bindings[{n, name}] = sample_tensor(it->second, stream);
          }
        } else {
          auto it = rec.scalars.find(name);
          c.bindings[{n, name}] = it == rec.scalars.end() ? ScalarValue::none() : it->second;
        }
      }
    }

    MetaArgs meta;
    for (const auto& p : sig.params) {
      auto it = c.bindings.find({n, p.name});
      if (it == c.bindings.end()) continue;
      if (const auto* d = std::get_if<Dependent>(&it->second)) {
        meta[p.name] = inferred.at(d->src);
      } else if (const auto* t = std::get_if<TensorValue>(&it->second)) {
        meta[p.name] = TensorMeta{t->dtype(), t->shape()};
      } else {
        const auto& s = std::get<ScalarValue>(it->second);
        if (s.is_none()) {
          meta[p.name] = std::monostate{};
        } else {
          meta[p.name] = s;
        }
      }
    }
    try {
      inferred[n] = infer_output(api, meta);
    } catch (const ValidityError& e) {
      throw InvalidGeneratedInput(n, e.what());
    }
  }
  return c;
}

}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/backend.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "subdiff/bridge.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/rng.hpp"

namespace subdiff {

bool NodeSpec::matches(const ComputationGraph& g, NodeId n) const {
  switch (mode) {
    case Mode::kAll: return true;
    case Mode::kEntry: return g.in_edges(n).empty();
    case Mode::kList: return ids.count(n) != 0;
  }
  return false;
}

std::string NodeSpec::to_string() const {
  if (mode == Mode::kAll) return "all";
  if (mode == Mode::kEntry) return "entry";
  std::string out;
  for (NodeId id : ids) {
    if (!out.empty()) out += ',';
    out += std::to_string(id);
  }
  return out;
}

NodeSpec NodeSpec::parse(const std::string& text) {
  NodeSpec spec;
  if (text == "all") {
    spec.mode = Mode::kAll;
    return spec;
  }
  if (text == "entry") {
    spec.mode = Mode::kEntry;
    return spec;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad node id '" + item + "' in node spec");
    spec.ids.insert(v);
  }
  if (spec.ids.empty()) throw std::invalid_argument("empty node spec");
  return spec;
}

BackendId BackendId::ref(DType precision) {
  BackendId id;
  id.kind = precision == DType::kF32 ? Kind::kRefF32 : Kind::kRefF64;
  return id;
}

BackendId BackendId::perturb(double epsilon, NodeSpec targets, DType base) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("perturbation epsilon must be >= 0");
  BackendId id;
  id.kind = Kind::kPerturb;
  id.epsilon = epsilon;
  id.targets = std::move(targets);
  id.base_precision = base;
  return id;
}

BackendId BackendId::parse(const std::string& text) {
  if (text == "ref-f32") return ref(DType::kF32);
  if (text == "ref-f64") return ref(DType::kF64);
  if (text.rfind("perturb:", 0) == 0) {
    std::vector<std::string> parts;
    std::istringstream in(text.substr(8));
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3) {
      throw std::invalid_argument("expected perturb:EPS:NODESPEC[:BASE], got '" + text + "'");
    }
    size_t used = 0;
    double eps = 0;
    try {
      eps = std::stod(parts[0], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[0].size()) throw std::invalid_argument("bad perturbation epsilon '" + parts[0] + "'");
    DType base = DType::kF64;
    if (parts.size() == 3) {
      if (parts[2] == "ref-f32") {
        base = DType::kF32;
      } else if (parts[2] != "ref-f64") {
        throw std::invalid_argument("perturbation base must be ref-f32 or ref-f64, got '" + parts[2] + "'");
      }
    }
    return perturb(eps, NodeSpec::parse(parts[1]), base);
  }
  if (text.rfind("bridge:", 0) == 0) {
    const std::string rest = text.substr(7);
    const size_t colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
      throw std::invalid_argument("expected bridge:CMD:DEVICE, got '" + text + "'");
    }
    BackendId id;
    id.kind = Kind::kBridge;
    id.command = rest.substr(0, colon);
    id.device = rest.substr(colon + 1);
    if (id.device != "cpu" && id.device != "cuda") {
      throw std::invalid_argument("bridge device must be cpu or cuda, got '" + id.device + "'");
    }
    return id;
  }
  throw std::invalid_argument("unknown backend '" + text + "'");
}

std::string BackendId::to_string() const {
  switch (kind) {
    case Kind::kRefF32: return "ref-f32";
    case Kind::kRefF64: return "ref-f64";
    case Kind::kPerturb: {
      std::ostringstream os;
      os << "perturb:" << epsilon << ':' << targets.to_string();
      if (base_precision == DType::kF32) os << ":ref-f32";
      return os.str();
    }
    case Kind::kBridge: return "bridge:" + command + ":" + device;
  }
  return "?";
}

ReferenceBackend::ReferenceBackend(DType precision, double epsilon, NodeSpec targets)
    : precision_(precision), epsilon_(epsilon), targets_(std::move(targets)) {}

std::string ReferenceBackend::name() const {
  if (targets_) return BackendId::perturb(epsilon_, *targets_, precision_).to_string();
  return BackendId::ref(precision_).to_string();
}

Args node_args(const TestCase& c, NodeId n, const CaseOutputs& outputs) {
  Args args;
  auto lo = c.bindings.lower_bound({n, std::string()});
  for (auto it = lo; it != c.bindings.end() && it->first.first == n; ++it) {
    const std::string& param = it->first.second;
    if (const auto* dep = std::get_if<Dependent>(&it->second)) {
      auto out = outputs.find(dep->src);
      const TensorValue* t = out == outputs.end() ? nullptr : std::get_if<TensorValue>(&out->second);
      if (t == nullptr) {
        throw ValidityError("parameter '" + param + "' depends on node " + std::to_string(dep->src) +
                            ", which has no output");
      }
      args[param] = *t;
    } else if (const auto* t = std::get_if<TensorValue>(&it->second)) {
      args[param] = *t;
    } else {
      const auto& s = std::get<ScalarValue>(it->second);
      if (s.is_none()) {
        args[param] = std::monostate{};
      } else {
        args[param] = s;
      }
    }
  }
  return args;
}

namespace {

template <class T>
void add_perturbation(std::span<T> data, double epsilon, const CounterStream& signs) {
  for (size_t i = 0; i < data.size(); ++i) {
    const T e = static_cast<T>(epsilon * std::fabs(static_cast<double>(data[i])));
    data[i] = (signs.word(i) & 1U) ? data[i] - e : data[i] + e;
  }
}

}  // namespace

CaseOutputs ReferenceBackend::run_case(const TestCase& c) {
  CaseOutputs outputs;
  for (NodeId n : topo_order(c.pattern)) {
    NodeId failed_pred = -1;
    bool upstream_failed = false;
    for (const auto& e : c.pattern.in_edges(n)) {
      if (std::holds_alternative<Crash>(outputs.at(e.src))) {
        upstream_failed = true;
        failed_pred = e.src;
        break;
      }
    }
    if (upstream_failed) {
      outputs[n] = Crash{Crash::Kind::kSkipped, "skipped", "upstream node " + std::to_string(failed_pred) + " failed"};
      continue;
    }
    try {
      TensorValue out =
          execute_node(c.pattern.api(n), node_args(c, n, outputs), precision_, ExecContext{c.seed, n});
      if (targets_ && epsilon_ > 0.0 && targets_->matches(c.pattern, n)) {
        const CounterStream signs(c.seed, RngDomain::kPerturbSign, static_cast<std::uint64_t>(n), 0);
        if (out.dtype() == DType::kF32) {
          add_perturbation(out.data<float>(), epsilon_, signs);
        } else {
          add_perturbation(out.data<double>(), epsilon_, signs);
        }
      }
      outputs[n] = std::move(out);
    } catch (const ValidityError& e) {
      outputs[n] = Crash{Crash::Kind::kError, "validity", e.what()};
    }
  }
  return outputs;
}

std::unique_ptr<Backend> make_backend(const BackendId& id) {
  switch (id.kind) {
    case BackendId::Kind::kRefF32: return std::make_unique<ReferenceBackend>(DType::kF32);
    case BackendId::Kind::kRefF64: return std::make_unique<ReferenceBackend>(DType::kF64);
    case BackendId::Kind::kPerturb:
      return std::make_unique<ReferenceBackend>(id.base_precision, id.epsilon, id.targets);
    case BackendId::Kind::kBridge: return std::make_unique<BridgeBackend>(id.command, id.device);
  }
  throw std::invalid_argument("unknown backend kind");
}

}  // namespace subdiff

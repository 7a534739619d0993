// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/case_io.hpp"

#include <sstream>

#include "json_util.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/generator.hpp"

namespace subdiff {

using detail::json;
using detail::ojson;

TensorValue detail::tensor_from_json(const json& j, const std::string& where) {
  const DType dtype = parse_dtype(as_string(field(j, "dtype", where), where + ".dtype"));
  const json& js = field(j, "shape", where);
  if (!js.is_array()) throw ParseError(where + ".shape: expected an integer array");
  Shape shape;
  for (const auto& d : js) shape.push_back(as_int(d, where + ".shape"));
  for (auto d : shape) {
    if (d < 1) throw ParseError(where + ".shape: dimensions must be >= 1");
  }
  if (shape.empty()) throw ParseError(where + ".shape: must be nonempty");
  try {
    return tensor_from_base64(dtype, shape, as_string(field(j, "b64", where), where + ".b64"));
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

ojson detail::tensor_to_json(const TensorValue& t) {
  ojson j;
  j["dtype"] = std::string(to_string(t.dtype()));
  j["shape"] = t.shape();
  j["b64"] = tensor_to_base64(t);
  return j;
}

std::string dump_case(const TestCase& c, bool inline_tensors) {
  ojson j;
  j["case_id"] = c.case_id;
  j["seed"] = c.seed;
  j["pattern"] = detail::graph_to_json(c.pattern_id, c.pattern);
  j["provenance"] = ojson::object();
  for (const auto& [node, rec] : c.provenance) j["provenance"][std::to_string(node)] = rec;
  j["inline"] = inline_tensors;
  if (inline_tensors) {
    ojson bindings = ojson::array();
    for (const auto& [key, b] : c.bindings) {
      ojson jb;
      jb["node"] = key.first;
      jb["param"] = key.second;
      if (const auto* d = std::get_if<Dependent>(&b)) {
        jb["kind"] = "dependent";
        jb["src"] = d->src;
      } else if (const auto* t = std::get_if<TensorValue>(&b)) {
        jb["kind"] = "tensor";
        jb["tensor"] = detail::tensor_to_json(*t);
      } else {
        jb["kind"] = "scalar";
        jb["value"] = detail::scalar_to_json(std::get<ScalarValue>(b));
      }
      bindings.push_back(std::move(jb));
    }
    j["bindings"] = std::move(bindings);
  }
  return j.dump();
}

TestCase parse_case(const std::string& line, const TraceStore* store) {
  using namespace detail;
  const json j = parse_json(line, "case");
  TestCase c;
  c.case_id = as_string(field(j, "case_id", "case"), "case.case_id");
  const std::string where = "case '" + c.case_id + "'";
  const json& seed = field(j, "seed", where);
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ParseError(where + ".seed: expected an unsigned integer");
  }
  c.seed = seed.get<std::uint64_t>();
  const json& jp = field(j, "pattern", where);
  c.pattern_id = as_string(field(jp, "id", where + ".pattern"), where + ".pattern.id");
  c.pattern = graph_from_json(jp, where + ".pattern");

  const json& prov = field(j, "provenance", where);
  if (!prov.is_object()) throw ParseError(where + ".provenance: expected an object");
  for (const auto& [key, v] : prov.items()) {
    NodeId node = 0;
    try {
      size_t used = 0;
      node = std::stoll(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError(where + ".provenance: bad node id '" + key + "'");
    }
    c.provenance[node] = as_string(v, where + ".provenance." + key);
  }

  const json& inl = field(j, "inline", where);
  if (!inl.is_boolean()) throw ParseError(where + ".inline: expected a boolean");
  if (!inl.get<bool>()) {
    if (store == nullptr) throw ValidationError(where + ": tensors are not inlined; a trace is required");
    TestCase rebuilt;
    try {
      rebuilt = generate_case(c.pattern, *store, c.seed, c.case_id, c.pattern_id);
    } catch (const std::exception& e) {
      throw ValidationError(where + ": cannot regenerate: " + e.what());
    }
    if (rebuilt.provenance != c.provenance) {
      throw ValidationError(where + ": regenerated provenance differs; the trace is not the one used to generate it");
    }
    return rebuilt;
  }

  const json& jb = field(j, "bindings", where);
  if (!jb.is_array()) throw ParseError(where + ".bindings: expected an array");
  for (size_t i = 0; i < jb.size(); ++i) {
    const std::string w = where + ".bindings[" + std::to_string(i) + "]";
    const NodeId node = as_int(field(jb[i], "node", w), w + ".node");
    const std::string param = as_string(field(jb[i], "param", w), w + ".param");
    const std::string kind = as_string(field(jb[i], "kind", w), w + ".kind");
    if (!c.pattern.contains(node)) throw ValidationError(w + ": unknown node " + std::to_string(node));
    if (ApiRegistry::instance().at(c.pattern.api(node)).find(param) == nullptr) {
      throw ValidationError(w + ": " + c.pattern.api(node) + " has no parameter '" + param + "'");
    }
    ParamBinding b;
    if (kind == "dependent") {
      b = Dependent{as_int(field(jb[i], "src", w), w + ".src")};
    } else if (kind == "tensor") {
      b = tensor_from_json(field(jb[i], "tensor", w), w + ".tensor");
    } else if (kind == "scalar") {
      b = scalar_from_json(field(jb[i], "value", w), w + ".value");
    } else {
      throw ParseError(w + ".kind: expected dependent, tensor or scalar");
    }
    if (!c.bindings.emplace(BindingKey{node, param}, std::move(b)).second) {
      throw ValidationError(w + ": duplicate binding");
    }
  }
  size_t dependent = 0;
  for (const auto& [key, b] : c.bindings) {
    if (const auto* d = std::get_if<Dependent>(&b)) {
      bool found = false;
      for (const auto& e : c.pattern.in_edges(key.first)) found = found || (e.src == d->src && e.param == key.second);
      if (!found) {
        throw ValidationError(where + ": dependent binding (" + std::to_string(key.first) + ", " + key.second +
                              ") has no matching edge");
      }
      ++dependent;
    }
  }
  if (dependent != c.pattern.edges().size()) throw ValidationError(where + ": an edge has no dependent binding");
  return c;
}

std::vector<TestCase> parse_cases(const std::string& text, const TraceStore* store) {
  std::vector<TestCase> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_case(line, store));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string dump_outputs(const CaseOutputs& outputs) {
  ojson j;
  j["nodes"] = ojson::array();
  for (const auto& [id, outcome] : outputs) {
    ojson jn;
    jn["id"] = id;
    if (const auto* t = std::get_if<TensorValue>(&outcome)) {
      jn["tensor"] = detail::tensor_to_json(*t);
    } else {
      const auto& c = std::get<Crash>(outcome);
      jn["crash"] = {{"kind", c.kind == Crash::Kind::kSkipped ? "skipped" : "error"},
                     {"category", c.category},
                     {"message", c.message}};
    }
    j["nodes"].push_back(std::move(jn));
  }
  return j.dump();
}

namespace detail {

CaseOutputs outputs_from_json(const json& j, const std::string& where) {
  const json& nodes = field(j, "nodes", where);
  if (!nodes.is_array()) throw ParseError(where + ".nodes: expected an array");
  CaseOutputs out;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const std::string w = where + ".nodes[" + std::to_string(i) + "]";
    const NodeId id = as_int(field(nodes[i], "id", w), w + ".id");
    NodeOutcome outcome;
    if (auto it = nodes[i].find("tensor"); it != nodes[i].end()) {
      outcome = tensor_from_json(*it, w + ".tensor");
    } else if (auto ic = nodes[i].find("crash"); ic != nodes[i].end()) {
      Crash c;
      c.message = as_string(field(*ic, "message", w + ".crash"), w + ".crash.message");
      const auto kind = ic->find("kind");
      c.kind = kind != ic->end() && kind->is_string() && kind->get<std::string>() == "skipped" ? Crash::Kind::kSkipped
                                                                                             : Crash::Kind::kError;
      const auto cat = ic->find("category");
      c.category = cat != ic->end() && cat->is_string() ? cat->get<std::string>()
                                                        : (c.kind == Crash::Kind::kSkipped ? "skipped" : "error");
      outcome = std::move(c);
    } else {
      throw ParseError(w + ": expected a tensor or a crash");
    }
    if (!out.emplace(id, std::move(outcome)).second) throw ParseError(w + ": duplicate node");
  }
  return out;
}

}  // namespace detail

CaseOutputs parse_outputs(const std::string& text) {
  return detail::outputs_from_json(detail::parse_json(text, "outputs"), "outputs");
}

}  // namespace subdiff

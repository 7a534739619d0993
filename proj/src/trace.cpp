// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/trace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json_util.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/graph_io.hpp"

namespace subdiff {

void TensorFeature::validate() const {
  if (shape.empty()) throw ValidationError("tensor shape must be nonempty");
  for (auto d : shape) {
    if (d < 1) throw ValidationError("tensor dims must be >= 1, got " + shape_string(shape));
  }
  if (!std::isfinite(vmin) || !std::isfinite(vmax)) throw ValidationError("value range must be finite");
  if (vmin > vmax) {
    std::ostringstream os;
    os << "value range is empty: min " << vmin << " > max " << vmax;
    throw ValidationError(os.str());
  }
}

std::string_view to_string(ScalarKind kind) {
  switch (kind) {
    case ScalarKind::kInt: return "int";
    case ScalarKind::kFloat: return "float";
    case ScalarKind::kBool: return "bool";
    case ScalarKind::kString: return "string";
    case ScalarKind::kIntTuple: return "int-tuple";
    case ScalarKind::kNone: return "none";
  }
  return "?";
}

ScalarKind parse_scalar_kind(std::string_view s) {
  for (auto k : {ScalarKind::kInt, ScalarKind::kFloat, ScalarKind::kBool, ScalarKind::kString,
                 ScalarKind::kIntTuple, ScalarKind::kNone}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown scalar kind '" + std::string(s) + "'");
}

ScalarValue ScalarValue::of_int(std::int64_t v) {
  ScalarValue s;
  s.kind_ = ScalarKind::kInt;
  s.value_ = v;
  return s;
}
ScalarValue ScalarValue::of_float(double v) {
  ScalarValue s;
  s.kind_ = ScalarKind::kFloat;
  s.value_ = v;
  return s;
}
ScalarValue ScalarValue::of_bool(bool v) {
  ScalarValue s;
  s.kind_ = ScalarKind::kBool;
  s.value_ = v;
  return s;
}
ScalarValue ScalarValue::of_string(std::string v) {
  ScalarValue s;
  s.kind_ = ScalarKind::kString;
  s.value_ = std::move(v);
  return s;
}
ScalarValue ScalarValue::of_tuple(std::vector<std::int64_t> v) {
  ScalarValue s;
  s.kind_ = ScalarKind::kIntTuple;
  s.value_ = std::move(v);
  return s;
}

namespace {

[[noreturn]] void kind_mismatch(ScalarKind have, std::string_view want) {
  throw ValidityError("expected a " + std::string(want) + " value, got " + std::string(to_string(have)));
}

}  // namespace

std::int64_t ScalarValue::as_int() const {
  if (kind_ != ScalarKind::kInt) kind_mismatch(kind_, "int");
  return std::get<std::int64_t>(value_);
}
double ScalarValue::as_float() const {
  if (kind_ == ScalarKind::kInt) return static_cast<double>(std::get<std::int64_t>(value_));
  if (kind_ != ScalarKind::kFloat) kind_mismatch(kind_, "float");
  return std::get<double>(value_);
}
bool ScalarValue::as_bool() const {
  if (kind_ != ScalarKind::kBool) kind_mismatch(kind_, "bool");
  return std::get<bool>(value_);
}
const std::string& ScalarValue::as_string() const {
  if (kind_ != ScalarKind::kString) kind_mismatch(kind_, "string");
  return std::get<std::string>(value_);
}
const std::vector<std::int64_t>& ScalarValue::as_tuple() const {
  if (kind_ != ScalarKind::kIntTuple) kind_mismatch(kind_, "int-tuple");
  return std::get<std::vector<std::int64_t>>(value_);
}

bool ScalarValue::conforms_to(const ApiParam& param) const {
  if (kind_ == ScalarKind::kNone) return param.optional;
  switch (param.kind) {
    case ParamKind::kTensor: return false;
    case ParamKind::kInt: return kind_ == ScalarKind::kInt;
    case ParamKind::kFloat: return kind_ == ScalarKind::kFloat || kind_ == ScalarKind::kInt;
    case ParamKind::kBool: return kind_ == ScalarKind::kBool;
    case ParamKind::kIntTuple: return kind_ == ScalarKind::kIntTuple;
    case ParamKind::kString: return kind_ == ScalarKind::kString;
  }
  return false;
}

void validate_record(const InputRecord& record) {
  const std::string where = "record '" + record.id + "'";
  if (record.id.empty()) throw ValidationError("record with empty id");
  const ApiSignature* sig = ApiRegistry::instance().find(record.api);
  if (sig == nullptr) throw ValidationError(where + ": unknown api '" + record.api + "'");
  for (const auto& [name, feat] : record.tensors) {
    const ApiParam* p = sig->find(name);
    if (p == nullptr) throw ValidationError(where + ": '" + record.api + "' has no parameter '" + name + "'");
    if (p->kind != ParamKind::kTensor) {
      throw ValidationError(where + ": parameter '" + name + "' is " + std::string(to_string(p->kind)) +
                            ", recorded as tensor");
    }
    try {
      feat.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": tensor '" + name + "': " + e.what());
    }
  }
  for (const auto& [name, value] : record.scalars) {
    const ApiParam* p = sig->find(name);
    if (p == nullptr) throw ValidationError(where + ": '" + record.api + "' has no parameter '" + name + "'");
    if (record.tensors.count(name) != 0) throw ValidationError(where + ": parameter '" + name + "' recorded twice");
    if (!value.conforms_to(*p)) {
      throw ValidationError(where + ": parameter '" + name + "' is " + std::string(to_string(p->kind)) +
                            (p->optional ? " (optional)" : "") + ", recorded as " +
                            std::string(to_string(value.kind())));
    }
  }
  for (const auto& p : sig->params) {
    if (p.optional) continue;
    if (record.tensors.count(p.name) == 0 && record.scalars.count(p.name) == 0) {
      throw ValidationError(where + ": required parameter '" + p.name + "' is missing");
    }
  }
}

void TraceStore::add(InputRecord record) {
  validate_record(record);
  if (ids_.count(record.id) != 0) throw ValidationError("duplicate record id '" + record.id + "'");
  ids_.emplace(record.id, record.api);
  auto& bucket = by_api_[record.api];
  auto pos = std::lower_bound(bucket.begin(), bucket.end(), record.id,
                              [](const InputRecord& r, const std::string& id) { return r.id < id; });
  bucket.insert(pos, std::move(record));
}

std::vector<const InputRecord*> TraceStore::query(const std::string& api) const {
  std::vector<const InputRecord*> out;
  auto it = by_api_.find(api);
  if (it == by_api_.end()) return out;
  out.reserve(it->second.size());
  for (const auto& r : it->second) out.push_back(&r);
  return out;
}

std::vector<const InputRecord*> TraceStore::match_records(const std::string& api,
                                                          const DependentBindings& bindings) const {
  std::vector<const InputRecord*> out;
  for (const InputRecord* r : query(api)) {
    bool ok = true;
    for (const auto& [param, ds] : bindings) {
      auto it = r->tensors.find(param);
      if (it == r->tensors.end() || it->second.dtype != ds.first || it->second.shape != ds.second) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(r);
  }
  return out;
}

const InputRecord* TraceStore::find(const std::string& record_id) const {
  auto it = ids_.find(record_id);
  if (it == ids_.end()) return nullptr;
  for (const auto& r : by_api_.at(it->second)) {
    if (r.id == record_id) return &r;
  }
  return nullptr;
}

std::vector<std::string> TraceStore::apis() const {
  std::vector<std::string> out;
  for (const auto& [api, records] : by_api_) out.push_back(api);
  return out;
}

using detail::json;
using detail::ojson;

ScalarValue detail::scalar_from_json(const json& j, const std::string& where) {
  const ScalarKind kind = parse_scalar_kind(detail::as_string(detail::field(j, "kind", where), where + ".kind"));
  const std::string w = where + ".value";
  if (kind == ScalarKind::kNone) {
    auto it = j.find("value");
    if (it != j.end() && !it->is_null()) throw ParseError(w + ": none-kind value must be null");
    return ScalarValue::none();
  }
  const json& v = detail::field(j, "value", where);
  switch (kind) {
    case ScalarKind::kInt: return ScalarValue::of_int(detail::as_int(v, w));
    case ScalarKind::kFloat: return ScalarValue::of_float(detail::as_number(v, w));
    case ScalarKind::kBool:
      if (!v.is_boolean()) throw ParseError(w + ": expected a boolean");
      return ScalarValue::of_bool(v.get<bool>());
    case ScalarKind::kString: return ScalarValue::of_string(detail::as_string(v, w));
    case ScalarKind::kIntTuple: {
      if (!v.is_array()) throw ParseError(w + ": expected an integer array");
      std::vector<std::int64_t> out;
      for (const auto& x : v) out.push_back(detail::as_int(x, w));
      return ScalarValue::of_tuple(std::move(out));
    }
    case ScalarKind::kNone: break;
  }
  return ScalarValue::none();
}

ojson detail::scalar_to_json(const ScalarValue& s) {
  ojson j;
  j["kind"] = std::string(to_string(s.kind()));
  switch (s.kind()) {
    case ScalarKind::kInt: j["value"] = s.as_int(); break;
    case ScalarKind::kFloat: j["value"] = s.as_float(); break;
    case ScalarKind::kBool: j["value"] = s.as_bool(); break;
    case ScalarKind::kString: j["value"] = s.as_string(); break;
    case ScalarKind::kIntTuple: j["value"] = s.as_tuple(); break;
    case ScalarKind::kNone: j["value"] = nullptr; break;
  }
  return j;
}

namespace {

TensorFeature feature_from_json(const json& j, const std::string& where) {
  TensorFeature f;
  f.dtype = parse_dtype(detail::as_string(detail::field(j, "dtype", where), where + ".dtype"));
  const json& shape = detail::field(j, "shape", where);
  if (!shape.is_array()) throw ParseError(where + ".shape: expected an integer array");
  for (const auto& d : shape) f.shape.push_back(detail::as_int(d, where + ".shape"));
  f.vmin = detail::as_number(detail::field(j, "min", where), where + ".min");
  f.vmax = detail::as_number(detail::field(j, "max", where), where + ".max");
  return f;
}

}  // namespace

InputRecord parse_record(const std::string& line) {
  const json j = detail::parse_json(line, "record");
  InputRecord r;
  r.id = detail::as_string(detail::field(j, "id", "record"), "record.id");
  const std::string where = "record '" + r.id + "'";
  r.api = detail::as_string(detail::field(j, "api", where), where + ".api");
  if (auto it = j.find("tensors"); it != j.end()) {
    if (!it->is_object()) throw ParseError(where + ".tensors: expected an object");
    for (const auto& [name, v] : it->items()) r.tensors[name] = feature_from_json(v, where + ".tensors." + name);
  }
  if (auto it = j.find("scalars"); it != j.end()) {
    if (!it->is_object()) throw ParseError(where + ".scalars: expected an object");
    for (const auto& [name, v] : it->items()) r.scalars[name] = detail::scalar_from_json(v, where + ".scalars." + name);
  }
  validate_record(r);
  return r;
}

std::string dump_record(const InputRecord& record) {
  ojson j;
  j["id"] = record.id;
  j["api"] = record.api;
  j["tensors"] = ojson::object();
  for (const auto& [name, f] : record.tensors) {
    ojson t;
    t["dtype"] = std::string(to_string(f.dtype));
    t["shape"] = f.shape;
    t["min"] = f.vmin;
    t["max"] = f.vmax;
    j["tensors"][name] = std::move(t);
  }
  j["scalars"] = ojson::object();
  for (const auto& [name, s] : record.scalars) j["scalars"][name] = detail::scalar_to_json(s);
  return j.dump();
}

namespace {

void ingest_into(IngestResult& result, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.store.add(parse_record(line));
      ++result.report.accepted;
    } catch (const std::exception& e) {
      ++result.report.rejected;
      result.report.diagnostics.push_back(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

IngestResult ingest_text(const std::string& text, const std::string& source) {
  IngestResult result;
  ingest_into(result, text, source);
  return result;
}

IngestResult ingest(const std::filesystem::path& path) { return ingest_text(read_file(path), path.string()); }

IngestResult ingest(const std::vector<std::filesystem::path>& paths) {
  IngestResult result;
  for (const auto& path : paths) ingest_into(result, read_file(path), path.string());
  return result;
}

std::string emit_trace(const TraceStore& store) {
  std::string out;
  for (const auto& api : store.apis()) {
    for (const InputRecord* r : store.query(api)) {
      out += dump_record(*r);
      out += '\n';
    }
  }
  return out;
}

}  // namespace subdiff

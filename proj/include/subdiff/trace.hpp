// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "subdiff/api.hpp"
#include "subdiff/tensor.hpp"

namespace subdiff {

/// Recorded features of one tensor argument: dtype, shape, closed value range.
struct TensorFeature {
  DType dtype = DType::kF32;
  Shape shape;
  double vmin = 0.0;
  double vmax = 0.0;

  void validate() const;  // throws ValidationError
  friend bool operator==(const TensorFeature&, const TensorFeature&) = default;
};

enum class ScalarKind { kInt, kFloat, kBool, kString, kIntTuple, kNone };

std::string_view to_string(ScalarKind kind);
ScalarKind parse_scalar_kind(std::string_view s);  // throws ParseError

/// A non-tensor argument value together with its kind.
class ScalarValue {
 public:
  ScalarValue() = default;  // none

  static ScalarValue none() { return {}; }
  static ScalarValue of_int(std::int64_t v);
  static ScalarValue of_float(double v);
  static ScalarValue of_bool(bool v);
  static ScalarValue of_string(std::string v);
  static ScalarValue of_tuple(std::vector<std::int64_t> v);

  ScalarKind kind() const { return kind_; }
  bool is_none() const { return kind_ == ScalarKind::kNone; }

  // Checked accessors; throw ValidityError on kind mismatch. `as_float`
  // also accepts int values.
  std::int64_t as_int() const;
  double as_float() const;
  bool as_bool() const;
  const std::string& as_string() const;
  const std::vector<std::int64_t>& as_tuple() const;

  // Whether a value of this kind may bind a parameter of `param`'s kind.
  bool conforms_to(const ApiParam& param) const;

  friend bool operator==(const ScalarValue&, const ScalarValue&) = default;

 private:
  ScalarKind kind_ = ScalarKind::kNone;
  std::variant<std::monostate, std::int64_t, double, bool, std::string, std::vector<std::int64_t>> value_;
};

/// One observed invocation of an operator.
struct InputRecord {
  std::string id;
  std::string api;
  std::map<std::string, TensorFeature> tensors;
  std::map<std::string, ScalarValue> scalars;

  friend bool operator==(const InputRecord&, const InputRecord&) = default;
};

/// Checks a record against the operator registry; throws ValidationError.
void validate_record(const InputRecord& record);

using DependentBindings = std::map<std::string, std::pair<DType, Shape>>;

/// Validated records indexed by operator. Immutable once built.
class TraceStore {
 public:
  // Validates and inserts; throws ValidationError (including duplicate ids).
  void add(InputRecord record);

  /// Records for `api` ordered by record id. Empty for unknown apis.
  std::vector<const InputRecord*> query(const std::string& api) const;

  /// Records whose features for every bound parameter have exactly the
  /// given dtype and shape.
  std::vector<const InputRecord*> match_records(const std::string& api,
                                                const DependentBindings& bindings) const;

  const InputRecord* find(const std::string& record_id) const;
  size_t size() const { return ids_.size(); }
  std::vector<std::string> apis() const;

  friend bool operator==(const TraceStore& a, const TraceStore& b) { return a.by_api_ == b.by_api_; }

 private:
  std::map<std::string, std::vector<InputRecord>> by_api_;
  std::map<std::string, std::string> ids_;  // record id -> api
};

struct IngestReport {
  size_t accepted = 0;
  size_t rejected = 0;
  std::vector<std::string> diagnostics;  // one per rejected line
};

struct IngestResult {
  TraceStore store;
  IngestReport report;
};

// Trace format: one JSON object per line
//   {"id": str, "api": str,
//    "tensors": {param: {"dtype": "f32"|"f64", "shape": [int], "min": num, "max": num}},
//    "scalars": {param: {"kind": "int"|"float"|"bool"|"string"|"int-tuple"|"none",
//                        "value": literal}}}
// Blank lines are ignored. Invalid records are rejected and reported, never
// fatal. An unreadable file throws ParseError.
IngestResult ingest_text(const std::string& text, const std::string& source = "trace");
IngestResult ingest(const std::filesystem::path& path);
IngestResult ingest(const std::vector<std::filesystem::path>& paths);

InputRecord parse_record(const std::string& line);  // throws ParseError / ValidationError
std::string dump_record(const InputRecord& record);  // single line, no newline
std::string emit_trace(const TraceStore& store);

}  // namespace subdiff

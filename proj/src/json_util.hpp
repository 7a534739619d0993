// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

// Internal helpers shared by the JSON-backed file formats.

#pragma once

#include <string>

#include "json.hpp"
#include "subdiff/backend.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/graph.hpp"
#include "subdiff/tensor.hpp"
#include "subdiff/trace.hpp"

namespace subdiff::detail {

using json = nlohmann::json;
// Preserves key insertion order so emitted files follow the documented
// field order.
using ojson = nlohmann::ordered_json;

// Parses `text`, converting nlohmann's byte offset into a line number.
json parse_json(const std::string& text, const std::string& what);

const json& field(const json& obj, const char* name, const std::string& where);
std::string as_string(const json& v, const std::string& where);
std::int64_t as_int(const json& v, const std::string& where);
double as_number(const json& v, const std::string& where);

ComputationGraph graph_from_json(const json& j, const std::string& where);
ojson graph_to_json(const std::string& id, const ComputationGraph& g);

// {"kind": ..., "value": ...}
ScalarValue scalar_from_json(const json& j, const std::string& where);
ojson scalar_to_json(const ScalarValue& s);

// {"dtype": "f32"|"f64", "shape": [...], "b64": "..."}
TensorValue tensor_from_json(const json& j, const std::string& where);
ojson tensor_to_json(const TensorValue& t);

// {"nodes": [{"id": int, "tensor": {...}} | {"id": int, "crash": {...}}]}
CaseOutputs outputs_from_json(const json& j, const std::string& where);

}  // namespace subdiff::detail

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "subdiff/backend.hpp"
#include "subdiff/test_case.hpp"
#include "subdiff/trace.hpp"

namespace subdiff {

// Case file: one JSON object per line
//   {"case_id": str, "seed": u64,
//    "pattern": {"id": str, "nodes": [...], "edges": [...]},
//    "provenance": {"<node>": record id | "-"},
//    "inline": bool,
//    "bindings": [{"node": int, "param": str, "kind": "dependent", "src": int}
//               | {"node": int, "param": str, "kind": "scalar", "value": {"kind": ..., "value": ...}}
//               | {"node": int, "param": str, "kind": "tensor",
//                  "tensor": {"dtype": "f32"|"f64", "shape": [...], "b64": str}}]}
// Without inlining, "bindings" is omitted and the case is regenerated from
// the trace store and seed on load.
std::string dump_case(const TestCase& c, bool inline_tensors);

/// Parses one case line. A non-inlined case needs `store` and is rebuilt with
/// generate_case; its provenance must match the recorded one. Throws
/// ParseError / ValidationError.
TestCase parse_case(const std::string& line, const TraceStore* store = nullptr);

std::vector<TestCase> parse_cases(const std::string& text, const TraceStore* store = nullptr);

// Per-node outputs: {"nodes": [{"id": int, "tensor": {...}}
//                            | {"id": int, "crash": {"kind": "error"|"skipped",
//                                                    "category": str, "message": str}}]}
std::string dump_outputs(const CaseOutputs& outputs);
CaseOutputs parse_outputs(const std::string& text);

}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "subdiff/backend.hpp"
#include "subdiff/graph.hpp"
#include "subdiff/test_case.hpp"
#include "subdiff/trace.hpp"

namespace subdiff {

inline constexpr double kDefaultThreshold = 1e-3;

/// Per-API threshold overrides; APIs not listed use the campaign threshold.
using OpThresholds = std::map<std::string, double>;

enum class NodeStatus { kOk, kPrecision, kNan, kCrashOneSide, kCrashBoth, kSkipped };

std::string_view to_string(NodeStatus status);
NodeStatus parse_node_status(std::string_view s);  // throws ParseError

struct NodeDiff {
  NodeId id = 0;
  std::string api;
  NodeStatus status = NodeStatus::kOk;
  // Maximum |a - b| over element pairs where neither side is NaN, compared
  // in f64. Empty when no tensor pair was compared.
  std::optional<double> max_abs_diff;
  std::string diagnostic;
  // A bug signal: every status except ok and skipped, and crash-both only
  // when the two sides failed with different categories.
  bool failing = false;

  friend bool operator==(const NodeDiff&, const NodeDiff&) = default;
};

/// Bug symptoms present in a case.
struct BugKinds {
  bool crash = false;
  bool nan = false;
  bool precision = false;

  bool any() const { return crash || nan || precision; }
  friend bool operator==(const BugKinds&, const BugKinds&) = default;
};

struct CaseReport {
  std::string case_id;
  std::string pattern_id;
  std::string backend_a;
  std::string backend_b;
  double threshold = kDefaultThreshold;
  OpThresholds op_thresholds;
  // False when a backend could not serve the case; `error` says why.
  bool evaluated = true;
  std::string error;
  std::vector<NodeDiff> nodes;  // topological order
  std::set<NodeId> implicated;
  BugKinds classification;

  friend bool operator==(const CaseReport&, const CaseReport&) = default;
};

/// Elementwise comparison of one node's outcomes. The returned diff has no
/// id or api.
NodeDiff compare(const NodeOutcome& a, const NodeOutcome& b, double threshold);

/// Union of each failing node and its ancestors.
std::set<NodeId> implicated_nodes(const ComputationGraph& g, const std::vector<NodeDiff>& nodes);

CaseReport build_report(const TestCase& c, const std::string& backend_a, const std::string& backend_b,
                        const CaseOutputs& a, const CaseOutputs& b, double threshold,
                        const OpThresholds& op_thresholds = {});

struct DifferentialRun {
  CaseReport report;
  CaseOutputs outputs_a;
  CaseOutputs outputs_b;
  double seconds_a = 0.0;
  double seconds_b = 0.0;
};

/// Runs `c` on both backends and compares them. BackendUnavailable yields
/// an unevaluated report instead of an exception.
DifferentialRun run_differential(const TestCase& c, Backend& a, Backend& b, double threshold,
                                 const OpThresholds& op_thresholds = {});

/// Single-operator case for node `n` of `c`: dependent parameters become the
/// tensors `upstream` holds for their sources; other bindings and the seed
/// are kept. Throws ValidityError if a source has no tensor.
TestCase isolate_node(const TestCase& c, NodeId n, const CaseOutputs& upstream);

struct GenerationStats {
  std::uint64_t cases_requested = 0;
  std::uint64_t cases_generated = 0;
  std::uint64_t cases_abandoned = 0;       // NoCompatibleRecord
  std::uint64_t cases_invalid = 0;         // rejected by shape inference while generating
  std::uint64_t cases_unevaluated = 0;     // a backend was unavailable
  // Operator invocations (both backends, skipped nodes excluded, plus one per
  // invalid generated case) and how many of them produced a tensor.
  std::uint64_t node_executions = 0;
  std::uint64_t valid_node_executions = 0;
  std::uint64_t validity_errors = 0;
  std::uint64_t skipped_nodes = 0;
  std::vector<std::string> diagnostics;  // abandoned / invalid / unevaluated, in case order

  friend bool operator==(const GenerationStats&, const GenerationStats&) = default;
};

struct CampaignConfig {
  BackendId backend_a = BackendId::ref(DType::kF32);
  BackendId backend_b = BackendId::ref(DType::kF64);
  double threshold = kDefaultThreshold;
  OpThresholds op_thresholds;
  std::uint64_t cases_per_pattern = 10;
  std::uint64_t seed = 0;
  unsigned jobs = 0;  // 0: hardware concurrency
};

struct CaseTiming {
  std::string case_id;
  double seconds_a = 0.0;
  double seconds_b = 0.0;
};

struct CampaignResult {
  std::vector<CaseReport> reports;  // sorted by case_id
  GenerationStats stats;
  std::vector<CaseTiming> timings;  // same order as reports
};

/// Generates `cases_per_pattern` cases per pattern with seeds from
/// case_seed(seed, pattern index, case index) and runs them. Case ids are
/// "<pattern id>-<5-digit index>". Output is independent of `jobs`.
CampaignResult run_campaign(const std::vector<GraphEntry>& patterns, const TraceStore& store,
                            const CampaignConfig& cfg);

/// Runs prebuilt cases.
CampaignResult run_cases(const std::vector<TestCase>& cases, const CampaignConfig& cfg);

// Report file: one JSON object per line, see dump_report.
std::string dump_report(const CaseReport& r);
CaseReport parse_report(const std::string& line);  // throws ParseError
std::vector<CaseReport> parse_reports(const std::string& text);

std::string dump_stats(const GenerationStats& s);
GenerationStats parse_stats(const std::string& text);  // throws ParseError

}  // namespace subdiff

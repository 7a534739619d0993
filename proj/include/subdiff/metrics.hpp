// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subdiff/harness.hpp"

namespace subdiff {

/// passed / total, or empty when total is 0.
std::optional<double> valid_ratio(std::uint64_t passed, std::uint64_t total);
std::optional<double> valid_ratio(const GenerationStats& stats);

/// Per api: cases in which some node of that api is implicated, over cases
/// executing a node of that api. Unevaluated reports are ignored.
std::map<std::string, double> involvement_frequency(const std::vector<CaseReport>& reports);

/// Node-level variant: implicated node occurrences over executed occurrences.
std::map<std::string, double> involvement_frequency_nodes(const std::vector<CaseReport>& reports);

/// Per api: mean max_abs_diff over ok and precision nodes with a finite diff.
std::map<std::string, double> average_diff(const std::vector<CaseReport>& reports);

struct BugTally {
  std::uint64_t crash = 0;
  std::uint64_t nan = 0;
  std::uint64_t precision = 0;

  friend bool operator==(const BugTally&, const BugTally&) = default;
};

/// The same findings counted per failing node, per case and per pattern.
struct BugCounts {
  BugTally nodes;
  BugTally cases;
  BugTally patterns;

  friend bool operator==(const BugCounts&, const BugCounts&) = default;
};

BugCounts bug_counts(const std::vector<CaseReport>& reports);

struct CampaignMetrics {
  std::optional<double> valid_ratio;
  std::uint64_t cases_evaluated = 0;
  std::uint64_t cases_unevaluated = 0;
  std::uint64_t cases_failing = 0;
  std::map<std::string, double> involvement;
  std::map<std::string, double> involvement_nodes;
  std::map<std::string, double> average_diff;
  std::map<std::string, std::uint64_t> nan_nodes;  // per api
  BugCounts bugs;
};

CampaignMetrics compute_metrics(const std::vector<CaseReport>& reports, const std::optional<GenerationStats>& stats);

std::string dump_metrics(const CampaignMetrics& m);   // JSON
std::string metrics_table(const CampaignMetrics& m);  // plain text

}  // namespace subdiff

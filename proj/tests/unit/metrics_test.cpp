// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "subdiff/metrics.hpp"

namespace subdiff {
namespace {

NodeDiff node(NodeId id, std::string api, NodeStatus st, std::optional<double> diff, bool failing = false) {
  return {id, std::move(api), st, diff, "", failing};
}

CaseReport add_ln_linear_report() {
  CaseReport r;
  r.case_id = "aln-00000";
  r.pattern_id = "aln";
  r.nodes = {node(0, "__add__", NodeStatus::kOk, 0.0), node(1, "layer_norm", NodeStatus::kOk, 2.28882e-5),
             node(2, "linear", NodeStatus::kPrecision, 0.17188, true)};
  r.implicated = {0, 1, 2};
  r.classification.precision = true;
  return r;
}

// Random reports with a consistent structure: statuses drawn per node,
// implicated = failing nodes plus all earlier nodes (a chain).
std::vector<CaseReport> fabricate(std::mt19937_64& rng, int count) {
  const std::vector<std::string> apis{"relu", "gelu", "linear", "softmax"};
  const std::vector<NodeStatus> statuses{NodeStatus::kOk,           NodeStatus::kOk,        NodeStatus::kPrecision,
                                         NodeStatus::kNan,          NodeStatus::kCrashOneSide, NodeStatus::kCrashBoth,
                                         NodeStatus::kSkipped};
  std::uniform_int_distribution<size_t> pick_api(0, apis.size() - 1), pick_st(0, statuses.size() - 1);
  std::uniform_int_distribution<int> len(1, 5);
  std::uniform_real_distribution<double> diff(0, 0.01);
  std::bernoulli_distribution coin(0.5), rare(0.1);
  std::vector<CaseReport> out;
  for (int i = 0; i < count; ++i) {
    CaseReport r;
    r.case_id = "c" + std::to_string(i);
    r.pattern_id = "p" + std::to_string(i % 4);
    r.evaluated = !rare(rng);
    if (!r.evaluated) {
      r.error = "down";
      out.push_back(r);
      continue;
    }
    const int n = len(rng);
    NodeId last_failing = -1;
    for (int k = 0; k < n; ++k) {
      NodeDiff d;
      d.id = k;
      d.api = apis[pick_api(rng)];
      d.status = statuses[pick_st(rng)];
      switch (d.status) {
        case NodeStatus::kOk: d.max_abs_diff = rare(rng) ? 0.0 : diff(rng) / 20; break;
        case NodeStatus::kPrecision:
          d.max_abs_diff = rare(rng) ? std::numeric_limits<double>::infinity() : 0.001 + diff(rng);
          d.failing = true;
          r.classification.precision = true;
          break;
        case NodeStatus::kNan:
          d.max_abs_diff = diff(rng);
          d.failing = true;
          r.classification.nan = true;
          break;
        case NodeStatus::kCrashOneSide:
          d.failing = true;
          r.classification.crash = true;
          break;
        case NodeStatus::kCrashBoth:
          d.failing = coin(rng);
          r.classification.crash = r.classification.crash || d.failing;
          break;
        case NodeStatus::kSkipped: break;
      }
      if (d.failing) last_failing = k;
      r.nodes.push_back(d);
    }
    for (NodeId k = 0; k <= last_failing; ++k) r.implicated.insert(k);
    out.push_back(r);
  }
  return out;
}

TEST(ValidRatio, Examples) {
  EXPECT_EQ(valid_ratio(15000, 15000), 1.0);
  EXPECT_EQ(valid_ratio(0, 10), 0.0);
  EXPECT_DOUBLE_EQ(*valid_ratio(4044, 10000), 0.4044);
  EXPECT_FALSE(valid_ratio(0, 0).has_value());
  GenerationStats s;
  s.node_executions = 8;
  s.valid_node_executions = 6;
  EXPECT_EQ(valid_ratio(s), 0.75);
}

TEST(Involvement, ProfileReportImplicatesAllThree) {
  const auto inv = involvement_frequency({add_ln_linear_report()});
  EXPECT_EQ(inv, (std::map<std::string, double>{{"__add__", 1.0}, {"layer_norm", 1.0}, {"linear", 1.0}}));
}

TEST(Involvement, NoFailuresMeansZero) {
  CaseReport r = add_ln_linear_report();
  r.nodes[2] = node(2, "linear", NodeStatus::kOk, 1e-4);
  r.implicated.clear();
  r.classification = {};
  for (const auto& [api, v] : involvement_frequency({r, r})) EXPECT_EQ(v, 0.0) << api;
}

TEST(Involvement, CountsCasesNotNodes) {
  CaseReport r;
  r.case_id = "x";
  r.nodes = {node(0, "relu", NodeStatus::kPrecision, 1.0, true), node(1, "relu", NodeStatus::kOk, 0.0)};
  r.implicated = {0};
  EXPECT_EQ(involvement_frequency({r}).at("relu"), 1.0);
  EXPECT_EQ(involvement_frequency_nodes({r}).at("relu"), 0.5);
}

TEST(AverageDiff, Examples) {
  CaseReport r;
  r.nodes = {node(0, "gelu", NodeStatus::kOk, 0.5)};
  EXPECT_EQ(average_diff({r}), (std::map<std::string, double>{{"gelu", 0.5}}));
  r.nodes = {node(0, "relu", NodeStatus::kOk, 0.0), node(1, "relu", NodeStatus::kPrecision, 1.0, true),
             node(2, "relu", NodeStatus::kNan, 7.0, true), node(3, "relu", NodeStatus::kCrashOneSide, {}, true)};
  EXPECT_EQ(average_diff({r}).at("relu"), 0.5);
}

TEST(Metrics, MatchNaiveTallyOnFabricatedReports) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto reports = fabricate(rng, 10 + trial % 11);
    // Independent tally.
    std::map<std::string, std::pair<int, int>> inv;
    std::map<std::string, std::pair<double, int>> avg;
    BugCounts bugs;
    std::set<std::string> pc, pn, pp;
    for (const auto& r : reports) {
      if (!r.evaluated) continue;
      for (const auto& api : std::set<std::string>{"relu", "gelu", "linear", "softmax"}) {
        bool ran = false, hit = false;
        for (const auto& d : r.nodes) {
          if (d.api != api || d.status == NodeStatus::kSkipped) continue;
          ran = true;
          hit = hit || r.implicated.count(d.id);
        }
        if (ran) {
          inv[api].second += 1;
          inv[api].first += hit ? 1 : 0;
        }
      }
      for (const auto& d : r.nodes) {
        if ((d.status == NodeStatus::kOk || d.status == NodeStatus::kPrecision) && std::isfinite(*d.max_abs_diff)) {
          avg[d.api].first += *d.max_abs_diff;
          avg[d.api].second += 1;
        }
        if (!d.failing) continue;
        if (d.status == NodeStatus::kPrecision) {
          ++bugs.nodes.precision;
        } else if (d.status == NodeStatus::kNan) {
          ++bugs.nodes.nan;
        } else {
          ++bugs.nodes.crash;
        }
      }
      if (r.classification.crash) ++bugs.cases.crash, pc.insert(r.pattern_id);
      if (r.classification.nan) ++bugs.cases.nan, pn.insert(r.pattern_id);
      if (r.classification.precision) ++bugs.cases.precision, pp.insert(r.pattern_id);
    }
    bugs.patterns = {pc.size(), pn.size(), pp.size()};

    const auto got_inv = involvement_frequency(reports);
    ASSERT_EQ(got_inv.size(), inv.size());
    for (const auto& [api, c] : inv) {
      EXPECT_DOUBLE_EQ(got_inv.at(api), static_cast<double>(c.first) / c.second);
      EXPECT_LE(got_inv.at(api), 1.0);
    }
    const auto got_avg = average_diff(reports);
    ASSERT_EQ(got_avg.size(), avg.size());
    for (const auto& [api, s] : avg) EXPECT_NEAR(got_avg.at(api), s.first / s.second, 1e-15);
    EXPECT_EQ(bug_counts(reports), bugs);

    auto shuffled = reports;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(dump_metrics(compute_metrics(shuffled, std::nullopt)), dump_metrics(compute_metrics(reports, std::nullopt)));
  }
}

TEST(Metrics, ComputeAndRender) {
  CaseReport down;
  down.evaluated = false;
  GenerationStats s;
  s.node_executions = 6;
  s.valid_node_executions = 6;
  const CampaignMetrics m = compute_metrics({add_ln_linear_report(), down}, s);
  EXPECT_EQ(m.valid_ratio, 1.0);
  EXPECT_EQ(m.cases_evaluated, 1u);
  EXPECT_EQ(m.cases_unevaluated, 1u);
  EXPECT_EQ(m.cases_failing, 1u);
  EXPECT_EQ(m.bugs.cases.precision, 1u);
  EXPECT_EQ(m.bugs.patterns.precision, 1u);
  EXPECT_NE(dump_metrics(m).find("\"valid_ratio\": 1.0"), std::string::npos);
  const std::string table = metrics_table(m);
  EXPECT_NE(table.find("100.00%"), std::string::npos);
  EXPECT_NE(table.find("layer_norm"), std::string::npos);
  EXPECT_NE(metrics_table(compute_metrics({}, std::nullopt)).find("n/a"), std::string::npos);
}

}  // namespace
}  // namespace subdiff

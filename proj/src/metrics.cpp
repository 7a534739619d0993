// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json_util.hpp"

namespace subdiff {

std::optional<double> valid_ratio(std::uint64_t passed, std::uint64_t total) {
  if (total == 0) return std::nullopt;
  return static_cast<double>(passed) / static_cast<double>(total);
}

std::optional<double> valid_ratio(const GenerationStats& stats) {
  return valid_ratio(stats.valid_node_executions, stats.node_executions);
}

namespace {

std::map<std::string, double> ratios(const std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>& counts) {
  std::map<std::string, double> out;
  for (const auto& [api, c] : counts) out[api] = static_cast<double>(c.first) / static_cast<double>(c.second);
  return out;
}

bool executed(const NodeDiff& d) { return d.status != NodeStatus::kSkipped; }

}  // namespace

std::map<std::string, double> involvement_frequency(const std::vector<CaseReport>& reports) {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> counts;  // implicated, executed
  for (const auto& r : reports) {
    if (!r.evaluated) continue;
    std::set<std::string> ran;
    std::set<std::string> hit;
    for (const auto& d : r.nodes) {
      if (!executed(d)) continue;
      ran.insert(d.api);
      if (r.implicated.count(d.id) != 0) hit.insert(d.api);
    }
    for (const auto& api : ran) {
      auto& c = counts[api];
      ++c.second;
      if (hit.count(api) != 0) ++c.first;
    }
  }
  return ratios(counts);
}

std::map<std::string, double> involvement_frequency_nodes(const std::vector<CaseReport>& reports) {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> counts;
  for (const auto& r : reports) {
    if (!r.evaluated) continue;
    for (const auto& d : r.nodes) {
      if (!executed(d)) continue;
      auto& c = counts[d.api];
      ++c.second;
      if (r.implicated.count(d.id) != 0) ++c.first;
    }
  }
  return ratios(counts);
}

std::map<std::string, double> average_diff(const std::vector<CaseReport>& reports) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& r : reports) {
    if (!r.evaluated) continue;
    for (const auto& d : r.nodes) {
      if (d.status != NodeStatus::kOk && d.status != NodeStatus::kPrecision) continue;
      if (!d.max_abs_diff || !std::isfinite(*d.max_abs_diff)) continue;
      values[d.api].push_back(*d.max_abs_diff);
    }
  }
  // Summing in sorted order keeps the mean independent of report order.
  std::map<std::string, double> out;
  for (auto& [api, v] : values) {
    std::sort(v.begin(), v.end());
    double sum = 0;
    for (double x : v) sum += x;
    out[api] = sum / static_cast<double>(v.size());
  }
  return out;
}

BugCounts bug_counts(const std::vector<CaseReport>& reports) {
  BugCounts b;
  std::set<std::string> crash_p;
  std::set<std::string> nan_p;
  std::set<std::string> prec_p;
  for (const auto& r : reports) {
    if (!r.evaluated) continue;
    for (const auto& d : r.nodes) {
      if (!d.failing) continue;
      if (d.status == NodeStatus::kPrecision) {
        ++b.nodes.precision;
      } else if (d.status == NodeStatus::kNan) {
        ++b.nodes.nan;
      } else {
        ++b.nodes.crash;
      }
    }
    if (r.classification.crash) {
      ++b.cases.crash;
      crash_p.insert(r.pattern_id);
    }
    if (r.classification.nan) {
      ++b.cases.nan;
      nan_p.insert(r.pattern_id);
    }
    if (r.classification.precision) {
      ++b.cases.precision;
      prec_p.insert(r.pattern_id);
    }
  }
  b.patterns = {crash_p.size(), nan_p.size(), prec_p.size()};
  return b;
}

CampaignMetrics compute_metrics(const std::vector<CaseReport>& reports, const std::optional<GenerationStats>& stats) {
  CampaignMetrics m;
  if (stats) m.valid_ratio = valid_ratio(*stats);
  for (const auto& r : reports) {
    if (!r.evaluated) {
      ++m.cases_unevaluated;
      continue;
    }
    ++m.cases_evaluated;
    if (r.classification.any()) ++m.cases_failing;
    for (const auto& d : r.nodes) {
      if (d.status == NodeStatus::kNan) ++m.nan_nodes[d.api];
    }
  }
  m.involvement = involvement_frequency(reports);
  m.involvement_nodes = involvement_frequency_nodes(reports);
  m.average_diff = average_diff(reports);
  m.bugs = bug_counts(reports);
  return m;
}

namespace {

detail::ojson tally_json(const BugTally& t) {
  detail::ojson j;
  j["crash"] = t.crash;
  j["nan"] = t.nan;
  j["precision"] = t.precision;
  return j;
}

}  // namespace

std::string dump_metrics(const CampaignMetrics& m) {
  detail::ojson j;
  j["valid_ratio"] = m.valid_ratio ? detail::ojson(*m.valid_ratio) : detail::ojson(nullptr);
  j["cases_evaluated"] = m.cases_evaluated;
  j["cases_unevaluated"] = m.cases_unevaluated;
  j["cases_failing"] = m.cases_failing;
  j["involvement"] = m.involvement;
  j["involvement_nodes"] = m.involvement_nodes;
  j["average_diff"] = m.average_diff;
  j["nan_nodes"] = m.nan_nodes;
  j["bug_counts"] = {{"nodes", tally_json(m.bugs.nodes)},
                     {"cases", tally_json(m.bugs.cases)},
                     {"patterns", tally_json(m.bugs.patterns)}};
  return j.dump(2) + "\n";
}

std::string metrics_table(const CampaignMetrics& m) {
  std::string out;
  char buf[256];
  if (m.valid_ratio) {
    std::snprintf(buf, sizeof buf, "Ratio of valid inputs R: %.2f%%\n", 100.0 * *m.valid_ratio);
  } else {
    std::snprintf(buf, sizeof buf, "Ratio of valid inputs R: n/a\n");
  }
  out += buf;
  std::snprintf(buf, sizeof buf, "Cases: %llu evaluated, %llu unevaluated, %llu with findings\n\n",
                static_cast<unsigned long long>(m.cases_evaluated), static_cast<unsigned long long>(m.cases_unevaluated),
                static_cast<unsigned long long>(m.cases_failing));
  out += buf;
  std::snprintf(buf, sizeof buf, "%-22s %12s %12s %14s %6s\n", "api", "involvement", "inv. (node)", "avg diff", "nan");
  out += buf;
  for (const auto& [api, inv] : m.involvement) {
    auto nodes_it = m.involvement_nodes.find(api);
    auto diff_it = m.average_diff.find(api);
    auto nan_it = m.nan_nodes.find(api);
    char diff[32] = "n/a";
    if (diff_it != m.average_diff.end()) std::snprintf(diff, sizeof diff, "%.6g", diff_it->second);
    std::snprintf(buf, sizeof buf, "%-22s %12.4f %12.4f %14s %6llu\n", api.c_str(), inv,
                  nodes_it == m.involvement_nodes.end() ? 0.0 : nodes_it->second, diff,
                  static_cast<unsigned long long>(nan_it == m.nan_nodes.end() ? 0 : nan_it->second));
    out += buf;
  }
  out += "\n";
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %10s\n", "bugs", "crash", "nan", "precision");
  out += buf;
  const std::pair<const char*, const BugTally*> rows[] = {
      {"nodes", &m.bugs.nodes}, {"cases", &m.bugs.cases}, {"patterns", &m.bugs.patterns}};
  for (const auto& [label, t] : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %8llu %8llu %10llu\n", label, static_cast<unsigned long long>(t->crash),
                  static_cast<unsigned long long>(t->nan), static_cast<unsigned long long>(t->precision));
    out += buf;
  }
  return out;
}

}  // namespace subdiff

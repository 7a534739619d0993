// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/generator.hpp"

namespace subdiff {

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::kOk: return "ok";
    case NodeStatus::kPrecision: return "precision";
    case NodeStatus::kNan: return "nan";
    case NodeStatus::kCrashOneSide: return "crash-one-side";
    case NodeStatus::kCrashBoth: return "crash-both";
    case NodeStatus::kSkipped: return "skipped";
  }
  return "?";
}

NodeStatus parse_node_status(std::string_view s) {
  for (auto st : {NodeStatus::kOk, NodeStatus::kPrecision, NodeStatus::kNan, NodeStatus::kCrashOneSide,
                  NodeStatus::kCrashBoth, NodeStatus::kSkipped}) {
    if (to_string(st) == s) return st;
  }
  throw ParseError("unknown node status '" + std::string(s) + "'");
}

NodeDiff compare(const NodeOutcome& a, const NodeOutcome& b, double threshold) {
  NodeDiff d;
  const auto* ca = std::get_if<Crash>(&a);
  const auto* cb = std::get_if<Crash>(&b);
  if ((ca != nullptr && ca->kind == Crash::Kind::kSkipped) || (cb != nullptr && cb->kind == Crash::Kind::kSkipped)) {
    d.status = NodeStatus::kSkipped;
    d.diagnostic = "upstream node failed";
    return d;
  }
  if (ca != nullptr && cb != nullptr) {
    d.status = NodeStatus::kCrashBoth;
    d.failing = ca->category != cb->category;
    d.diagnostic = d.failing ? "categories differ (" + ca->category + " vs " + cb->category + "): " + ca->message
                             : ca->category + ": " + ca->message;
    return d;
  }
  if (ca != nullptr || cb != nullptr) {
    d.status = NodeStatus::kCrashOneSide;
    d.failing = true;
    d.diagnostic = std::string(ca != nullptr ? "a" : "b") + " crashed (" + (ca ? ca : cb)->category +
                   "): " + (ca ? ca : cb)->message;
    return d;
  }
  const auto& ta = std::get<TensorValue>(a);
  const auto& tb = std::get<TensorValue>(b);
  if (ta.shape() != tb.shape()) {
    d.status = NodeStatus::kCrashOneSide;
    d.failing = true;
    d.diagnostic = "output-shape divergence: " + shape_string(ta.shape()) + " vs " + shape_string(tb.shape());
    return d;
  }
  double worst = 0.0;
  size_t nan_at = std::numeric_limits<size_t>::max();
  size_t nan_count = 0;
  for (size_t i = 0; i < ta.size(); ++i) {
    const double x = ta.at(i);
    const double y = tb.at(i);
    const bool nx = std::isnan(x);
    const bool ny = std::isnan(y);
    if (nx || ny) {
      if (nx != ny) {
        if (nan_count++ == 0) nan_at = i;
      }
      continue;
    }
    const double diff = x == y ? 0.0 : std::fabs(x - y);
    worst = std::max(worst, diff);
  }
  d.max_abs_diff = worst;
  d.failing = nan_count > 0 || worst > threshold;
  if (nan_count > 0) {
    d.status = NodeStatus::kNan;
    d.diagnostic = "NaN on one side at " + std::to_string(nan_count) + " position(s), first at index " +
                   std::to_string(nan_at);
  } else if (worst > threshold) {
    d.status = NodeStatus::kPrecision;
  } else {
    d.status = NodeStatus::kOk;
  }
  return d;
}

std::set<NodeId> implicated_nodes(const ComputationGraph& g, const std::vector<NodeDiff>& nodes) {
  std::set<NodeId> out;
  for (const auto& d : nodes) {
    if (!d.failing) continue;
    out.insert(d.id);
    const auto anc = ancestors(g, d.id);
    out.insert(anc.begin(), anc.end());
  }
  return out;
}

CaseReport build_report(const TestCase& c, const std::string& backend_a, const std::string& backend_b,
                        const CaseOutputs& a, const CaseOutputs& b, double threshold,
                        const OpThresholds& op_thresholds) {
  CaseReport r;
  r.case_id = c.case_id;
  r.pattern_id = c.pattern_id;
  r.backend_a = backend_a;
  r.backend_b = backend_b;
  r.threshold = threshold;
  r.op_thresholds = op_thresholds;
  for (NodeId n : topo_order(c.pattern)) {
    const auto over = op_thresholds.find(c.pattern.api(n));
    NodeDiff d = compare(a.at(n), b.at(n), over == op_thresholds.end() ? threshold : over->second);
    d.id = n;
    d.api = c.pattern.api(n);
    if (d.failing) {
      switch (d.status) {
        case NodeStatus::kPrecision: r.classification.precision = true; break;
        case NodeStatus::kNan: r.classification.nan = true; break;
        default: r.classification.crash = true; break;
      }
    }
    r.nodes.push_back(std::move(d));
  }
  r.implicated = implicated_nodes(c.pattern, r.nodes);
  return r;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

DifferentialRun run_differential(const TestCase& c, Backend& a, Backend& b, double threshold,
                                 const OpThresholds& op_thresholds) {
  DifferentialRun run;
  try {
    auto t0 = std::chrono::steady_clock::now();
    run.outputs_a = a.run_case(c);
    run.seconds_a = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    run.outputs_b = b.run_case(c);
    run.seconds_b = seconds_since(t0);
    run.report = build_report(c, a.name(), b.name(), run.outputs_a, run.outputs_b, threshold, op_thresholds);
  } catch (const std::exception& e) {
    // BackendUnavailable, or any other per-case failure: never a bug finding.
    run.report = CaseReport{};
    run.report.case_id = c.case_id;
    run.report.pattern_id = c.pattern_id;
    run.report.backend_a = a.name();
    run.report.backend_b = b.name();
    run.report.threshold = threshold;
    run.report.op_thresholds = op_thresholds;
    run.report.evaluated = false;
    run.report.error = e.what();
  }
  return run;
}

TestCase isolate_node(const TestCase& c, NodeId n, const CaseOutputs& upstream) {
  TestCase out;
  out.case_id = c.case_id + "/node" + std::to_string(n);
  out.pattern_id = c.pattern_id;
  out.pattern = ComputationGraph({Node{n, c.pattern.api(n)}}, {});
  out.seed = c.seed;
  auto it = c.provenance.find(n);
  out.provenance[n] = it == c.provenance.end() ? kNoRecord : it->second;
  for (auto b = c.bindings.lower_bound({n, std::string()}); b != c.bindings.end() && b->first.first == n; ++b) {
    if (const auto* d = std::get_if<Dependent>(&b->second)) {
      auto src = upstream.find(d->src);
      const TensorValue* t = src == upstream.end() ? nullptr : std::get_if<TensorValue>(&src->second);
      if (t == nullptr) throw ValidityError("node " + std::to_string(d->src) + " has no output to isolate from");
      out.bindings[b->first] = *t;
    } else {
      out.bindings[b->first] = b->second;
    }
  }
  return out;
}

namespace {

struct Job {
  std::optional<TestCase> test_case;
  std::string failure;  // generation failure diagnostic
  bool abandoned = false;
};

unsigned worker_count(size_t count, unsigned jobs) {
  const unsigned workers = jobs == 0 ? std::max(1U, std::thread::hardware_concurrency()) : jobs;
  return static_cast<unsigned>(std::min<size_t>(workers, std::max<size_t>(count, 1)));
}

// Runs body(worker, i) for i in [0, count) on `workers` threads.
template <class F>
void parallel_for(size_t count, unsigned workers, F&& body) {
  std::atomic<size_t> next{0};
  auto work = [&](unsigned worker) {
    for (size_t i = next++; i < count; i = next++) body(worker, i);
  };
  if (workers <= 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  for (auto& t : pool) t.join();
}

CampaignResult execute(std::vector<Job>& jobs, const CampaignConfig& cfg, GenerationStats stats) {
  const unsigned workers = worker_count(jobs.size(), cfg.jobs);
  std::vector<std::unique_ptr<Backend>> backends_a;
  std::vector<std::unique_ptr<Backend>> backends_b;
  for (unsigned w = 0; w < workers; ++w) {
    backends_a.push_back(make_backend(cfg.backend_a));
    backends_b.push_back(make_backend(cfg.backend_b));
  }
  std::vector<std::optional<DifferentialRun>> runs(jobs.size());
  parallel_for(jobs.size(), workers, [&](unsigned w, size_t i) {
    if (!jobs[i].test_case) return;
    runs[i] = run_differential(*jobs[i].test_case, *backends_a[w], *backends_b[w], cfg.threshold, cfg.op_thresholds);
  });

  CampaignResult result;
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (!jobs[i].test_case) {
      stats.diagnostics.push_back(jobs[i].failure);
      continue;
    }
    DifferentialRun& run = *runs[i];
    if (!run.report.evaluated) {
      ++stats.cases_unevaluated;
      stats.diagnostics.push_back(run.report.case_id + ": unevaluated: " + run.report.error);
    } else {
      for (const CaseOutputs* side : {&run.outputs_a, &run.outputs_b}) {
        for (const auto& [id, outcome] : *side) {
          const auto* crash = std::get_if<Crash>(&outcome);
          if (crash != nullptr && crash->kind == Crash::Kind::kSkipped) {
            ++stats.skipped_nodes;
            continue;
          }
          ++stats.node_executions;
          if (crash == nullptr) {
            ++stats.valid_node_executions;
          } else if (crash->category == "validity") {
            ++stats.validity_errors;
          }
        }
      }
    }
    result.timings.push_back({run.report.case_id, run.seconds_a, run.seconds_b});
    result.reports.push_back(std::move(run.report));
  }
  std::vector<size_t> order(result.reports.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t x, size_t y) { return result.reports[x].case_id < result.reports[y].case_id; });
  CampaignResult sorted;
  for (size_t i : order) {
    sorted.reports.push_back(std::move(result.reports[i]));
    sorted.timings.push_back(std::move(result.timings[i]));
  }
  sorted.stats = std::move(stats);
  return sorted;
}

std::string case_id_for(const std::string& pattern_id, std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-%05llu", static_cast<unsigned long long>(index));
  return pattern_id + buf;
}

}  // namespace

CampaignResult run_campaign(const std::vector<GraphEntry>& patterns, const TraceStore& store,
                            const CampaignConfig& cfg) {
  const size_t total = patterns.size() * cfg.cases_per_pattern;
  std::vector<Job> jobs(total);
  parallel_for(total, worker_count(total, cfg.jobs), [&](unsigned, size_t i) {
    const size_t p = i / cfg.cases_per_pattern;
    const std::uint64_t k = i % cfg.cases_per_pattern;
    const std::string id = case_id_for(patterns[p].id, k);
    try {
      jobs[i].test_case = generate_case(patterns[p].graph, store, case_seed(cfg.seed, p, k), id, patterns[p].id);
    } catch (const NoCompatibleRecord& e) {
      jobs[i].abandoned = true;
      jobs[i].failure = id + ": abandoned: " + e.what();
    } catch (const std::exception& e) {
      jobs[i].failure = id + ": invalid input: " + e.what();
    }
  });
  GenerationStats stats;
  stats.cases_requested = total;
  for (const auto& j : jobs) {
    if (j.test_case) {
      ++stats.cases_generated;
    } else if (j.abandoned) {
      ++stats.cases_abandoned;
    } else {
      ++stats.cases_invalid;
      ++stats.node_executions;
      ++stats.validity_errors;
    }
  }
  return execute(jobs, cfg, std::move(stats));
}

CampaignResult run_cases(const std::vector<TestCase>& cases, const CampaignConfig& cfg) {
  std::vector<Job> jobs(cases.size());
  for (size_t i = 0; i < cases.size(); ++i) jobs[i].test_case = cases[i];
  GenerationStats stats;
  stats.cases_requested = cases.size();
  stats.cases_generated = cases.size();
  return execute(jobs, cfg, std::move(stats));
}

using detail::json;
using detail::ojson;

std::string dump_report(const CaseReport& r) {
  ojson j;
  j["case_id"] = r.case_id;
  j["pattern_id"] = r.pattern_id;
  j["backends"] = {r.backend_a, r.backend_b};
  j["threshold"] = r.threshold;
  if (!r.op_thresholds.empty()) j["op_thresholds"] = r.op_thresholds;
  j["evaluated"] = r.evaluated;
  if (!r.evaluated) j["error"] = r.error;
  j["nodes"] = ojson::array();
  for (const auto& d : r.nodes) {
    ojson jn;
    jn["id"] = d.id;
    jn["api"] = d.api;
    jn["status"] = std::string(to_string(d.status));
    if (!d.max_abs_diff) {
      jn["max_abs_diff"] = nullptr;
    } else if (std::isinf(*d.max_abs_diff)) {
      jn["max_abs_diff"] = "inf";
    } else {
      jn["max_abs_diff"] = *d.max_abs_diff;
    }
    jn["failing"] = d.failing;
    if (!d.diagnostic.empty()) jn["diagnostic"] = d.diagnostic;
    j["nodes"].push_back(std::move(jn));
  }
  j["implicated"] = r.implicated;
  ojson cls = ojson::array();
  if (r.classification.crash) cls.push_back("crash");
  if (r.classification.nan) cls.push_back("nan");
  if (r.classification.precision) cls.push_back("precision");
  j["classification"] = std::move(cls);
  return j.dump();
}

CaseReport parse_report(const std::string& line) {
  using namespace detail;
  const json j = parse_json(line, "report");
  CaseReport r;
  r.case_id = as_string(field(j, "case_id", "report"), "report.case_id");
  const std::string where = "report '" + r.case_id + "'";
  r.pattern_id = as_string(field(j, "pattern_id", where), where + ".pattern_id");
  const json& backends = field(j, "backends", where);
  if (!backends.is_array() || backends.size() != 2) throw ParseError(where + ".backends: expected two names");
  r.backend_a = as_string(backends[0], where + ".backends");
  r.backend_b = as_string(backends[1], where + ".backends");
  r.threshold = as_number(field(j, "threshold", where), where + ".threshold");
  if (const auto it = j.find("op_thresholds"); it != j.end()) {
    if (!it->is_object()) throw ParseError(where + ".op_thresholds: expected an object");
    for (const auto& [api, v] : it->items()) r.op_thresholds[api] = as_number(v, where + ".op_thresholds." + api);
  }
  const json& ev = field(j, "evaluated", where);
  if (!ev.is_boolean()) throw ParseError(where + ".evaluated: expected a boolean");
  r.evaluated = ev.get<bool>();
  if (!r.evaluated) r.error = as_string(field(j, "error", where), where + ".error");
  const json& nodes = field(j, "nodes", where);
  if (!nodes.is_array()) throw ParseError(where + ".nodes: expected an array");
  for (size_t i = 0; i < nodes.size(); ++i) {
    const std::string w = where + ".nodes[" + std::to_string(i) + "]";
    NodeDiff d;
    d.id = as_int(field(nodes[i], "id", w), w + ".id");
    d.api = as_string(field(nodes[i], "api", w), w + ".api");
    d.status = parse_node_status(as_string(field(nodes[i], "status", w), w + ".status"));
    const json& m = field(nodes[i], "max_abs_diff", w);
    if (m.is_string() && m.get<std::string>() == "inf") {
      d.max_abs_diff = std::numeric_limits<double>::infinity();
    } else if (!m.is_null()) {
      d.max_abs_diff = as_number(m, w + ".max_abs_diff");
    }
    const json& failing = field(nodes[i], "failing", w);
    if (!failing.is_boolean()) throw ParseError(w + ".failing: expected a boolean");
    d.failing = failing.get<bool>();
    if (auto it = nodes[i].find("diagnostic"); it != nodes[i].end()) d.diagnostic = as_string(*it, w + ".diagnostic");
    r.nodes.push_back(std::move(d));
  }
  const json& imp = field(j, "implicated", where);
  if (!imp.is_array()) throw ParseError(where + ".implicated: expected an array");
  for (const auto& v : imp) r.implicated.insert(as_int(v, where + ".implicated"));
  const json& cls = field(j, "classification", where);
  if (!cls.is_array()) throw ParseError(where + ".classification: expected an array");
  for (const auto& v : cls) {
    const std::string k = as_string(v, where + ".classification");
    if (k == "crash") {
      r.classification.crash = true;
    } else if (k == "nan") {
      r.classification.nan = true;
    } else if (k == "precision") {
      r.classification.precision = true;
    } else {
      throw ParseError(where + ".classification: unknown kind '" + k + "'");
    }
  }
  return r;
}

std::vector<CaseReport> parse_reports(const std::string& text) {
  std::vector<CaseReport> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_report(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string dump_stats(const GenerationStats& s) {
  ojson j;
  j["cases_requested"] = s.cases_requested;
  j["cases_generated"] = s.cases_generated;
  j["cases_abandoned"] = s.cases_abandoned;
  j["cases_invalid"] = s.cases_invalid;
  j["cases_unevaluated"] = s.cases_unevaluated;
  j["node_executions"] = s.node_executions;
  j["valid_node_executions"] = s.valid_node_executions;
  j["validity_errors"] = s.validity_errors;
  j["skipped_nodes"] = s.skipped_nodes;
  j["diagnostics"] = s.diagnostics;
  return j.dump(2) + "\n";
}

GenerationStats parse_stats(const std::string& text) {
  using namespace detail;
  const json j = parse_json(text, "stats");
  auto count = [&](const char* name) {
    const json& v = field(j, name, "stats");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ParseError(std::string("stats.") + name + ": expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  };
  GenerationStats s;
  s.cases_requested = count("cases_requested");
  s.cases_generated = count("cases_generated");
  s.cases_abandoned = count("cases_abandoned");
  s.cases_invalid = count("cases_invalid");
  s.cases_unevaluated = count("cases_unevaluated");
  s.node_executions = count("node_executions");
  s.valid_node_executions = count("valid_node_executions");
  s.validity_errors = count("validity_errors");
  s.skipped_nodes = count("skipped_nodes");
  const json& diags = field(j, "diagnostics", "stats");
  if (!diags.is_array()) throw ParseError("stats.diagnostics: expected an array");
  for (const auto& d : diags) s.diagnostics.push_back(as_string(d, "stats.diagnostics"));
  return s;
}

}  // namespace subdiff

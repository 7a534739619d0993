// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/cli.hpp"

#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "json_util.hpp"
#include "subdiff/api.hpp"
#include "subdiff/case_io.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/generator.hpp"
#include "subdiff/graph_io.hpp"
#include "subdiff/harness.hpp"
#include "subdiff/metrics.hpp"
#include "subdiff/miner.hpp"
#include "subdiff/trace.hpp"

namespace subdiff {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 0;

  std::string graphs;
  int min_support = 5;
  int min_nodes = 2;
  int max_nodes = 7;

  std::vector<std::string> traces;
  std::string patterns;
  std::uint64_t cases = 10;
  bool inline_tensors = false;

  std::string backend_a = "ref-f32";
  std::string backend_b = "ref-f64";
  double threshold = kDefaultThreshold;
  std::vector<std::string> op_thresholds;
  std::string from_cases;

  std::string runs;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

TraceStore load_trace(const std::vector<std::string>& paths, std::ostream& err) {
  std::vector<fs::path> p(paths.begin(), paths.end());
  IngestResult r = ingest(p);
  for (const auto& d : r.report.diagnostics) err << "subdiff: rejected record: " << d << "\n";
  err << "subdiff: trace: " << r.report.accepted << " accepted, " << r.report.rejected << " rejected\n";
  return std::move(r.store);
}

std::vector<GraphEntry> load_patterns(const std::string& path) { return load_corpus(path).graphs; }

int cmd_mine(const Options& o, std::ostream& err) {
  MiningConfig cfg{o.min_support, o.min_nodes, o.max_nodes};
  const GraphCorpus corpus = load_corpus(o.graphs);
  err << "subdiff: mining " << corpus.graphs.size() << " graph(s)\n";
  const auto found = mine(corpus, cfg);
  GraphCorpus patterns;
  detail::ojson supports = detail::ojson::array();
  for (size_t k = 0; k < found.size(); ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "p%04zu", k);
    patterns.graphs.push_back({id, found[k].pattern});
    detail::ojson s;
    s["id"] = id;
    s["support"] = found[k].support;
    s["nodes"] = found[k].pattern.size();
    s["graphs"] = found[k].supporting_graphs;
    s["code"] = to_string(found[k].code);
    supports.push_back(std::move(s));
  }
  save_corpus(patterns, fs::path(o.out) / "patterns.json");
  write_file(fs::path(o.out) / "supports.json", supports.dump(2) + "\n");
  err << "subdiff: " << found.size() << " frequent pattern(s)\n";
  return kExitOk;
}

int cmd_ingest_check(const Options& o, std::ostream& err) {
  std::vector<fs::path> p(o.traces.begin(), o.traces.end());
  const IngestResult r = ingest(p);
  for (const auto& d : r.report.diagnostics) err << "subdiff: rejected record: " << d << "\n";
  err << "subdiff: " << r.report.accepted << " accepted, " << r.report.rejected << " rejected\n";
  for (const auto& api : r.store.apis()) err << "subdiff:   " << api << ": " << r.store.query(api).size() << "\n";
  if (r.report.rejected > 0) throw DataError(std::to_string(r.report.rejected) + " record(s) rejected");
  return kExitOk;
}

int cmd_gen(const Options& o, std::ostream& err) {
  const auto patterns = load_patterns(o.patterns);
  const TraceStore store = load_trace(o.traces, err);
  std::string lines;
  GenerationStats stats;
  for (size_t p = 0; p < patterns.size(); ++p) {
    for (std::uint64_t k = 0; k < o.cases; ++k) {
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "-%05llu", static_cast<unsigned long long>(k));
      const std::string id = patterns[p].id + suffix;
      ++stats.cases_requested;
      try {
        lines += dump_case(generate_case(patterns[p].graph, store, case_seed(o.seed, p, k), id, patterns[p].id),
                           o.inline_tensors) +
                 "\n";
        ++stats.cases_generated;
      } catch (const NoCompatibleRecord& e) {
        ++stats.cases_abandoned;
        stats.diagnostics.push_back(id + ": abandoned: " + e.what());
      } catch (const InvalidGeneratedInput& e) {
        ++stats.cases_invalid;
        stats.diagnostics.push_back(id + ": invalid input: " + e.what());
      }
    }
  }
  write_file(fs::path(o.out) / "cases.jsonl", lines);
  write_file(fs::path(o.out) / "gen_stats.json", dump_stats(stats));
  err << "subdiff: " << stats.cases_generated << " case(s) generated, " << stats.cases_abandoned << " abandoned, "
      << stats.cases_invalid << " invalid\n";
  return kExitOk;
}

// API=VALUE pairs; malformed entries are usage errors.
OpThresholds parse_op_thresholds(const std::vector<std::string>& items) {
  OpThresholds out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    const std::string api = item.substr(0, eq);
    if (eq == std::string::npos || ApiRegistry::instance().find(api) == nullptr) {
      throw CLI::ValidationError("--op-threshold", "expected API=VALUE with a known API, got '" + item + "'");
    }
    double v = 0;
    try {
      size_t used = 0;
      v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw CLI::ValidationError("--op-threshold", "bad value in '" + item + "'");
    }
    if (!(v >= 0)) throw CLI::ValidationError("--op-threshold", "threshold must be non-negative in '" + item + "'");
    out[api] = v;
  }
  return out;
}

int cmd_run(const Options& o, std::ostream& err) {
  CampaignConfig cfg;
  cfg.backend_a = BackendId::parse(o.backend_a);
  cfg.backend_b = BackendId::parse(o.backend_b);
  cfg.threshold = o.threshold;
  cfg.op_thresholds = parse_op_thresholds(o.op_thresholds);
  cfg.cases_per_pattern = o.cases;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;

  CampaignResult result;
  if (!o.from_cases.empty()) {
    std::optional<TraceStore> store;
    if (!o.traces.empty()) store = load_trace(o.traces, err);
    const auto cases = parse_cases(read_file(o.from_cases), store ? &*store : nullptr);
    err << "subdiff: running " << cases.size() << " case(s)\n";
    result = run_cases(cases, cfg);
  } else {
    if (o.patterns.empty() || o.traces.empty()) throw CLI::ValidationError("run needs --patterns and --trace, or --from-cases");
    const auto patterns = load_patterns(o.patterns);
    const TraceStore store = load_trace(o.traces, err);
    err << "subdiff: running " << patterns.size() << " pattern(s) x " << o.cases << " case(s)\n";
    result = run_campaign(patterns, store, cfg);
  }

  std::string reports;
  for (const auto& r : result.reports) reports += dump_report(r) + "\n";
  std::string timings;
  for (const auto& t : result.timings) {
    timings += detail::ojson{{"case_id", t.case_id}, {"seconds_a", t.seconds_a}, {"seconds_b", t.seconds_b}}.dump() + "\n";
  }
  write_file(fs::path(o.out) / "reports.jsonl", reports);
  write_file(fs::path(o.out) / "stats.json", dump_stats(result.stats));
  write_file(fs::path(o.out) / "timings.jsonl", timings);

  const CampaignMetrics m = compute_metrics(result.reports, result.stats);
  err << "subdiff: " << m.cases_evaluated << " case(s) evaluated, " << m.cases_unevaluated << " unevaluated, "
      << m.cases_failing << " with findings (crash " << m.bugs.cases.crash << ", nan " << m.bugs.cases.nan
      << ", precision " << m.bugs.cases.precision << ")\n";
  return m.cases_failing > 0 ? kExitBugsFound : kExitOk;
}

int cmd_report(const Options& o, std::ostream& err) {
  const fs::path runs(o.runs);
  const auto reports = parse_reports(read_file(runs / "reports.jsonl"));
  std::optional<GenerationStats> stats;
  if (fs::exists(runs / "stats.json")) stats = parse_stats(read_file(runs / "stats.json"));
  const CampaignMetrics m = compute_metrics(reports, stats);
  write_file(fs::path(o.out) / "metrics.json", dump_metrics(m));
  write_file(fs::path(o.out) / "metrics.txt", metrics_table(m));
  err << "subdiff: metrics over " << reports.size() << " report(s)\n";
  return kExitOk;
}

void status(std::ostream& err, const char* word, int code, const std::string& detail = {}) {
  err << "subdiff: status=" << word << " code=" << code;
  if (!detail.empty()) err << " detail=" << quote(detail);
  err << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Differential tester for deep-learning operators", "subdiff"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--seed", o.seed, "Seed for all randomness")->capture_default_str();
    auto* opt = sub->add_option("--out", o.out, "Output directory");
    if (needs_out) opt->required();
    sub->add_option("--jobs", o.jobs, "Worker threads (0: available parallelism)")->capture_default_str();
  };

  auto* mine_cmd = app.add_subcommand("mine", "Mine frequent subgraphs from a graph file");
  mine_cmd->add_option("--graphs", o.graphs, "Graph file")->required()->check(CLI::ExistingFile);
  mine_cmd->add_option("--min-support", o.min_support, "Minimum number of supporting graphs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mine_cmd->add_option("--min-nodes", o.min_nodes, "Minimum pattern size")->capture_default_str()->check(CLI::PositiveNumber);
  mine_cmd->add_option("--max-nodes", o.max_nodes, "Maximum pattern size")->capture_default_str()->check(CLI::PositiveNumber);
  add_common(mine_cmd, true);

  auto* ingest_cmd = app.add_subcommand("ingest-check", "Validate trace files");
  ingest_cmd->add_option("--trace", o.traces, "Trace file (repeatable)")->required()->check(CLI::ExistingFile);
  add_common(ingest_cmd, false);

  auto* gen_cmd = app.add_subcommand("gen", "Generate test cases");
  gen_cmd->add_option("--patterns", o.patterns, "Pattern file")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--trace", o.traces, "Trace file (repeatable)")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--cases", o.cases, "Cases per pattern")->capture_default_str();
  gen_cmd->add_flag("--inline-tensors", o.inline_tensors, "Embed generated tensors in the case file");
  add_common(gen_cmd, true);

  auto* run_cmd = app.add_subcommand("run", "Run a differential campaign");
  run_cmd->add_option("--patterns", o.patterns, "Pattern file")->check(CLI::ExistingFile);
  run_cmd->add_option("--trace", o.traces, "Trace file (repeatable)")->check(CLI::ExistingFile);
  run_cmd->add_option("--from-cases", o.from_cases, "Run the cases of a case file instead of generating")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--cases", o.cases, "Cases per pattern")->capture_default_str();
  run_cmd->add_option("--backend-a", o.backend_a, "ref-f32 | ref-f64 | perturb:EPS:NODESPEC[:BASE] | bridge:CMD:DEVICE")
      ->capture_default_str();
  run_cmd->add_option("--backend-b", o.backend_b, "Second backend")->capture_default_str();
  run_cmd->add_option("--threshold", o.threshold, "Absolute elementwise threshold")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--op-threshold", o.op_thresholds, "Per-API threshold override API=VALUE (repeatable)");
  add_common(run_cmd, true);

  auto* report_cmd = app.add_subcommand("report", "Compute metrics from a run directory");
  report_cmd->add_option("--runs", o.runs, "Run directory")->required()->check(CLI::ExistingDirectory);
  add_common(report_cmd, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (mine_cmd->parsed()) MiningConfig{o.min_support, o.min_nodes, o.max_nodes}.validate();
    if (run_cmd->parsed()) {
      BackendId::parse(o.backend_a);
      BackendId::parse(o.backend_b);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    status(err, "usage-error", kExitUsage, e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << app.help();
    status(err, "usage-error", kExitUsage, e.what());
    return kExitUsage;
  }

  try {
    int code = kExitOk;
    if (mine_cmd->parsed()) code = cmd_mine(o, err);
    if (ingest_cmd->parsed()) code = cmd_ingest_check(o, err);
    if (gen_cmd->parsed()) code = cmd_gen(o, err);
    if (run_cmd->parsed()) code = cmd_run(o, err);
    if (report_cmd->parsed()) code = cmd_report(o, err);
    status(err, code == kExitBugsFound ? "bugs-found" : "ok", code);
    return code;
  } catch (const CLI::ValidationError& e) {
    status(err, "usage-error", kExitUsage, e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    status(err, "data-error", kExitData, e.what());
    return kExitData;
  }
}

}  // namespace subdiff

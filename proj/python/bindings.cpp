// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <sstream>

#include "subdiff/api.hpp"
#include "subdiff/case_io.hpp"
#include "subdiff/cli.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/generator.hpp"
#include "subdiff/graph_io.hpp"
#include "subdiff/harness.hpp"
#include "subdiff/kernels.hpp"
#include "subdiff/metrics.hpp"
#include "subdiff/miner.hpp"
#include "subdiff/trace.hpp"

namespace py = pybind11;
using namespace subdiff;

namespace {

DType parse_precision(const std::string& s) {
  if (s == "f32") return DType::kF32;
  if (s == "f64") return DType::kF64;
  throw py::value_error("precision must be 'f32' or 'f64', got '" + s + "'");
}

ScalarValue to_scalar(const py::handle& v) {
  if (v.is_none()) return ScalarValue::none();
  if (py::isinstance<py::bool_>(v)) return ScalarValue::of_bool(v.cast<bool>());
  if (py::isinstance<py::int_>(v)) return ScalarValue::of_int(v.cast<std::int64_t>());
  if (py::isinstance<py::float_>(v)) return ScalarValue::of_float(v.cast<double>());
  if (py::isinstance<py::str>(v)) return ScalarValue::of_string(v.cast<std::string>());
  if (py::isinstance<py::tuple>(v) || py::isinstance<py::list>(v)) {
    return ScalarValue::of_tuple(v.cast<std::vector<std::int64_t>>());
  }
  throw py::type_error("unsupported scalar argument of type " + std::string(py::str(py::type::handle_of(v))));
}

template <class T>
TensorValue to_tensor(const py::array& a) {
  const auto c = py::array_t<T, py::array::c_style | py::array::forcecast>::ensure(a);
  Shape shape(c.shape(), c.shape() + c.ndim());
  std::vector<T> data(c.data(), c.data() + c.size());
  return TensorValue(std::move(shape), std::move(data));
}

Arg to_arg(const py::handle& v) {
  if (py::isinstance<py::array>(v)) {
    const auto a = py::reinterpret_borrow<py::array>(v);
    if (a.dtype().is(py::dtype::of<float>())) return to_tensor<float>(a);
    return to_tensor<double>(a);
  }
  return to_scalar(v);
}

template <class T>
py::array_t<T> to_numpy(const TensorValue& t) {
  const auto d = t.data<T>();
  py::array_t<T> out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(d.begin(), d.end(), out.mutable_data());
  return out;
}

py::object execute(const std::string& api, const py::dict& args, const std::string& precision) {
  Args a;
  for (const auto& [k, v] : args) a[k.cast<std::string>()] = to_arg(v);
  const TensorValue y = execute_node(api, a, parse_precision(precision));
  if (y.dtype() == DType::kF32) return to_numpy<float>(y);
  return to_numpy<double>(y);
}

py::list mine_patterns(const std::string& corpus_json, int min_support, int min_nodes, int max_nodes) {
  const MiningConfig cfg{min_support, min_nodes, max_nodes};
  cfg.validate();
  const auto found = mine(parse_corpus(corpus_json), cfg);
  py::list out;
  for (size_t k = 0; k < found.size(); ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "p%04zu", k);
    GraphCorpus one;
    one.graphs.push_back({id, found[k].pattern});
    py::dict d;
    d["id"] = id;
    d["support"] = found[k].support;
    d["nodes"] = found[k].pattern.size();
    d["graphs"] = found[k].supporting_graphs;
    d["code"] = to_string(found[k].code);
    d["corpus"] = dump_corpus(one);
    out.append(std::move(d));
  }
  return out;
}

py::tuple ingest_trace(const std::string& text) {
  IngestResult r = ingest_text(text);
  return py::make_tuple(std::move(r.store), r.report.accepted, r.report.rejected, r.report.diagnostics);
}

std::vector<std::string> generate_cases(const std::string& patterns_json, const TraceStore& store,
                                        std::uint64_t cases, std::uint64_t seed, bool inline_tensors) {
  const GraphCorpus patterns = parse_corpus(patterns_json);
  std::vector<std::string> lines;
  for (size_t p = 0; p < patterns.graphs.size(); ++p) {
    for (std::uint64_t k = 0; k < cases; ++k) {
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "-%05llu", static_cast<unsigned long long>(k));
      const auto& e = patterns.graphs[p];
      try {
        lines.push_back(dump_case(generate_case(e.graph, store, case_seed(seed, p, k), e.id + suffix, e.id),
                                  inline_tensors));
      } catch (const NoCompatibleRecord&) {
      } catch (const InvalidGeneratedInput&) {
      }
    }
  }
  return lines;
}

py::tuple run(const std::string& patterns_json, const TraceStore& store, std::uint64_t cases, std::uint64_t seed,
              const std::string& backend_a, const std::string& backend_b, double threshold, const OpThresholds& op_thresholds,
              unsigned jobs) {
  CampaignConfig cfg;
  cfg.backend_a = BackendId::parse(backend_a);
  cfg.backend_b = BackendId::parse(backend_b);
  cfg.threshold = threshold;
  cfg.op_thresholds = op_thresholds;
  cfg.cases_per_pattern = cases;
  cfg.seed = seed;
  cfg.jobs = jobs;
  const GraphCorpus patterns = parse_corpus(patterns_json);
  CampaignResult r;
  {
    py::gil_scoped_release release;
    r = run_campaign(patterns.graphs, store, cfg);
  }
  std::vector<std::string> reports;
  for (const auto& rep : r.reports) reports.push_back(dump_report(rep));
  return py::make_tuple(reports, dump_stats(r.stats));
}

std::string metrics(const std::vector<std::string>& reports, const std::optional<std::string>& stats_json) {
  std::vector<CaseReport> parsed;
  for (const auto& line : reports) parsed.push_back(parse_report(line));
  std::optional<GenerationStats> stats;
  if (stats_json) stats = parse_stats(*stats_json);
  return dump_metrics(compute_metrics(parsed, stats));
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Subgraph differential testing of DL operators.";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ValidityError>(m, "ValidityError", PyExc_ValueError);
  py::register_exception<BackendUnavailable>(m, "BackendUnavailable", PyExc_RuntimeError);

  py::class_<TraceStore>(m, "TraceStore")
      .def(py::init<>())
      .def("__len__", &TraceStore::size)
      .def("apis", &TraceStore::apis)
      .def("emit", [](const TraceStore& s) { return emit_trace(s); });

  m.def("ops", [] {
    std::vector<std::string> names;
    for (const auto& sig : ApiRegistry::instance().all()) names.push_back(sig.name);
    return names;
  });
  m.def("execute", &execute, py::arg("api"), py::arg("args"), py::arg("precision") = "f64");
  m.def("mine", &mine_patterns, py::arg("corpus_json"), py::arg("min_support") = 5, py::arg("min_nodes") = 2,
        py::arg("max_nodes") = 7);
  m.def("ingest", &ingest_trace, py::arg("text"));
  m.def("generate", &generate_cases, py::arg("patterns_json"), py::arg("store"), py::arg("cases") = 10,
        py::arg("seed") = 0, py::arg("inline_tensors") = true);
  m.def("run", &run, py::arg("patterns_json"), py::arg("store"), py::arg("cases") = 10, py::arg("seed") = 0,
        py::arg("backend_a") = "ref-f32", py::arg("backend_b") = "ref-f64", py::arg("threshold") = kDefaultThreshold,
        py::arg("op_thresholds") = OpThresholds{}, py::arg("jobs") = 0);
  m.def("metrics", &metrics, py::arg("reports"), py::arg("stats_json") = py::none());
  m.def("cli", &cli, py::arg("args"));
}

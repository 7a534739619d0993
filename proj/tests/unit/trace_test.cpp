// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/graph_io.hpp"
#include "subdiff/trace.hpp"

namespace subdiff {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("subdiff-trace-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(Ingest, ConvRecordIsQueryable) {
  const IngestResult r = ingest_text(dump_record(oracle::conv2d_record()) + "\n");
  EXPECT_EQ(r.report.accepted, 1u);
  EXPECT_EQ(r.report.rejected, 0u);
  const auto recs = r.store.query("conv2d");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(*recs[0], oracle::conv2d_record());
  EXPECT_EQ(recs[0]->tensors.at("input").vmin, -102.91);
  EXPECT_EQ(recs[0]->scalars.at("padding"), ScalarValue::of_int(3));
}

TEST(Ingest, EmptyTextIsEmptyStore) {
  const IngestResult r = ingest_text("");
  EXPECT_EQ(r.store.size(), 0u);
  EXPECT_EQ(r.report.accepted, 0u);
  EXPECT_EQ(ingest_text("\n\n  \n").store.size(), 0u);
}

TEST(Ingest, InvalidRecordsAreRejectedWithDiagnostics) {
  const std::string text = dump_record(oracle::conv2d_record()) + "\n" + R"({"id": "kind", "api": "relu", "tensors": {"input": {"dtype": "f32", "shape": [2], "min": 0, "max": 1}}, "scalars": {"inplace": {"kind": "int", "value": 1}}})" +
                           "\n" + "{not json\n" + R"({"id": "nope", "api": "relu", "tensors": {}, "scalars": {}})" + "\n";
  // Raw JSON lines so the invalid records never pass through InputRecord.
  const std::string range_line =
      R"({"id": "rng", "api": "relu", "tensors": {"input": {"dtype": "f32", "shape": [2], "min": 3, "max": 1}}, "scalars": {}})";
  const std::string api_line =
      R"({"id": "api", "api": "conv3d", "tensors": {"input": {"dtype": "f32", "shape": [2], "min": 0, "max": 1}}, "scalars": {}})";
  const std::string dup_line = dump_record(oracle::conv2d_record());
  const IngestResult r = ingest_text(text + range_line + "\n" + api_line + "\n" + dup_line + "\n", "t.jsonl");
  EXPECT_EQ(r.report.accepted, 1u);
  EXPECT_EQ(r.report.rejected, 6u);
  ASSERT_EQ(r.report.diagnostics.size(), 6u);
  EXPECT_NE(r.report.diagnostics[0].find("t.jsonl:2"), std::string::npos) << r.report.diagnostics[0];
  EXPECT_NE(r.report.diagnostics[2].find("input"), std::string::npos) << r.report.diagnostics[2];
  EXPECT_NE(r.report.diagnostics[3].find("min 3 > max 1"), std::string::npos) << r.report.diagnostics[3];
  EXPECT_NE(r.report.diagnostics[4].find("conv3d"), std::string::npos) << r.report.diagnostics[4];
  EXPECT_NE(r.report.diagnostics[5].find("duplicate"), std::string::npos) << r.report.diagnostics[5];
}

TEST(Ingest, ThreeFilesAreUnioned) {
  TempDir dir;
  std::vector<fs::path> files;
  size_t lines = 0;
  for (int f = 0; f < 3; ++f) {
    std::string text;
    for (int i = 0; i <= f; ++i) {
      InputRecord r = oracle::batch_norm_record({2, 64, 4 + f, 4 + i});
      r.id = "bn-" + std::to_string(f) + "-" + std::to_string(i);
      text += dump_record(r) + "\n";
      ++lines;
    }
    files.push_back(dir.path() / ("t" + std::to_string(f) + ".jsonl"));
    write_file(files.back(), text);
  }
  const IngestResult r = ingest(files);
  EXPECT_EQ(r.store.size(), lines);
  EXPECT_EQ(r.store.query("batch_norm").size(), lines);
  EXPECT_THROW(ingest(dir.path() / "missing.jsonl"), ParseError);
}

TEST(Query, OrderedByIdAndEmptyForOtherApis) {
  TraceStore store;
  for (const char* id : {"c", "a", "b"}) {
    InputRecord r = oracle::conv2d_record();
    r.id = id;
    store.add(r);
  }
  const auto recs = store.query("conv2d");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0]->id, "a");
  EXPECT_EQ(recs[2]->id, "c");
  EXPECT_TRUE(store.query("relu").empty());
  EXPECT_TRUE(store.query("not-an-api").empty());
  EXPECT_EQ(store.find("b")->api, "conv2d");
  EXPECT_EQ(store.find("zzz"), nullptr);
  InputRecord dup = oracle::conv2d_record();
  dup.id = "a";
  EXPECT_THROW(store.add(dup), ValidationError);
}

TEST(MatchRecords, BatchNormRecord) {
  TraceStore store;
  store.add(oracle::batch_norm_record());
  const auto hit = store.match_records("batch_norm", {{"input", {DType::kF32, {16, 64, 224, 224}}}});
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0]->tensors.at("running_mean").vmin, -0.03);
  EXPECT_EQ(hit[0]->scalars.at("training"), ScalarValue::of_bool(false));
  EXPECT_TRUE(store.match_records("batch_norm", {{"input", {DType::kF32, {16, 64, 112, 112}}}}).empty());
  EXPECT_TRUE(store.match_records("batch_norm", {{"input", {DType::kF64, {16, 64, 224, 224}}}}).empty());
}

TEST(MatchRecords, EqualsLinearScan) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(1, 3);
  std::bernoulli_distribution f64(0.3);
  TraceStore store;
  std::vector<InputRecord> all;
  for (int i = 0; i < 50; ++i) {
    InputRecord r = oracle::batch_norm_record({dim(rng), 64, dim(rng), dim(rng)});
    r.id = "bn" + std::to_string(i);
    if (f64(rng)) r.tensors["input"].dtype = DType::kF64;
    store.add(r);
    all.push_back(r);
  }
  EXPECT_EQ(store.match_records("batch_norm", {}).size(), store.query("batch_norm").size());
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 3; ++b) {
      for (DType dt : {DType::kF32, DType::kF64}) {
        const Shape s{a, 64, b, 2};
        std::set<std::string> expect;
        for (const auto& r : all) {
          if (r.tensors.at("input").shape == s && r.tensors.at("input").dtype == dt) expect.insert(r.id);
        }
        std::set<std::string> got;
        for (const auto* r : store.match_records("batch_norm", {{"input", {dt, s}}})) got.insert(r->id);
        EXPECT_EQ(got, expect);
      }
    }
  }
}

TEST(Trace, EmitIngestRoundTrip) {
  TraceStore store;
  store.add(oracle::conv2d_record());
  store.add(oracle::batch_norm_record());
  InputRecord ln;
  ln.id = "ln";
  ln.api = "layer_norm";
  ln.tensors["input"] = {DType::kF64, {2, 3}, -1.25, 2.5};
  ln.scalars["normalized_shape"] = ScalarValue::of_tuple({3});
  ln.scalars["eps"] = ScalarValue::of_float(1e-5);
  store.add(ln);
  InputRecord ge;
  ge.id = "ge";
  ge.api = "gelu";
  ge.tensors["input"] = {DType::kF32, {4}, -0.1, 0.1};
  ge.scalars["approximate"] = ScalarValue::of_string("tanh");
  store.add(ge);
  const IngestResult back = ingest_text(emit_trace(store));
  EXPECT_EQ(back.report.rejected, 0u);
  EXPECT_TRUE(back.store == store);
  EXPECT_EQ(emit_trace(back.store), emit_trace(store));
}

TEST(Record, Validation) {
  InputRecord r = oracle::conv2d_record();
  EXPECT_NO_THROW(validate_record(r));
  r.tensors.erase("weight");
  EXPECT_THROW(validate_record(r), ValidationError);  // required parameter missing
  r = oracle::conv2d_record();
  r.tensors.erase("bias");
  EXPECT_NO_THROW(validate_record(r));  // optional
  r.scalars["stride"] = ScalarValue::of_string("one");
  EXPECT_THROW(validate_record(r), ValidationError);
  r = oracle::conv2d_record();
  r.tensors["input"].shape = {16, 0, 2, 2};
  EXPECT_THROW(validate_record(r), ValidationError);
  r = oracle::conv2d_record();
  r.tensors["input"].vmax = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate_record(r), ValidationError);
}

TEST(ScalarValue, KindsAndConformance) {
  EXPECT_TRUE(ScalarValue().is_none());
  EXPECT_EQ(ScalarValue::of_int(3).as_float(), 3.0);
  EXPECT_THROW(ScalarValue::of_float(1.5).as_int(), ValidityError);
  EXPECT_THROW(ScalarValue::of_bool(true).as_string(), ValidityError);
  const ApiParam p{"eps", ParamKind::kFloat, false, true};
  EXPECT_TRUE(ScalarValue::of_float(1e-5).conforms_to(p));
  EXPECT_TRUE(ScalarValue::of_int(0).conforms_to(p));
  EXPECT_TRUE(ScalarValue::none().conforms_to(p));
  EXPECT_FALSE(ScalarValue::of_string("x").conforms_to(p));
  EXPECT_EQ(parse_scalar_kind("int-tuple"), ScalarKind::kIntTuple);
  EXPECT_THROW(parse_scalar_kind("complex"), ParseError);
}

}  // namespace
}  // namespace subdiff

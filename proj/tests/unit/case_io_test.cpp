// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "subdiff/case_io.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/generator.hpp"
#include "subdiff/graph_io.hpp"

namespace subdiff {
namespace {

::testing::AssertionResult same_case(const TestCase& a, const TestCase& b) {
  if (a.case_id != b.case_id || a.pattern_id != b.pattern_id || a.seed != b.seed) {
    return ::testing::AssertionFailure() << "header differs";
  }
  if (!(a.pattern == b.pattern)) return ::testing::AssertionFailure() << "pattern differs";
  if (a.provenance != b.provenance) return ::testing::AssertionFailure() << "provenance differs";
  if (a.bindings.size() != b.bindings.size()) return ::testing::AssertionFailure() << "binding count differs";
  for (const auto& [key, v] : a.bindings) {
    auto it = b.bindings.find(key);
    if (it == b.bindings.end()) return ::testing::AssertionFailure() << "missing " << key.second;
    bool same = v.index() == it->second.index();
    if (same && v.index() == 0) same = std::get<Dependent>(v) == std::get<Dependent>(it->second);
    if (same && v.index() == 1) same = std::get<TensorValue>(v).bit_equal(std::get<TensorValue>(it->second));
    if (same && v.index() == 2) same = std::get<ScalarValue>(v) == std::get<ScalarValue>(it->second);
    if (!same) return ::testing::AssertionFailure() << "binding " << key.first << "." << key.second << " differs";
  }
  return ::testing::AssertionSuccess();
}

class CaseIo : public ::testing::Test {
 protected:
  void SetUp() override {
    const std::string dir = std::string(SUBDIFF_SOURCE_DIR) + "/data/desk/";
    patterns_ = load_corpus(dir + "patterns.json");
    store_ = ingest(dir + "trace.jsonl").store;
  }
  TestCase make(size_t p, std::uint64_t i) {
    const auto& e = patterns_.graphs.at(p);
    return generate_case(e.graph, store_, case_seed(7, p, i), e.id + "-0000" + std::to_string(i), e.id);
  }
  GraphCorpus patterns_;
  TraceStore store_;
};

TEST_F(CaseIo, InlineRoundTrip) {
  for (size_t p = 0; p < patterns_.graphs.size(); ++p) {
    const TestCase c = make(p, 0);
    const std::string line = dump_case(c, true);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_TRUE(same_case(parse_case(line), c)) << patterns_.graphs[p].id;
    EXPECT_EQ(dump_case(parse_case(line), true), line);
  }
}

TEST_F(CaseIo, RegeneratedRoundTrip) {
  const TestCase c = make(3, 1);
  const std::string line = dump_case(c, false);
  EXPECT_EQ(line.find("\"bindings\""), std::string::npos);
  EXPECT_LT(line.size(), dump_case(c, true).size());
  EXPECT_TRUE(same_case(parse_case(line, &store_), c));
  EXPECT_THROW(parse_case(line), ValidationError);
  const TraceStore empty;
  EXPECT_THROW(parse_case(line, &empty), ValidationError);
}

TEST_F(CaseIo, ProvenanceMismatchIsRejected) {
  const TestCase c = make(0, 0);
  TraceStore other;
  for (const auto& api : store_.apis()) {
    for (const auto* r : store_.query(api)) {
      InputRecord copy = *r;
      copy.id = "x-" + copy.id;
      other.add(copy);
    }
  }
  EXPECT_THROW(parse_case(dump_case(c, false), &other), ValidationError);
}

TEST_F(CaseIo, MultiLineFilesAndErrors) {
  const std::string text = dump_case(make(0, 0), true) + "\n\n" + dump_case(make(1, 0), true) + "\n";
  EXPECT_EQ(parse_cases(text).size(), 2u);
  try {
    parse_cases(dump_case(make(0, 0), true) + "\n{\"case_id\": 1}\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::string line = dump_case(make(0, 0), true);
  const std::string dup = line.substr(0, line.find("\"bindings\":[") + 12);
  EXPECT_THROW(parse_case(dup + "{\"node\":99,\"param\":\"input\",\"kind\":\"dependent\",\"src\":0}]}"),
               ValidationError);
  EXPECT_THROW(parse_case(dup + "]}"), ValidationError);  // edges without dependent bindings
  EXPECT_THROW(parse_case("not json"), ParseError);
}

TEST(Outputs, RoundTrip) {
  CaseOutputs out;
  out[0] = TensorValue({2, 2}, std::vector<float>{1, -0.0f, std::nanf(""), 3e38f});
  out[3] = Crash{Crash::Kind::kError, "remote", "RuntimeError: bad"};
  out[5] = Crash{Crash::Kind::kSkipped, "skipped", "upstream node 3 failed"};
  const CaseOutputs back = parse_outputs(dump_outputs(out));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_TRUE(std::get<TensorValue>(back.at(0)).bit_equal(std::get<TensorValue>(out.at(0))));
  EXPECT_EQ(std::get<Crash>(back.at(3)).message, "RuntimeError: bad");
  EXPECT_EQ(std::get<Crash>(back.at(5)).kind, Crash::Kind::kSkipped);
  EXPECT_THROW(parse_outputs(R"({"nodes": [{"id": 0}]})"), ParseError);
  EXPECT_THROW(parse_outputs(R"({"nodes": [{"id": 0, "crash": {"kind": "error", "category": "c", "message": "m"}},
                                           {"id": 0, "crash": {"kind": "error", "category": "c", "message": "m"}}]})"),
               ParseError);
}

}  // namespace
}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "subdiff/backend.hpp"
#include "subdiff/errors.hpp"
#include "subdiff/rng.hpp"

namespace subdiff {
namespace {

TensorValue ramp(std::int64_t n, double lo, double step) {
  std::vector<double> v(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) v[static_cast<size_t>(i)] = lo + step * static_cast<double>(i);
  return TensorValue({n}, std::move(v));
}

// relu -> dropout(p) -> gelu on a ramp of 8 values.
TestCase relu_dropout_gelu(double p) {
  TestCase c;
  c.case_id = "rdg";
  c.pattern = oracle::chain({"relu", "dropout", "gelu"});
  c.seed = 11;
  c.bindings[{0, "input"}] = ramp(8, -2, 0.5);
  c.bindings[{0, "inplace"}] = ScalarValue::none();
  c.bindings[{1, "input"}] = Dependent{0};
  c.bindings[{1, "p"}] = ScalarValue::of_float(p);
  c.bindings[{1, "training"}] = ScalarValue::of_bool(false);
  c.bindings[{1, "inplace"}] = ScalarValue::none();
  c.bindings[{2, "input"}] = Dependent{1};
  c.bindings[{2, "approximate"}] = ScalarValue::of_string("none");
  return c;
}

TEST(NodeSpec, ParseAndMatch) {
  const ComputationGraph g = oracle::chain({"relu", "relu", "relu"});
  EXPECT_EQ(NodeSpec::parse("all").mode, NodeSpec::Mode::kAll);
  const NodeSpec entry = NodeSpec::parse("entry");
  EXPECT_TRUE(entry.matches(g, 0));
  EXPECT_FALSE(entry.matches(g, 1));
  const NodeSpec list = NodeSpec::parse("2,0");
  EXPECT_EQ(list.ids, (std::set<NodeId>{0, 2}));
  EXPECT_EQ(list.to_string(), "0,2");
  EXPECT_FALSE(list.matches(g, 1));
  EXPECT_THROW(NodeSpec::parse(""), std::invalid_argument);
  EXPECT_THROW(NodeSpec::parse("1,x"), std::invalid_argument);
  EXPECT_THROW(NodeSpec::parse("1.5"), std::invalid_argument);
}

TEST(BackendId, ParseRoundTrip) {
  for (const char* s : {"ref-f32", "ref-f64", "perturb:0.001:all", "perturb:1e-05:entry:ref-f32", "perturb:0.5:0,3",
                        "bridge:python3 bridge.py --x:cpu", "bridge:run:cuda"}) {
    EXPECT_EQ(BackendId::parse(s).to_string(), s);
  }
  const BackendId b = BackendId::parse("bridge:a:b:cpu");
  EXPECT_EQ(b.command, "a:b");
  EXPECT_EQ(b.device, "cpu");
  const BackendId p = BackendId::parse("perturb:0.25:1");
  EXPECT_EQ(p.epsilon, 0.25);
  EXPECT_EQ(p.base_precision, DType::kF64);
  for (const char* s : {"ref-f16", "perturb:x:all", "perturb:-1:all", "perturb:0.1", "perturb:0.1:all:gpu",
                        "bridge:cmd", "bridge:cmd:tpu", "bridge::cpu"}) {
    EXPECT_THROW(BackendId::parse(s), std::invalid_argument) << s;
  }
}

TEST(ReferenceBackend, RunsEveryNodeInBothPrecisions) {
  const TestCase c = relu_dropout_gelu(0.3);
  for (DType p : {DType::kF32, DType::kF64}) {
    ReferenceBackend be(p);
    const CaseOutputs out = be.run_case(c);
    ASSERT_EQ(out.size(), 3u);
    for (const auto& [id, o] : out) {
      ASSERT_TRUE(std::holds_alternative<TensorValue>(o)) << id;
      EXPECT_EQ(std::get<TensorValue>(o).dtype(), p);
    }
    const TensorValue& y = std::get<TensorValue>(out.at(2));
    EXPECT_EQ(y.at(0), 0.0);
    EXPECT_NEAR(y.at(7), 1.5 * 0.5 * std::erfc(-1.5 / std::sqrt(2.0)), 1e-6);
  }
  EXPECT_EQ(ReferenceBackend(DType::kF32).name(), "ref-f32");
}

TEST(ReferenceBackend, CrashSkipsOnlyDescendants) {
  TestCase c = relu_dropout_gelu(2.0);
  // A second, independent branch off the entry node.
  c.pattern = ComputationGraph({{0, "relu"}, {1, "dropout"}, {2, "gelu"}, {3, "gelu"}},
                               {{0, 1, "input"}, {1, 2, "input"}, {0, 3, "input"}});
  c.bindings[{3, "input"}] = Dependent{0};
  c.bindings[{3, "approximate"}] = ScalarValue::of_string("tanh");
  const CaseOutputs out = ReferenceBackend(DType::kF64).run_case(c);
  EXPECT_TRUE(std::holds_alternative<TensorValue>(out.at(0)));
  const Crash& crash = std::get<Crash>(out.at(1));
  EXPECT_EQ(crash.kind, Crash::Kind::kError);
  EXPECT_EQ(crash.category, "validity");
  EXPECT_NE(crash.message.find("dropout probability"), std::string::npos);
  const Crash& skip = std::get<Crash>(out.at(2));
  EXPECT_EQ(skip.kind, Crash::Kind::kSkipped);
  EXPECT_EQ(skip.category, "skipped");
  EXPECT_TRUE(std::holds_alternative<TensorValue>(out.at(3)));
}

TEST(ReferenceBackend, PerturbationFeedsSuccessors) {
  const TestCase c = relu_dropout_gelu(0.0);
  const double eps = 1e-2;
  ReferenceBackend plain(DType::kF64);
  ReferenceBackend pert(DType::kF64, eps, NodeSpec::parse("0"));
  EXPECT_EQ(pert.name(), "perturb:0.01:0");
  const CaseOutputs a = plain.run_case(c);
  const CaseOutputs b = pert.run_case(c);
  const TensorValue& x = std::get<TensorValue>(a.at(0));
  const TensorValue& xp = std::get<TensorValue>(b.at(0));
  const CounterStream signs(c.seed, RngDomain::kPerturbSign, 0, 0);
  for (size_t i = 0; i < x.size(); ++i) {
    const double e = eps * std::abs(x.at(i));
    EXPECT_DOUBLE_EQ(xp.at(i), (signs.word(i) & 1U) ? x.at(i) - e : x.at(i) + e);
  }
  const TensorValue expect2 = execute_node("gelu", {{"input", xp}, {"approximate", ScalarValue::of_string("none")}},
                                           DType::kF64);
  EXPECT_TRUE(std::get<TensorValue>(b.at(2)).bit_equal(expect2));
  // Zero epsilon is the unperturbed backend.
  const CaseOutputs z = ReferenceBackend(DType::kF64, 0.0, NodeSpec::parse("all")).run_case(c);
  for (const auto& [id, o] : a) EXPECT_TRUE(std::get<TensorValue>(z.at(id)).bit_equal(std::get<TensorValue>(o)));
}

TEST(NodeArgs, WiresDependentsAndNone) {
  const TestCase c = relu_dropout_gelu(0.1);
  CaseOutputs outs;
  outs[0] = ramp(8, 0, 1);
  const Args args = node_args(c, 1, outs);
  EXPECT_TRUE(std::get<TensorValue>(args.at("input")).bit_equal(ramp(8, 0, 1)));
  EXPECT_TRUE(std::holds_alternative<std::monostate>(args.at("inplace")));
  EXPECT_EQ(args.size(), 4u);
  outs[0] = Crash{};
  EXPECT_THROW(node_args(c, 1, outs), ValidityError);
}

TEST(MakeBackend, InstancesAreIndependent) {
  auto a = make_backend(BackendId::parse("perturb:0.1:all:ref-f32"));
  auto b = make_backend(BackendId::parse("ref-f64"));
  EXPECT_EQ(a->name(), "perturb:0.1:all:ref-f32");
  EXPECT_EQ(b->name(), "ref-f64");
  const TestCase c = relu_dropout_gelu(0.5);
  const CaseOutputs first = b->run_case(c);
  a->run_case(c);
  const CaseOutputs second = b->run_case(c);
  for (const auto& [id, o] : first) EXPECT_TRUE(std::get<TensorValue>(second.at(id)).bit_equal(std::get<TensorValue>(o)));
}

}  // namespace
}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "subdiff/errors.hpp"
#include "subdiff/rng.hpp"
#include "subdiff/tensor.hpp"

namespace subdiff {
namespace {

TEST(Mix64, MatchesSplitMix64Outputs) {
  // First outputs of SplitMix64 seeded with 0 and with 1234567.
  EXPECT_EQ(mix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(mix64(1234567), 6457827717110365317ULL);
  EXPECT_EQ(mix64(1234567 + 0x9E3779B97F4A7C15ULL), 3203168211198807973ULL);
}

TEST(CounterStream, KeyDerivation) {
  const CounterStream s(42, RngDomain::kTensor, 3, 1);
  EXPECT_EQ(s.key(), mix64(mix64(mix64(42 ^ 0x1) ^ 3) ^ 1));
  EXPECT_EQ(s.word(7), mix64(s.key() ^ mix64(7)));
  EXPECT_EQ(s.unit(7), static_cast<double>(s.word(7) >> 11) * 0x1.0p-53);
}

TEST(CounterStream, StreamsAreDistinctAndPure) {
  std::set<std::uint64_t> keys;
  for (auto d : {RngDomain::kTensor, RngDomain::kRecordPick, RngDomain::kDropoutMask, RngDomain::kPerturbSign,
                 RngDomain::kCaseSeed}) {
    for (std::uint64_t a = 0; a < 4; ++a) {
      for (std::uint64_t b = 0; b < 4; ++b) keys.insert(CounterStream(9, d, a, b).key());
    }
  }
  EXPECT_EQ(keys.size(), 5u * 16u);
  EXPECT_EQ(CounterStream(1, RngDomain::kTensor, 2, 3).word(100), CounterStream(1, RngDomain::kTensor, 2, 3).word(100));
}

TEST(CounterStream, UnitAndBelowRanges) {
  const CounterStream s(5, RngDomain::kRecordPick, 0, 0);
  double sum = 0;
  std::vector<int> hist(7, 0);
  for (std::uint64_t i = 0; i < 70000; ++i) {
    const double u = s.unit(i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    const auto k = s.below(i, 7);
    ASSERT_LT(k, 7u);
    ++hist[k];
  }
  EXPECT_NEAR(sum / 70000, 0.5, 0.01);
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(s.below(3, 1), 0u);
}

TEST(Tensor, Basics) {
  const TensorValue t({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.dtype(), DType::kF32);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2);
  EXPECT_EQ(t.at(5), 6.0);
  EXPECT_EQ(numel({2, 3, 4}), 24);
  EXPECT_EQ(shape_string({16, 3}), "[16, 3]");
  EXPECT_THROW(TensorValue({2, 2}, std::vector<float>{1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(TensorValue({2, 0}, std::vector<float>{}), std::invalid_argument);
  const TensorValue z = TensorValue::zeros(DType::kF64, {3});
  EXPECT_EQ(z.dtype(), DType::kF64);
  EXPECT_EQ(z.at(2), 0.0);
}

TEST(Tensor, CastAndBitEquality) {
  const TensorValue d({3}, std::vector<double>{0.1, -2.5, std::nan("")});
  const TensorValue f = d.cast(DType::kF32);
  EXPECT_EQ(f.dtype(), DType::kF32);
  EXPECT_EQ(f.at(0), static_cast<double>(0.1f));
  EXPECT_TRUE(f.bit_equal(d.cast(DType::kF32)));
  EXPECT_FALSE(f.bit_equal(d));
  EXPECT_TRUE(d.bit_equal(d));  // NaN payloads compare bitwise
  EXPECT_FALSE(TensorValue({1}, std::vector<double>{0.0}).bit_equal(TensorValue({1}, std::vector<double>{-0.0})));
}

TEST(DType, Parse) {
  EXPECT_EQ(parse_dtype("f32"), DType::kF32);
  EXPECT_EQ(parse_dtype("f64"), DType::kF64);
  EXPECT_EQ(to_string(DType::kF64), "f64");
  EXPECT_THROW(parse_dtype("float16"), ParseError);
}

TEST(Base64, StandardVectors) {
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("f"), "Zg==");
  EXPECT_EQ(base64_encode("fo"), "Zm8=");
  EXPECT_EQ(base64_encode("foo"), "Zm9v");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(base64_decode("Zm9vYmE="), "fooba");
  EXPECT_THROW(base64_decode("Zm9v!"), ParseError);
  EXPECT_THROW(base64_decode("Zm9"), ParseError);
}

TEST(Base64, TensorPayloadIsLittleEndian) {
  EXPECT_EQ(tensor_to_base64(TensorValue({1}, std::vector<float>{1.0f})), "AACAPw==");
  EXPECT_EQ(tensor_to_base64(TensorValue({1}, std::vector<double>{1.0})), "AAAAAAAA8D8=");
  const TensorValue t({2, 2}, std::vector<double>{1.5, -0.0, std::numeric_limits<double>::infinity(), 3e-300});
  EXPECT_TRUE(tensor_from_base64(DType::kF64, {2, 2}, tensor_to_base64(t)).bit_equal(t));
  EXPECT_THROW(tensor_from_base64(DType::kF32, {3}, "AACAPw=="), ParseError);
}

}  // namespace
}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace subdiff {

// Counter-based random streams. Every random quantity in the pipeline is a
// pure function of (seed, domain, a, b, index), so a case can be reproduced
// by any implementation of the following:
//
//   mix64(z):  z += 0x9E3779B97F4A7C15;
//              z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//              z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//              return z ^ (z >> 31);                       (SplitMix64)
//   key      = mix64(mix64(mix64(seed ^ domain) ^ a) ^ b)
//   word(k)  = mix64(key ^ mix64(k))
//   unit(k)  = (word(k) >> 11) * 2^-53                    in [0, 1)
//
// Tensor element k of parameter ordinal p at node n uses
// (case_seed, kTensor, n, p); the record pick at node n uses
// (case_seed, kRecordPick, n, 0) index 0.
enum class RngDomain : std::uint64_t {
  kTensor = 0x1,
  kRecordPick = 0x2,
  kDropoutMask = 0x3,
  kPerturbSign = 0x4,
  kCaseSeed = 0x5,
};

std::uint64_t mix64(std::uint64_t z);

class CounterStream {
 public:
  CounterStream(std::uint64_t seed, RngDomain domain, std::uint64_t a, std::uint64_t b);

  std::uint64_t word(std::uint64_t index) const;
  double unit(std::uint64_t index) const;
  // Uniform integer in [0, n) for n > 0.
  std::uint64_t below(std::uint64_t index, std::uint64_t n) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace subdiff

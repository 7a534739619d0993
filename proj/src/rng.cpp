// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/rng.hpp"

#include <algorithm>

namespace subdiff {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterStream::CounterStream(std::uint64_t seed, RngDomain domain, std::uint64_t a,
                             std::uint64_t b)
    : key_(mix64(mix64(mix64(seed ^ static_cast<std::uint64_t>(domain)) ^ a) ^ b)) {}

std::uint64_t CounterStream::word(std::uint64_t index) const { return mix64(key_ ^ mix64(index)); }

double CounterStream::unit(std::uint64_t index) const {
  return static_cast<double>(word(index) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterStream::below(std::uint64_t index, std::uint64_t n) const {
  auto k = static_cast<std::uint64_t>(unit(index) * static_cast<double>(n));
  return std::min(k, n - 1);
}

}  // namespace subdiff

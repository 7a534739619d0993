// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace subdiff {

/// Malformed input document (JSON syntax, missing field, wrong field type).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structurally well-formed document that violates a domain invariant
/// (unknown operator, cyclic graph, edge into a non-tensor parameter, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operator rejected its inputs. This is the event counted as a failed
/// validity check.
class ValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A backend could not serve a request (dead bridge process, protocol
/// violation). Cases hitting this are unevaluated, never bugs.
class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <set>
#include <string>

#include "subdiff/backend.hpp"

namespace subdiff {

// Line-delimited JSON over the child's stdin/stdout, one response per request.
//   -> {"type": "hello", "version": 1}
//   <- {"type": "hello", "version": 1, "devices": [str], "ops": [str]}
//   -> {"type": "run_case", "device": str, "case": <inlined case object>}
//   <- {"type": "case_result", "nodes": [...]}       (see dump_outputs)
//   <- {"type": "error", "message": str}
inline constexpr int kBridgeProtocolVersion = 1;

/// Backend served by an external process launched as `/bin/sh -c command`.
/// The process starts on first use; if it dies, the failing request throws
/// BackendUnavailable and the next request starts a fresh process.
class BridgeBackend final : public Backend {
 public:
  BridgeBackend(std::string command, std::string device,
                std::chrono::milliseconds timeout = std::chrono::seconds(120));
  ~BridgeBackend() override;
  BridgeBackend(const BridgeBackend&) = delete;
  BridgeBackend& operator=(const BridgeBackend&) = delete;

  std::string name() const override;
  CaseOutputs run_case(const TestCase& c) override;

  /// Operators announced at hello. Starts the process if needed.
  const std::set<std::string>& ops();

 private:
  class Process;
  void ensure_started();
  std::string request(const std::string& line);

  std::string command_;
  std::string device_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<Process> proc_;
  std::set<std::string> ops_;
};

}  // namespace subdiff

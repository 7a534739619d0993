// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "subdiff/graph.hpp"

namespace subdiff {

// Graph file format: a JSON array of
//   {"id": str, "nodes": [{"id": int, "api": str}],
//    "edges": [{"src": int, "dst": int, "param": str}]}
// Throws ParseError (with line number) or ValidationError (naming the graph
// and the offending node/edge).
GraphCorpus parse_corpus(const std::string& text);
GraphCorpus load_corpus(const std::filesystem::path& path);

std::string dump_corpus(const GraphCorpus& corpus);
void save_corpus(const GraphCorpus& corpus, const std::filesystem::path& path);

// Reads a whole file; throws ParseError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace subdiff

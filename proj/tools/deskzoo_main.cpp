// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

// Writes the synthetic desk model corpus and a trace recorded from it.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "subdiff/desk_zoo.hpp"
#include "subdiff/graph_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the desk model corpus and its trace", "subdiff-deskzoo"};
  std::string out;
  std::uint64_t seed = 0;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--seed", seed, "Seed for weights and inputs")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto zoo = subdiff::desk_zoo();
    const std::filesystem::path dir(out);
    subdiff::save_corpus(subdiff::corpus_of(zoo), dir / "models.json");
    const auto store = subdiff::record_trace(zoo, seed);
    subdiff::write_file(dir / "trace.jsonl", subdiff::emit_trace(store));
    std::cerr << "subdiff-deskzoo: " << zoo.size() << " models, " << store.size() << " records\n";
  } catch (const std::exception& e) {
    std::cerr << "subdiff-deskzoo: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

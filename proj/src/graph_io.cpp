// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/graph_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace subdiff {

namespace detail {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1;
    for (size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError(what + ": line " + std::to_string(line) + ": " + e.what());
  }
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + name + "'");
  return *it;
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

std::int64_t as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

ComputationGraph graph_from_json(const json& j, const std::string& where) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  const json& jn = field(j, "nodes", where);
  if (!jn.is_array()) throw ParseError(where + ".nodes: expected an array");
  for (size_t i = 0; i < jn.size(); ++i) {
    std::string w = where + ".nodes[" + std::to_string(i) + "]";
    nodes.push_back({as_int(field(jn[i], "id", w), w + ".id"),
                     as_string(field(jn[i], "api", w), w + ".api")});
  }
  const json& je = field(j, "edges", where);
  if (!je.is_array()) throw ParseError(where + ".edges: expected an array");
  for (size_t i = 0; i < je.size(); ++i) {
    std::string w = where + ".edges[" + std::to_string(i) + "]";
    edges.push_back({as_int(field(je[i], "src", w), w + ".src"),
                     as_int(field(je[i], "dst", w), w + ".dst"),
                     as_string(field(je[i], "param", w), w + ".param")});
  }
  try {
    return ComputationGraph(std::move(nodes), std::move(edges));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

ojson graph_to_json(const std::string& id, const ComputationGraph& g) {
  ojson j;
  j["id"] = id;
  j["nodes"] = ojson::array();
  for (const auto& n : g.nodes()) j["nodes"].push_back({{"id", n.id}, {"api", n.api}});
  j["edges"] = ojson::array();
  for (const auto& e : g.edges()) {
    j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"param", e.param}});
  }
  return j;
}

}  // namespace detail

GraphCorpus parse_corpus(const std::string& text) {
  using namespace detail;
  json doc = parse_json(text, "graph file");
  if (!doc.is_array()) throw ParseError("graph file: top level must be an array of graphs");
  GraphCorpus corpus;
  std::set<std::string> ids;
  for (size_t i = 0; i < doc.size(); ++i) {
    std::string where = "graphs[" + std::to_string(i) + "]";
    std::string id = as_string(field(doc[i], "id", where), where + ".id");
    where = "graph '" + id + "'";
    if (!ids.insert(id).second) throw ValidationError(where + ": duplicate graph id");
    corpus.graphs.push_back({id, graph_from_json(doc[i], where)});
  }
  return corpus;
}

GraphCorpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

std::string dump_corpus(const GraphCorpus& corpus) {
  detail::ojson doc = detail::ojson::array();
  for (const auto& entry : corpus.graphs) doc.push_back(detail::graph_to_json(entry.id, entry.graph));
  return doc.dump(1) + "\n";
}

void save_corpus(const GraphCorpus& corpus, const std::filesystem::path& path) {
  write_file(path, dump_corpus(corpus));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << contents;
}

}  // namespace subdiff

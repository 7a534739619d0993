// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/miner.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "subdiff/errors.hpp"

namespace subdiff {

void MiningConfig::validate() const {
  if (min_support < 1) throw std::invalid_argument("min_support must be >= 1");
  if (min_nodes < 2) throw std::invalid_argument("min_nodes must be >= 2");
  if (max_nodes < min_nodes) throw std::invalid_argument("min_nodes must not exceed max_nodes");
}

std::string to_string(const DfsCode& code) {
  std::ostringstream os;
  for (const auto& e : code) {
    os << '(' << e.from << ',' << e.to << ',' << e.from_label << ','
       << (e.direction == ArcDirection::kForward ? '>' : '<') << ',' << e.param << ','
       << e.to_label << ')';
  }
  return os.str();
}

namespace {

// Sorted vocabulary; integer ids preserve string order, so minimal codes over
// ids coincide with minimal codes over strings.
class Vocab {
 public:
  void add(const std::string& s) { words_.push_back(s); }
  void freeze() {
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  }
  int id(const std::string& s) const {
    return static_cast<int>(std::lower_bound(words_.begin(), words_.end(), s) - words_.begin());
  }
  const std::string& word(int id) const { return words_[static_cast<size_t>(id)]; }

 private:
  std::vector<std::string> words_;
};

struct Arc {
  int to;
  int elabel;
  int dir;  // 0: the arc leaves this vertex
  int eid;
};

struct LGraph {
  std::vector<int> vlabel;
  std::vector<std::vector<Arc>> adj;
  int num_edges = 0;
};

struct Tuple {
  int i, j, li, dir, el, lj;
  bool fwd() const { return i < j; }
  bool operator==(const Tuple&) const = default;
};

// DFS lexicographic order over code tuples.
bool tuple_less(const Tuple& a, const Tuple& b) {
  if (a.i == b.i && a.j == b.j) {
    return std::tie(a.li, a.dir, a.el, a.lj) < std::tie(b.li, b.dir, b.el, b.lj);
  }
  const bool fa = a.fwd();
  const bool fb = b.fwd();
  if (fa && fb) return a.j < b.j || (a.j == b.j && a.i > b.i);
  if (!fa && !fb) return a.i < b.i || (a.i == b.i && a.j < b.j);
  if (!fa && fb) return a.i < b.j;
  return a.j <= b.i;
}

struct TupleLess {
  bool operator()(const Tuple& a, const Tuple& b) const { return tuple_less(a, b); }
};

struct Emb {
  int graph;
  std::vector<int> map;    // code vertex -> host vertex
  std::vector<int> edges;  // host edge ids already covered
};

using Code = std::vector<Tuple>;

int num_vertices(const Code& code) {
  int n = 0;
  for (const auto& t : code) n = std::max({n, t.i + 1, t.j + 1});
  return n;
}

std::vector<int> rightmost_path(const Code& code) {
  int cur = num_vertices(code) - 1;
  std::vector<int> path{cur};
  for (auto it = code.rbegin(); it != code.rend(); ++it) {
    if (it->fwd() && it->j == cur) {
      cur = it->i;
      path.push_back(cur);
    }
  }
  return path;
}

// Enumerates the rightmost extensions of one embedding. `sink` receives the
// extension tuple, the host edge it covers, and the new host vertex (-1 for
// backward extensions).
template <class Sink>
void for_each_extension(const LGraph& g, const Emb& e, const std::vector<int>& rmpath, int n,
                        bool allow_forward, Sink&& sink) {
  auto used = [&](int eid) { return std::find(e.edges.begin(), e.edges.end(), eid) != e.edges.end(); };
  auto code_vertex_of = [&](int host) {
    auto it = std::find(e.map.begin(), e.map.end(), host);
    return it == e.map.end() ? -1 : static_cast<int>(it - e.map.begin());
  };
  const int rm = rmpath.front();
  const int rm_host = e.map[static_cast<size_t>(rm)];
  for (const Arc& a : g.adj[static_cast<size_t>(rm_host)]) {
    if (used(a.eid)) continue;
    const int v = code_vertex_of(a.to);
    if (v < 0 || v == rm) continue;
    if (std::find(rmpath.begin() + 1, rmpath.end(), v) == rmpath.end()) continue;
    sink(Tuple{rm, v, g.vlabel[static_cast<size_t>(rm_host)], a.dir, a.elabel,
               g.vlabel[static_cast<size_t>(a.to)]},
         a.eid, -1);
  }
  if (!allow_forward) return;
  for (int v : rmpath) {
    const int host = e.map[static_cast<size_t>(v)];
    for (const Arc& a : g.adj[static_cast<size_t>(host)]) {
      if (code_vertex_of(a.to) >= 0) continue;
      sink(Tuple{v, n, g.vlabel[static_cast<size_t>(host)], a.dir, a.elabel,
                 g.vlabel[static_cast<size_t>(a.to)]},
           a.eid, a.to);
    }
  }
}

Emb extend(const Emb& e, int eid, int new_host) {
  Emb out = e;
  out.edges.push_back(eid);
  if (new_host >= 0) out.map.push_back(new_host);
  return out;
}

// Greedy construction of the minimum DFS code of a connected graph with at
// least one edge. With `against`, stops early and returns false as soon as
// the minimum diverges from it.
bool min_code(const LGraph& g, const Code* against, Code* out) {
  Code code;
  std::vector<Emb> embs;
  {
    bool have = false;
    Tuple best{};
    for (size_t u = 0; u < g.adj.size(); ++u) {
      for (const Arc& a : g.adj[u]) {
        Tuple t{0, 1, g.vlabel[u], a.dir, a.elabel, g.vlabel[static_cast<size_t>(a.to)]};
        if (!have || tuple_less(t, best)) {
          best = t;
          embs.clear();
          have = true;
        }
        if (t == best) embs.push_back(Emb{0, {static_cast<int>(u), a.to}, {a.eid}});
      }
    }
    code.push_back(best);
    if (against != nullptr && !(best == (*against)[0])) return false;
  }
  while (static_cast<int>(code.size()) < g.num_edges) {
    const auto rmpath = rightmost_path(code);
    const int n = num_vertices(code);
    bool have = false;
    Tuple best{};
    std::vector<Emb> next;
    for (const Emb& e : embs) {
      for_each_extension(g, e, rmpath, n, true, [&](const Tuple& t, int eid, int new_host) {
        if (!have || tuple_less(t, best)) {
          best = t;
          next.clear();
          have = true;
        }
        if (t == best) next.push_back(extend(e, eid, new_host));
      });
    }
    if (!have) throw std::logic_error("min_code: graph is not connected");
    if (against != nullptr && !(best == (*against)[code.size()])) return false;
    code.push_back(best);
    embs = std::move(next);
  }
  if (out != nullptr) *out = std::move(code);
  return true;
}

LGraph graph_of_code(const Code& code) {
  LGraph g;
  const int n = num_vertices(code);
  g.vlabel.assign(static_cast<size_t>(n), 0);
  g.adj.resize(static_cast<size_t>(n));
  for (const auto& t : code) {
    g.vlabel[static_cast<size_t>(t.i)] = t.li;
    g.vlabel[static_cast<size_t>(t.j)] = t.lj;
    const int eid = g.num_edges++;
    g.adj[static_cast<size_t>(t.i)].push_back({t.j, t.el, t.dir, eid});
    g.adj[static_cast<size_t>(t.j)].push_back({t.i, t.el, 1 - t.dir, eid});
  }
  return g;
}

LGraph lower(const ComputationGraph& cg, const Vocab& vlabels, const Vocab& elabels) {
  LGraph g;
  std::map<NodeId, int> index;
  for (const auto& n : cg.nodes()) {
    index[n.id] = static_cast<int>(g.vlabel.size());
    g.vlabel.push_back(vlabels.id(n.api));
  }
  g.adj.resize(g.vlabel.size());
  for (const auto& e : cg.edges()) {
    const int s = index.at(e.src);
    const int d = index.at(e.dst);
    const int el = elabels.id(e.param);
    const int eid = g.num_edges++;
    g.adj[static_cast<size_t>(s)].push_back({d, el, 0, eid});
    g.adj[static_cast<size_t>(d)].push_back({s, el, 1, eid});
  }
  return g;
}

DfsCode raise(const Code& code, const Vocab& vlabels, const Vocab& elabels) {
  DfsCode out;
  out.reserve(code.size());
  for (const auto& t : code) {
    out.push_back({t.i, t.j, vlabels.word(t.li),
                   t.dir == 0 ? ArcDirection::kForward : ArcDirection::kBackward,
                   elabels.word(t.el), vlabels.word(t.lj)});
  }
  return out;
}

int support_of(const std::vector<Emb>& embs) {
  int count = 0;
  int last = -1;
  for (const auto& e : embs) {
    if (e.graph != last) {
      ++count;
      last = e.graph;
    }
  }
  return count;
}

class Miner {
 public:
  Miner(const GraphCorpus& corpus, const MiningConfig& cfg) : corpus_(corpus), cfg_(cfg) {
    for (const auto& entry : corpus.graphs) {
      for (const auto& n : entry.graph.nodes()) vlabels_.add(n.api);
      for (const auto& e : entry.graph.edges()) elabels_.add(e.param);
    }
    vlabels_.freeze();
    elabels_.freeze();
    for (const auto& entry : corpus.graphs) graphs_.push_back(lower(entry.graph, vlabels_, elabels_));
  }

  std::vector<FrequentSubgraph> run() {
    std::map<Tuple, std::vector<Emb>, TupleLess> roots;
    for (size_t gi = 0; gi < graphs_.size(); ++gi) {
      const LGraph& g = graphs_[gi];
      for (size_t u = 0; u < g.adj.size(); ++u) {
        for (const Arc& a : g.adj[u]) {
          Tuple t{0, 1, g.vlabel[u], a.dir, a.elabel, g.vlabel[static_cast<size_t>(a.to)]};
          roots[t].push_back(Emb{static_cast<int>(gi), {static_cast<int>(u), a.to}, {a.eid}});
        }
      }
    }
    for (const auto& [t, embs] : roots) {
      if (support_of(embs) < cfg_.min_support) continue;
      Code code{t};
      grow(code, embs);
    }
    std::sort(results_.begin(), results_.end(), [](const FrequentSubgraph& a, const FrequentSubgraph& b) {
      if (a.support != b.support) return a.support > b.support;
      if (a.pattern.size() != b.pattern.size()) return a.pattern.size() < b.pattern.size();
      return a.code < b.code;
    });
    return std::move(results_);
  }

 private:
  void grow(Code& code, const std::vector<Emb>& embs) {
    if (!min_code(graph_of_code(code), &code, nullptr)) return;
    const int n = num_vertices(code);
    if (n >= cfg_.min_nodes && n <= cfg_.max_nodes) report(code, embs);

    const auto rmpath = rightmost_path(code);
    std::map<Tuple, std::vector<Emb>, TupleLess> children;
    for (const Emb& e : embs) {
      for_each_extension(graphs_[static_cast<size_t>(e.graph)], e, rmpath, n, n < cfg_.max_nodes,
                         [&](const Tuple& t, int eid, int new_host) {
                           children[t].push_back(extend(e, eid, new_host));
                         });
    }
    for (auto& [t, child_embs] : children) {
      if (support_of(child_embs) < cfg_.min_support) continue;
      code.push_back(t);
      grow(code, child_embs);
      code.pop_back();
    }
  }

  void report(const Code& code, const std::vector<Emb>& embs) {
    FrequentSubgraph fs;
    fs.code = raise(code, vlabels_, elabels_);
    fs.pattern = pattern_from_code(fs.code);
    fs.support = support_of(embs);
    for (const auto& e : embs) fs.supporting_graphs.insert(corpus_.graphs[static_cast<size_t>(e.graph)].id);
    results_.push_back(std::move(fs));
  }

  const GraphCorpus& corpus_;
  MiningConfig cfg_;
  Vocab vlabels_;
  Vocab elabels_;
  std::vector<LGraph> graphs_;
  std::vector<FrequentSubgraph> results_;
};

}  // namespace

std::vector<FrequentSubgraph> mine(const GraphCorpus& corpus, const MiningConfig& cfg) {
  cfg.validate();
  return Miner(corpus, cfg).run();
}

DfsCode canonical_code(const ComputationGraph& pattern) {
  if (!pattern.connected()) throw ValidationError("canonical_code: pattern is disconnected");
  if (pattern.empty()) return {};
  if (pattern.edges().empty()) {
    const std::string& label = pattern.nodes().front().api;
    return {DfsEdge{0, 0, label, ArcDirection::kForward, "", label}};
  }
  Vocab vlabels;
  Vocab elabels;
  for (const auto& n : pattern.nodes()) vlabels.add(n.api);
  for (const auto& e : pattern.edges()) elabels.add(e.param);
  vlabels.freeze();
  elabels.freeze();
  Code code;
  min_code(lower(pattern, vlabels, elabels), nullptr, &code);
  return raise(code, vlabels, elabels);
}

ComputationGraph pattern_from_code(const DfsCode& code) {
  if (code.empty()) return {};
  if (code.size() == 1 && code[0].from == code[0].to) {
    return ComputationGraph({{0, code[0].from_label}}, {});
  }
  int n = 0;
  for (const auto& t : code) n = std::max({n, t.from + 1, t.to + 1});
  std::vector<Node> nodes(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) nodes[static_cast<size_t>(i)].id = i;
  std::vector<Edge> edges;
  for (const auto& t : code) {
    nodes[static_cast<size_t>(t.from)].api = t.from_label;
    nodes[static_cast<size_t>(t.to)].api = t.to_label;
    if (t.direction == ArcDirection::kForward) {
      edges.push_back({t.from, t.to, t.param});
    } else {
      edges.push_back({t.to, t.from, t.param});
    }
  }
  return ComputationGraph(std::move(nodes), std::move(edges));
}

namespace {

class EmbeddingSearch {
 public:
  EmbeddingSearch(const ComputationGraph& host, const ComputationGraph& pattern) {
    std::map<NodeId, int> hidx;
    for (const auto& n : host.nodes()) {
      hidx[n.id] = static_cast<int>(host_labels_.size());
      host_labels_.push_back(n.api);
    }
    for (const auto& e : host.edges()) host_arcs_.insert({hidx[e.src], hidx[e.dst], e.param});

    // Order pattern nodes so each one (after the first of its component)
    // is adjacent to an earlier one: constraints apply as early as possible.
    std::map<NodeId, int> pidx;
    for (const auto& n : pattern.nodes()) {
      pidx[n.id] = static_cast<int>(pattern_labels_.size());
      pattern_labels_.push_back(n.api);
    }
    const size_t pn = pattern_labels_.size();
    std::vector<std::vector<int>> adj(pn);
    for (const auto& e : pattern.edges()) {
      const int s = pidx[e.src];
      const int d = pidx[e.dst];
      pattern_arcs_.push_back({s, d, e.param});
      adj[static_cast<size_t>(s)].push_back(d);
      adj[static_cast<size_t>(d)].push_back(s);
    }
    std::vector<bool> placed(pn, false);
    for (size_t start = 0; start < pn; ++start) {
      if (placed[start]) continue;
      std::vector<int> frontier{static_cast<int>(start)};
      placed[start] = true;
      for (size_t k = 0; k < frontier.size(); ++k) {
        order_.push_back(frontier[k]);
        for (int nb : adj[static_cast<size_t>(frontier[k])]) {
          if (!placed[static_cast<size_t>(nb)]) {
            placed[static_cast<size_t>(nb)] = true;
            frontier.push_back(nb);
          }
        }
      }
    }
    mapping_.assign(pn, -1);
    host_used_.assign(host_labels_.size(), false);
  }

  bool search(size_t depth = 0) {
    if (depth == order_.size()) return true;
    const int p = order_[depth];
    for (size_t h = 0; h < host_labels_.size(); ++h) {
      if (host_used_[h] || host_labels_[h] != pattern_labels_[static_cast<size_t>(p)]) continue;
      mapping_[static_cast<size_t>(p)] = static_cast<int>(h);
      if (consistent(p)) {
        host_used_[h] = true;
        if (search(depth + 1)) return true;
        host_used_[h] = false;
      }
      mapping_[static_cast<size_t>(p)] = -1;
    }
    return false;
  }

 private:
  bool consistent(int p) const {
    for (const auto& [s, d, param] : pattern_arcs_) {
      if (s != p && d != p) continue;
      const int hs = mapping_[static_cast<size_t>(s)];
      const int hd = mapping_[static_cast<size_t>(d)];
      if (hs < 0 || hd < 0) continue;
      if (host_arcs_.count({hs, hd, param}) == 0) return false;
    }
    return true;
  }

  std::vector<std::string> host_labels_;
  std::set<std::tuple<int, int, std::string>> host_arcs_;
  std::vector<std::string> pattern_labels_;
  std::vector<std::tuple<int, int, std::string>> pattern_arcs_;
  std::vector<int> order_;
  std::vector<int> mapping_;
  std::vector<bool> host_used_;
};

}  // namespace

bool contains_embedding(const ComputationGraph& host, const ComputationGraph& pattern) {
  if (pattern.size() > host.size()) return false;
  return EmbeddingSearch(host, pattern).search();
}

}  // namespace subdiff

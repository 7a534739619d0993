// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/desk_zoo.hpp"

#include <algorithm>

#include "subdiff/generator.hpp"
#include "subdiff/kernels.hpp"
#include "subdiff/rng.hpp"

namespace subdiff {

namespace {

const Shape kImage{2, 8, 4, 4};
const Shape kTokens{2, 8, 16};

using Inputs = std::vector<std::pair<std::string, NodeId>>;

class ModelBuilder {
 public:
  ModelBuilder(std::string id, Shape input) : id_(std::move(id)), input_(std::move(input)) {}

  NodeId add(const std::string& api, NodeConfig cfg, const Inputs& inputs = {}) {
    const NodeId n = next_++;
    nodes_.push_back({n, api});
    bool input_edged = false;
    for (const auto& [param, src] : inputs) {
      edges_.push_back({src, n, param});
      input_edged = input_edged || param == "input";
    }
    if (!input_edged && cfg.tensors.count("input") == 0) cfg.tensors["input"] = {input_, -1.0, 1.0};
    configs_[n] = std::move(cfg);
    return n;
  }
  NodeId add(const std::string& api, NodeConfig cfg, NodeId from) { return add(api, std::move(cfg), {{"input", from}}); }

  DeskModel build() { return {id_, ComputationGraph(nodes_, edges_), configs_}; }

 private:
  std::string id_;
  Shape input_;
  NodeId next_ = 0;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<NodeId, NodeConfig> configs_;
};

ScalarValue i(std::int64_t v) { return ScalarValue::of_int(v); }
ScalarValue f(double v) { return ScalarValue::of_float(v); }
ScalarValue b(bool v) { return ScalarValue::of_bool(v); }

NodeConfig conv(std::int64_t groups = 1) {
  return {{{"weight", {{8, 8 / groups, 3, 3}, -0.2, 0.2}}, {"bias", {{8}, -0.1, 0.1}}},
          {{"stride", i(1)}, {"padding", i(1)}, {"dilation", i(1)}, {"groups", i(groups)}}};
}
NodeConfig bn() {
  return {{{"running_mean", {{8}, -0.1, 0.1}},
           {"running_var", {{8}, 0.5, 1.5}},
           {"weight", {{8}, 0.8, 1.2}},
           {"bias", {{8}, -0.1, 0.1}}},
          {{"training", b(false)}, {"momentum", f(0.1)}, {"eps", f(1e-5)}}};
}
NodeConfig relu() { return {{}, {{"inplace", b(false)}}}; }
NodeConfig max_pool() { return {{}, {{"kernel_size", i(3)}, {"stride", i(1)}, {"padding", i(1)}}}; }
NodeConfig adaptive_pool() { return {{}, {{"output_size", ScalarValue::of_tuple({4, 4})}}}; }
NodeConfig flatten() { return {{}, {{"start_dim", i(2)}}}; }
NodeConfig linear() { return {{{"weight", {{16, 16}, -0.25, 0.25}}, {"bias", {{16}, -0.1, 0.1}}}, {}}; }
NodeConfig layer_norm() {
  return {{{"weight", {{16}, 0.8, 1.2}}, {"bias", {{16}, -0.1, 0.1}}},
          {{"normalized_shape", ScalarValue::of_tuple({16})}, {"eps", f(1e-5)}}};
}
NodeConfig gelu(const std::string& approximate = "none") { return {{}, {{"approximate", ScalarValue::of_string(approximate)}}}; }
NodeConfig softmax() { return {{}, {{"dim", i(-1)}}}; }
NodeConfig dropout(double p, bool training) { return {{}, {{"p", f(p)}, {"training", b(training)}, {"inplace", b(false)}}}; }
NodeConfig with_other(Shape shape, double lo, double hi) { return {{{"other", {std::move(shape), lo, hi}}}, {}}; }
NodeConfig none() { return {}; }

std::vector<DeskModel> build_zoo() {
  std::vector<DeskModel> zoo;
  {
    ModelBuilder m("resnet-basic", kImage);
    NodeId c1 = m.add("conv2d", conv());
    NodeId r1 = m.add("relu", relu(), m.add("batch_norm", bn(), c1));
    NodeId b2 = m.add("batch_norm", bn(), m.add("conv2d", conv(), r1));
    NodeId a = m.add("__add__", none(), {{"input", b2}, {"other", r1}});
    NodeId r2 = m.add("relu", relu(), a);
    NodeId fl = m.add("flatten", flatten(), m.add("adaptive_avg_pool2d", adaptive_pool(), r2));
    m.add("softmax", softmax(), m.add("linear", linear(), fl));
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("resnet-pool", kImage);
    NodeId r1 = m.add("relu", relu(), m.add("batch_norm", bn(), m.add("conv2d", conv())));
    NodeId mp = m.add("max_pool2d", max_pool(), r1);
    NodeId b2 = m.add("batch_norm", bn(), m.add("conv2d", conv(), mp));
    NodeId a = m.add("__add__", none(), {{"input", b2}, {"other", mp}});
    m.add("linear", linear(), m.add("flatten", flatten(), m.add("relu", relu(), a)));
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("densenet", kImage);
    NodeId r1 = m.add("relu", relu(), m.add("batch_norm", bn(), m.add("conv2d", conv())));
    NodeId mp = m.add("max_pool2d", max_pool(), r1);
    NodeId r2 = m.add("relu", relu(), m.add("batch_norm", bn(), m.add("conv2d", conv(2), mp)));
    NodeId fl = m.add("flatten", flatten(), m.add("adaptive_avg_pool2d", adaptive_pool(), r2));
    m.add("linear", linear(), m.add("layer_norm", layer_norm(), fl));
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("vgg", kImage);
    NodeId r1 = m.add("relu", relu(), m.add("conv2d", conv()));
    NodeId r2 = m.add("relu", relu(), m.add("conv2d", conv(), r1));
    NodeId fl = m.add("flatten", flatten(), m.add("max_pool2d", max_pool(), r2));
    NodeId g = m.add("gelu", gelu(), m.add("linear", linear(), fl));
    m.add("linear", linear(), m.add("dropout", dropout(0.1, false), g));
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("mobilenet", kImage);
    NodeId c1 = m.add("conv2d", conv(2));
    NodeId b2 = m.add("batch_norm", bn(), m.add("conv2d", conv(), m.add("relu", relu(), m.add("batch_norm", bn(), c1))));
    NodeId a = m.add("__add__", none(), {{"input", b2}, {"other", c1}});
    NodeId fl = m.add("flatten", flatten(), m.add("adaptive_avg_pool2d", adaptive_pool(), m.add("relu", relu(), a)));
    m.add("linear", linear(), m.add("dropout", dropout(0.2, true), m.add("layer_norm", layer_norm(), fl)));
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("transformer-a", kTokens);
    NodeId l1 = m.add("linear", linear(), m.add("layer_norm", layer_norm()));
    NodeId q = m.add("matmul", with_other({16, 16}, -0.25, 0.25), l1);
    NodeId s = m.add("softmax", softmax(), m.add("div", with_other({16}, 2.0, 4.0), q));
    NodeId dr = m.add("dropout", dropout(0.1, false), s);
    NodeId g = m.add("gelu", gelu(), m.add("linear", linear(), dr));
    NodeId mu = m.add("__mul__", none(), {{"input", g}, {"other", dr}});
    m.add("layer_norm", layer_norm(), mu);
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("transformer-b", kTokens);
    NodeId g = m.add("gelu", gelu(), m.add("linear", linear()));
    NodeId dr = m.add("dropout", dropout(0.1, true), m.add("linear", linear(), g));
    NodeId mm = m.add("matmul", with_other({2, 16, 16}, -0.25, 0.25), m.add("layer_norm", layer_norm(), dr));
    NodeId dv = m.add("div", with_other({2, 8, 16}, 1.0, 2.0), m.add("softmax", softmax(), mm));
    m.add("__mul__", with_other({16}, 0.5, 1.5), dv);
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("mlp-mixer", kTokens);
    NodeId ln = m.add("layer_norm", layer_norm());
    NodeId g = m.add("gelu", gelu("tanh"), m.add("matmul", with_other({16, 16}, -0.25, 0.25), ln));
    NodeId l = m.add("linear", linear(), m.add("matmul", with_other({16, 16}, -0.25, 0.25), g));
    NodeId mu = m.add("__mul__", none(), {{"input", m.add("dropout", dropout(0.1, false), l)}, {"other", ln}});
    m.add("softmax", softmax(), mu);
    zoo.push_back(m.build());
  }
  {
    ModelBuilder m("gated-mlp", kTokens);
    NodeId g = m.add("gelu", gelu(), m.add("linear", linear()));
    NodeId l2 = m.add("linear", linear());
    NodeId mu = m.add("__mul__", none(), {{"input", g}, {"other", l2}});
    NodeId s = m.add("softmax", softmax(), m.add("div", with_other({16}, 2.0, 4.0), mu));
    m.add("linear", linear(), m.add("dropout", dropout(0.1, false), s));
    zoo.push_back(m.build());
  }
  return zoo;
}

TensorFeature feature_of(const TensorValue& t) {
  TensorFeature feat{t.dtype(), t.shape(), t.at(0), t.at(0)};
  for (size_t k = 1; k < t.size(); ++k) {
    feat.vmin = std::min(feat.vmin, t.at(k));
    feat.vmax = std::max(feat.vmax, t.at(k));
  }
  return feat;
}

}  // namespace

std::vector<DeskModel> desk_zoo() { return build_zoo(); }

GraphCorpus corpus_of(const std::vector<DeskModel>& models) {
  GraphCorpus corpus;
  for (const auto& m : models) corpus.graphs.push_back({m.id, m.graph});
  return corpus;
}

TraceStore record_trace(const std::vector<DeskModel>& models, std::uint64_t seed) {
  TraceStore store;
  for (size_t mi = 0; mi < models.size(); ++mi) {
    const DeskModel& model = models[mi];
    const std::uint64_t model_seed = CounterStream(seed, RngDomain::kCaseSeed, mi, 0).word(0);
    std::map<NodeId, TensorValue> outputs;
    for (NodeId n : topo_order(model.graph)) {
      const std::string& api = model.graph.api(n);
      const ApiSignature& sig = ApiRegistry::instance().at(api);
      const NodeConfig& cfg = model.configs.at(n);
      Args args;
      InputRecord rec{model.id + "#" + std::to_string(n), api, {}, {}};
      for (const auto& e : model.graph.in_edges(n)) args[e.param] = outputs.at(e.src);
      for (const auto& [param, spec] : cfg.tensors) {
        const CounterStream stream(model_seed, RngDomain::kTensor, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(sig.ordinal(param)));
        args[param] = sample_tensor({DType::kF32, spec.shape, spec.lo, spec.hi}, stream);
      }
      for (const auto& [param, value] : cfg.scalars) {
        args[param] = value;
        rec.scalars[param] = value;
      }
      for (const auto& [param, arg] : args) {
        if (const auto* t = std::get_if<TensorValue>(&arg)) rec.tensors[param] = feature_of(*t);
      }
      outputs[n] = execute_node(api, args, DType::kF32, ExecContext{model_seed, n});
      store.add(std::move(rec));
    }
  }
  return store;
}

}  // namespace subdiff

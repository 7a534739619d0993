// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "subdiff/errors.hpp"
#include "subdiff/rng.hpp"

namespace subdiff {

MetaArgs meta_of(const Args& args) {
  MetaArgs out;
  for (const auto& [name, arg] : args) {
    if (const auto* t = std::get_if<TensorValue>(&arg)) {
      out[name] = TensorMeta{t->dtype(), t->shape()};
    } else if (const auto* s = std::get_if<ScalarValue>(&arg)) {
      out[name] = *s;
    } else {
      out[name] = std::monostate{};
    }
  }
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidityError(msg); }

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<std::int64_t> strides_of(const Shape& shape) {
  std::vector<std::int64_t> s(shape.size(), 1);
  for (size_t i = shape.size(); i-- > 1;) s[i - 1] = s[i] * shape[i];
  return s;
}

// Normalizes a possibly negative dimension index.
std::int64_t wrap_dim(std::int64_t dim, std::int64_t rank, const char* what) {
  if (dim < -rank || dim >= rank) {
    fail(std::string(what) + ": Dimension out of range (expected to be in range of [" +
         std::to_string(-rank) + ", " + std::to_string(rank - 1) + "], but got " + std::to_string(dim) + ")");
  }
  return dim < 0 ? dim + rank : dim;
}

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (size_t i = 0; i < rank; ++i) {
    const std::int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      fail("The size of tensor a (" + std::to_string(da) + ") must match the size of tensor b (" +
           std::to_string(db) + ") at non-singleton dimension " + std::to_string(i));
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// Strides of `in` viewed at the rank of `out`, with 0 for broadcast dims.
std::vector<std::int64_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::int64_t> s(out.size(), 0);
  const auto base = strides_of(in);
  const size_t off = out.size() - in.size();
  for (size_t i = 0; i < in.size(); ++i) s[off + i] = in[i] == 1 ? 0 : base[i];
  return s;
}

DType promote(std::initializer_list<const TensorMeta*> ts) {
  for (const auto* t : ts) {
    if (t != nullptr && t->dtype == DType::kF64) return DType::kF64;
  }
  return DType::kF32;
}

class MetaView {
 public:
  MetaView(const ApiSignature& sig, const MetaArgs& args) : sig_(sig), args_(args) {
    for (const auto& [name, arg] : args) {
      const ApiParam* p = sig.find(name);
      if (p == nullptr) fail(sig.name + "() got an unexpected argument '" + name + "'");
      if (std::holds_alternative<std::monostate>(arg)) {
        if (!p->optional) fail(sig.name + "(): argument '" + name + "' must not be None");
      } else if (std::holds_alternative<TensorMeta>(arg) != (p->kind == ParamKind::kTensor)) {
        fail(sig.name + "(): argument '" + name + "' must be " + std::string(to_string(p->kind)));
      } else if (const auto* s = std::get_if<ScalarValue>(&arg); s != nullptr && !s->conforms_to(*p)) {
        fail(sig.name + "(): argument '" + name + "' must be " + std::string(to_string(p->kind)) + ", not " +
             std::string(to_string(s->kind())));
      }
    }
    for (const auto& p : sig.params) {
      if (!p.optional && args.count(p.name) == 0) fail(sig.name + "() missing required argument '" + p.name + "'");
    }
  }

  const std::string& api() const { return sig_.name; }

  const TensorMeta* tensor(const std::string& name) const {
    auto it = args_.find(name);
    if (it == args_.end()) return nullptr;
    return std::get_if<TensorMeta>(&it->second);
  }
  const TensorMeta& required_tensor(const std::string& name) const {
    const TensorMeta* t = tensor(name);
    if (t == nullptr) fail(api() + "(): argument '" + name + "' must be a tensor");
    return *t;
  }
  const ScalarValue* scalar(const std::string& name) const {
    auto it = args_.find(name);
    if (it == args_.end()) return nullptr;
    const auto* s = std::get_if<ScalarValue>(&it->second);
    return (s == nullptr || s->is_none()) ? nullptr : s;
  }
  std::int64_t int_or(const std::string& name, std::int64_t def) const {
    const ScalarValue* s = scalar(name);
    return s == nullptr ? def : s->as_int();
  }
  double float_or(const std::string& name, double def) const {
    const ScalarValue* s = scalar(name);
    return s == nullptr ? def : s->as_float();
  }
  bool bool_or(const std::string& name, bool def) const {
    const ScalarValue* s = scalar(name);
    return s == nullptr ? def : s->as_bool();
  }
  std::string string_or(const std::string& name, const std::string& def) const {
    const ScalarValue* s = scalar(name);
    return s == nullptr ? def : s->as_string();
  }
  std::optional<std::vector<std::int64_t>> tuple(const std::string& name) const {
    const ScalarValue* s = scalar(name);
    if (s == nullptr) return std::nullopt;
    return s->as_tuple();
  }

 private:
  const ApiSignature& sig_;
  const MetaArgs& args_;
};

template <class T>
struct Local {
  Shape shape;
  std::vector<T> data;
};

template <class T>
class ExecView {
 public:
  ExecView(const MetaView& meta, const Args& args, const ExecContext& ctx) : meta(meta), ctx(ctx) {
    for (const auto& [name, arg] : args) {
      if (const auto* t = std::get_if<TensorValue>(&arg)) {
        Local<T> local;
        local.shape = t->shape();
        local.data.resize(t->size());
        if (t->dtype() == DType::kF32) {
          auto src = t->template data<float>();
          for (size_t i = 0; i < src.size(); ++i) local.data[i] = static_cast<T>(src[i]);
        } else {
          auto src = t->template data<double>();
          for (size_t i = 0; i < src.size(); ++i) local.data[i] = static_cast<T>(src[i]);
        }
        tensors_.emplace(name, std::move(local));
      }
    }
  }

  const Local<T>* tensor(const std::string& name) const {
    auto it = tensors_.find(name);
    return it == tensors_.end() ? nullptr : &it->second;
  }
  const Local<T>& operator[](const std::string& name) const { return *tensor(name); }

  const MetaView& meta;
  const ExecContext& ctx;

 private:
  std::map<std::string, Local<T>> tensors_;
};

// ---------------------------------------------------------------------------
// Operators. Each provides infer() (validation + output meta) and run<T>().

struct Elementwise {
  static TensorMeta infer(const MetaView& m) {
    const auto& a = m.required_tensor("input");
    const auto& b = m.required_tensor("other");
    return {promote({&a, &b}), broadcast_shapes(a.shape, b.shape)};
  }
  template <class T, class F>
  static std::vector<T> apply(const ExecView<T>& v, const TensorMeta& out, F f) {
    const auto& a = v["input"];
    const auto& b = v["other"];
    const auto sa = broadcast_strides(a.shape, out.shape);
    const auto sb = broadcast_strides(b.shape, out.shape);
    const size_t rank = out.shape.size();
    std::vector<T> y(static_cast<size_t>(numel(out.shape)));
    std::vector<std::int64_t> idx(rank, 0);
    std::int64_t oa = 0;
    std::int64_t ob = 0;
    for (size_t i = 0; i < y.size(); ++i) {
      y[i] = f(a.data[static_cast<size_t>(oa)], b.data[static_cast<size_t>(ob)]);
      for (size_t d = rank; d-- > 0;) {
        oa += sa[d];
        ob += sb[d];
        if (++idx[d] < out.shape[d]) break;
        oa -= sa[d] * out.shape[d];
        ob -= sb[d] * out.shape[d];
        idx[d] = 0;
      }
    }
    return y;
  }
};

struct AddOp : Elementwise {
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta& out) {
    return apply(v, out, [](T x, T y) { return x + y; });
  }
};
struct MulOp : Elementwise {
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta& out) {
    return apply(v, out, [](T x, T y) { return x * y; });
  }
};
struct DivOp : Elementwise {
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta& out) {
    return apply(v, out, [](T x, T y) { return x / y; });
  }
};

struct UnaryShape {
  static TensorMeta infer_input(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    return {x.dtype, x.shape};
  }
};

struct ReluOp {
  static TensorMeta infer(const MetaView& m) {
    m.bool_or("inplace", false);
    return UnaryShape::infer_input(m);
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    std::vector<T> y = v["input"].data;
    for (auto& x : y) {
      if (!(x > T(0)) && !std::isnan(x)) x = T(0);
    }
    return y;
  }
};

struct GeluOp {
  static TensorMeta infer(const MetaView& m) {
    const std::string approx = m.string_or("approximate", "none");
    if (approx != "none" && approx != "tanh") fail("gelu(): approximate argument must be either none or tanh.");
    return UnaryShape::infer_input(m);
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    std::vector<T> y = v["input"].data;
    if (v.meta.string_or("approximate", "none") == "tanh") {
      const T k = std::sqrt(T(2) / T(M_PI));
      for (auto& x : y) x = T(0.5) * x * (T(1) + std::tanh(k * (x + T(0.044715) * x * x * x)));
    } else {
      const T inv_sqrt2 = T(1) / std::sqrt(T(2));
      for (auto& x : y) x = T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2));
    }
    return y;
  }
};

struct DropoutOp {
  static TensorMeta infer(const MetaView& m) {
    const double p = m.float_or("p", 0.5);
    if (!(p >= 0.0 && p <= 1.0)) fail("dropout probability has to be between 0 and 1, but got " + fmt_num(p));
    m.bool_or("training", true);
    m.bool_or("inplace", false);
    return UnaryShape::infer_input(m);
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    std::vector<T> y = v["input"].data;
    if (!v.meta.bool_or("training", true)) return y;
    const double p = v.meta.float_or("p", 0.5);
    const CounterStream mask(v.ctx.seed, RngDomain::kDropoutMask, static_cast<std::uint64_t>(v.ctx.node), 0);
    const T scale = p >= 1.0 ? T(0) : T(1) / (T(1) - static_cast<T>(p));
    for (size_t i = 0; i < y.size(); ++i) y[i] = mask.unit(i) < p ? T(0) : y[i] * scale;
    return y;
  }
};

struct FlattenOp {
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    const auto rank = static_cast<std::int64_t>(x.shape.size());
    const auto start = wrap_dim(m.int_or("start_dim", 1), rank, "flatten");
    const auto end = wrap_dim(m.int_or("end_dim", -1), rank, "flatten");
    if (start > end) fail("flatten() has invalid args: start_dim cannot come after end_dim");
    Shape out(x.shape.begin(), x.shape.begin() + start);
    std::int64_t merged = 1;
    for (auto d = start; d <= end; ++d) merged *= x.shape[static_cast<size_t>(d)];
    out.push_back(merged);
    out.insert(out.end(), x.shape.begin() + end + 1, x.shape.end());
    return {x.dtype, out};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    return v["input"].data;
  }
};

struct SoftmaxOp {
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    wrap_dim(m.int_or("dim", -1), static_cast<std::int64_t>(x.shape.size()), "softmax");
    return {x.dtype, x.shape};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    const auto& x = v["input"];
    const auto rank = static_cast<std::int64_t>(x.shape.size());
    const auto dim = static_cast<size_t>(wrap_dim(v.meta.int_or("dim", -1), rank, "softmax"));
    const std::int64_t len = x.shape[dim];
    const std::int64_t inner = strides_of(x.shape)[dim];
    const std::int64_t outer = numel(x.shape) / (len * inner);
    std::vector<T> y(x.data.size());
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t in = 0; in < inner; ++in) {
        const std::int64_t base = o * len * inner + in;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::int64_t k = 0; k < len; ++k) {
          const T val = x.data[static_cast<size_t>(base + k * inner)];
          if (val > mx || std::isnan(val)) mx = val;
        }
        T sum = 0;
        for (std::int64_t k = 0; k < len; ++k) {
          const auto i = static_cast<size_t>(base + k * inner);
          y[i] = std::exp(x.data[i] - mx);
          sum += y[i];
        }
        for (std::int64_t k = 0; k < len; ++k) y[static_cast<size_t>(base + k * inner)] /= sum;
      }
    }
    return y;
  }
};

// Shared by the two pooling ops: [*, H, W] with at least one leading dim.
void require_spatial(const MetaView& m, const TensorMeta& x) {
  if (x.shape.size() != 3 && x.shape.size() != 4) {
    fail(m.api() + "(): Expected 3D or 4D (batch mode) tensor for input, but got " + shape_string(x.shape));
  }
}

struct PoolGeometry {
  std::int64_t kernel, stride, padding, dilation;
  bool ceil_mode;
};

struct MaxPoolOp {
  static PoolGeometry geometry(const MetaView& m) {
    PoolGeometry g{};
    g.kernel = m.int_or("kernel_size", 1);
    g.stride = m.scalar("stride") == nullptr ? g.kernel : m.int_or("stride", g.kernel);
    g.padding = m.int_or("padding", 0);
    g.dilation = m.int_or("dilation", 1);
    g.ceil_mode = m.bool_or("ceil_mode", false);
    return g;
  }
  static std::int64_t out_dim(std::int64_t in, const PoolGeometry& g) {
    const std::int64_t eff = in + 2 * g.padding - g.dilation * (g.kernel - 1) - 1;
    if (eff < 0) return 0;
    std::int64_t out = (g.ceil_mode ? (eff + g.stride - 1) / g.stride : eff / g.stride) + 1;
    // The last window must start inside the input or the left padding.
    if (g.ceil_mode && (out - 1) * g.stride >= in + g.padding) --out;
    return out;
  }
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    require_spatial(m, x);
    const PoolGeometry g = geometry(m);
    if (g.kernel < 1) fail("max_pool2d(): kernel_size must be greater than zero, but got " + std::to_string(g.kernel));
    if (g.stride < 1) fail("max_pool2d(): stride must be greater than zero, but got " + std::to_string(g.stride));
    if (g.dilation < 1) fail("max_pool2d(): dilation must be greater than zero, but got " + std::to_string(g.dilation));
    if (g.padding < 0 || g.padding > g.kernel / 2) {
      fail("max_pool2d(): pad should be at most half of effective kernel size, but got pad=" +
           std::to_string(g.padding) + ", kernel_size=" + std::to_string(g.kernel));
    }
    Shape out = x.shape;
    const size_t r = out.size();
    out[r - 2] = out_dim(x.shape[r - 2], g);
    out[r - 1] = out_dim(x.shape[r - 1], g);
    if (out[r - 2] < 1 || out[r - 1] < 1) {
      fail("max_pool2d(): Given input size " + shape_string(x.shape) + ", calculated output size " +
           shape_string(out) + " is too small");
    }
    return {x.dtype, out};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta& out) {
    const auto& x = v["input"];
    const PoolGeometry g = geometry(v.meta);
    const size_t r = x.shape.size();
    const std::int64_t h = x.shape[r - 2], w = x.shape[r - 1];
    const std::int64_t oh = out.shape[r - 2], ow = out.shape[r - 1];
    const std::int64_t planes = numel(x.shape) / (h * w);
    std::vector<T> y(static_cast<size_t>(planes * oh * ow));
    for (std::int64_t p = 0; p < planes; ++p) {
      for (std::int64_t i = 0; i < oh; ++i) {
        for (std::int64_t j = 0; j < ow; ++j) {
          T mx = -std::numeric_limits<T>::infinity();
          for (std::int64_t ki = 0; ki < g.kernel; ++ki) {
            const std::int64_t hi = i * g.stride - g.padding + ki * g.dilation;
            if (hi < 0 || hi >= h) continue;
            for (std::int64_t kj = 0; kj < g.kernel; ++kj) {
              const std::int64_t wj = j * g.stride - g.padding + kj * g.dilation;
              if (wj < 0 || wj >= w) continue;
              const T val = x.data[static_cast<size_t>((p * h + hi) * w + wj)];
              if (val > mx || std::isnan(val)) mx = val;
            }
          }
          y[static_cast<size_t>((p * oh + i) * ow + j)] = mx;
        }
      }
    }
    return y;
  }
};

struct AdaptiveAvgPoolOp {
  static std::pair<std::int64_t, std::int64_t> target(const MetaView& m) {
    auto t = m.tuple("output_size");
    if (!t || t->empty() || t->size() > 2) fail("adaptive_avg_pool2d(): output_size must be 2");
    const std::int64_t oh = (*t)[0];
    const std::int64_t ow = t->size() == 2 ? (*t)[1] : (*t)[0];
    if (oh < 1 || ow < 1) fail("adaptive_avg_pool2d(): elements of output_size must be greater than or equal to 1");
    return {oh, ow};
  }
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    require_spatial(m, x);
    auto [oh, ow] = target(m);
    Shape out = x.shape;
    out[out.size() - 2] = oh;
    out[out.size() - 1] = ow;
    return {x.dtype, out};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    const auto& x = v["input"];
    auto [oh, ow] = target(v.meta);
    const size_t r = x.shape.size();
    const std::int64_t h = x.shape[r - 2], w = x.shape[r - 1];
    const std::int64_t planes = numel(x.shape) / (h * w);
    std::vector<T> y(static_cast<size_t>(planes * oh * ow));
    for (std::int64_t p = 0; p < planes; ++p) {
      for (std::int64_t i = 0; i < oh; ++i) {
        const std::int64_t h0 = (i * h) / oh, h1 = ((i + 1) * h + oh - 1) / oh;
        for (std::int64_t j = 0; j < ow; ++j) {
          const std::int64_t w0 = (j * w) / ow, w1 = ((j + 1) * w + ow - 1) / ow;
          T sum = 0;
          for (std::int64_t a = h0; a < h1; ++a) {
            for (std::int64_t b = w0; b < w1; ++b) sum += x.data[static_cast<size_t>((p * h + a) * w + b)];
          }
          y[static_cast<size_t>((p * oh + i) * ow + j)] = sum / static_cast<T>((h1 - h0) * (w1 - w0));
        }
      }
    }
    return y;
  }
};

struct MatmulOp {
  struct Plan {
    Shape a_batch, b_batch, batch;
    std::int64_t n, k, m;
    bool a_vec, b_vec;
  };
  static Plan plan(const MetaView& mv) {
    const auto& a = mv.required_tensor("input").shape;
    const auto& b = mv.required_tensor("other").shape;
    if (a.size() == 1 && b.size() == 1) fail("matmul(): both arguments are 1-D; 0-d results are not supported");
    Plan p{};
    p.a_vec = a.size() == 1;
    p.b_vec = b.size() == 1;
    const Shape a2 = p.a_vec ? Shape{1, a[0]} : a;
    const Shape b2 = p.b_vec ? Shape{b[0], 1} : b;
    p.n = a2[a2.size() - 2];
    p.k = a2.back();
    p.m = b2.back();
    if (b2[b2.size() - 2] != p.k) {
      fail("mat1 and mat2 shapes cannot be multiplied (" + std::to_string(p.n) + "x" + std::to_string(p.k) + " and " +
           std::to_string(b2[b2.size() - 2]) + "x" + std::to_string(p.m) + ")");
    }
    p.a_batch.assign(a2.begin(), a2.end() - 2);
    p.b_batch.assign(b2.begin(), b2.end() - 2);
    p.batch = broadcast_shapes(p.a_batch, p.b_batch);
    return p;
  }
  static TensorMeta infer(const MetaView& m) {
    const Plan p = plan(m);
    Shape out = p.batch;
    if (!p.a_vec) out.push_back(p.n);
    if (!p.b_vec) out.push_back(p.m);
    return {promote({&m.required_tensor("input"), &m.required_tensor("other")}), out};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    const Plan p = plan(v.meta);
    const auto& a = v["input"].data;
    const auto& b = v["other"].data;
    const Shape batch = p.batch.empty() ? Shape{1} : p.batch;
    const Shape ab = p.a_batch.empty() ? Shape{1} : p.a_batch;
    const Shape bb = p.b_batch.empty() ? Shape{1} : p.b_batch;
    const auto sa = broadcast_strides(ab, batch);
    const auto sb = broadcast_strides(bb, batch);
    const auto so = strides_of(batch);
    const std::int64_t nb = numel(batch);
    std::vector<T> y(static_cast<size_t>(nb * p.n * p.m));
    for (std::int64_t bi = 0; bi < nb; ++bi) {
      std::int64_t oa = 0, ob = 0, rem = bi;
      for (size_t d = 0; d < batch.size(); ++d) {
        const std::int64_t idx = rem / so[d];
        rem %= so[d];
        oa += idx * sa[d];
        ob += idx * sb[d];
      }
      const T* pa = a.data() + oa * p.n * p.k;
      const T* pb = b.data() + ob * p.k * p.m;
      T* py = y.data() + bi * p.n * p.m;
      for (std::int64_t i = 0; i < p.n; ++i) {
        for (std::int64_t j = 0; j < p.m; ++j) {
          T acc = 0;
          for (std::int64_t t = 0; t < p.k; ++t) acc += pa[i * p.k + t] * pb[t * p.m + j];
          py[i * p.m + j] = acc;
        }
      }
    }
    return y;
  }
};

struct LinearOp {
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    const auto& w = m.required_tensor("weight");
    const TensorMeta* b = m.tensor("bias");
    if (w.shape.size() != 2) fail("linear(): weight must be 2-D, got " + shape_string(w.shape));
    if (x.shape.back() != w.shape[1]) {
      const std::int64_t rows = numel(x.shape) / x.shape.back();
      fail("mat1 and mat2 shapes cannot be multiplied (" + std::to_string(rows) + "x" + std::to_string(x.shape.back()) +
           " and " + std::to_string(w.shape[1]) + "x" + std::to_string(w.shape[0]) + ")");
    }
    if (b != nullptr && (b->shape.size() != 1 || b->shape[0] != w.shape[0])) {
      fail("linear(): bias shape " + shape_string(b->shape) + " does not match out_features " + std::to_string(w.shape[0]));
    }
    Shape out = x.shape;
    out.back() = w.shape[0];
    return {promote({&x, &w, b}), out};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    const auto& x = v["input"];
    const auto& w = v["weight"];
    const Local<T>* b = v.tensor("bias");
    const std::int64_t in = w.shape[1], outf = w.shape[0];
    const std::int64_t rows = numel(x.shape) / in;
    std::vector<T> y(static_cast<size_t>(rows * outf));
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t o = 0; o < outf; ++o) {
        T acc = 0;
        for (std::int64_t k = 0; k < in; ++k) acc += x.data[static_cast<size_t>(r * in + k)] * w.data[static_cast<size_t>(o * in + k)];
        if (b != nullptr) acc += b->data[static_cast<size_t>(o)];
        y[static_cast<size_t>(r * outf + o)] = acc;
      }
    }
    return y;
  }
};

struct Conv2dOp {
  struct Geo {
    std::int64_t stride, padding, dilation, groups;
  };
  static Geo geometry(const MetaView& m) {
    return {m.int_or("stride", 1), m.int_or("padding", 0), m.int_or("dilation", 1), m.int_or("groups", 1)};
  }
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    const auto& w = m.required_tensor("weight");
    const TensorMeta* b = m.tensor("bias");
    const Geo g = geometry(m);
    if (x.shape.size() != 4) fail("conv2d(): Expected 4D (batched) input to conv2d, but got input of size: " + shape_string(x.shape));
    if (w.shape.size() != 4) fail("conv2d(): weight should be 4D, got " + shape_string(w.shape));
    if (g.stride < 1) fail("conv2d(): non-positive stride is not supported");
    if (g.padding < 0) fail("conv2d(): negative padding is not supported");
    if (g.dilation < 1) fail("conv2d(): dilation should be greater than zero");
    if (g.groups < 1) fail("conv2d(): non-positive groups is not supported");
    const std::int64_t c = x.shape[1], o = w.shape[0];
    if (c % g.groups != 0 || o % g.groups != 0) {
      fail("conv2d(): in_channels (" + std::to_string(c) + ") and out_channels (" + std::to_string(o) +
           ") must be divisible by groups (" + std::to_string(g.groups) + ")");
    }
    if (w.shape[1] * g.groups != c) {
      fail("conv2d(): Given groups=" + std::to_string(g.groups) + ", weight of size " + shape_string(w.shape) +
           ", expected input" + shape_string(x.shape) + " to have " + std::to_string(w.shape[1] * g.groups) +
           " channels, but got " + std::to_string(c) + " channels instead");
    }
    if (b != nullptr && (b->shape.size() != 1 || b->shape[0] != o)) {
      fail("conv2d(): bias of size " + shape_string(b->shape) + " does not match out_channels " + std::to_string(o));
    }
    Shape out{x.shape[0], o, 0, 0};
    for (int d = 0; d < 2; ++d) {
      const std::int64_t in = x.shape[2 + static_cast<size_t>(d)];
      const std::int64_t k = w.shape[2 + static_cast<size_t>(d)];
      const std::int64_t eff = in + 2 * g.padding - g.dilation * (k - 1) - 1;
      out[2 + static_cast<size_t>(d)] = eff < 0 ? 0 : eff / g.stride + 1;
    }
    if (out[2] < 1 || out[3] < 1) {
      fail("conv2d(): Calculated padded input size per channel is smaller than the kernel size; output " +
           shape_string(out) + " is too small");
    }
    return {promote({&x, &w, b}), out};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta& out) {
    const auto& x = v["input"];
    const auto& w = v["weight"];
    const Local<T>* b = v.tensor("bias");
    const Geo g = geometry(v.meta);
    const std::int64_t n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3];
    const std::int64_t o = w.shape[0], cg = w.shape[1], kh = w.shape[2], kw = w.shape[3];
    const std::int64_t oh = out.shape[2], ow = out.shape[3];
    const std::int64_t og = o / g.groups;
    std::vector<T> y(static_cast<size_t>(n * o * oh * ow));
    for (std::int64_t bn = 0; bn < n; ++bn) {
      for (std::int64_t oc = 0; oc < o; ++oc) {
        const std::int64_t c0 = (oc / og) * cg;
        for (std::int64_t i = 0; i < oh; ++i) {
          for (std::int64_t j = 0; j < ow; ++j) {
            T acc = 0;
            for (std::int64_t ic = 0; ic < cg; ++ic) {
              for (std::int64_t a = 0; a < kh; ++a) {
                const std::int64_t hi = i * g.stride - g.padding + a * g.dilation;
                if (hi < 0 || hi >= h) continue;
                for (std::int64_t bb = 0; bb < kw; ++bb) {
                  const std::int64_t wj = j * g.stride - g.padding + bb * g.dilation;
                  if (wj < 0 || wj >= wd) continue;
                  acc += x.data[static_cast<size_t>(((bn * c + c0 + ic) * h + hi) * wd + wj)] *
                         w.data[static_cast<size_t>(((oc * cg + ic) * kh + a) * kw + bb)];
                }
              }
            }
            if (b != nullptr) acc += b->data[static_cast<size_t>(oc)];
            y[static_cast<size_t>(((bn * o + oc) * oh + i) * ow + j)] = acc;
          }
        }
      }
    }
    return y;
  }
};

struct BatchNormOp {
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    if (x.shape.size() < 2) fail("batch_norm(): expected at least 2D input, got " + shape_string(x.shape));
    const std::int64_t c = x.shape[1];
    const TensorMeta* per_channel[] = {&m.required_tensor("running_mean"), &m.required_tensor("running_var"),
                                       m.tensor("weight"), m.tensor("bias")};
    const char* names[] = {"running_mean", "running_var", "weight", "bias"};
    for (int i = 0; i < 4; ++i) {
      const TensorMeta* t = per_channel[i];
      if (t != nullptr && numel(t->shape) != c) {
        fail(std::string("batch_norm(): ") + names[i] + " should contain " + std::to_string(c) +
             " elements not " + std::to_string(numel(t->shape)));
      }
    }
    if (m.bool_or("training", false)) fail("batch_norm(): training-mode statistics are not supported; training must be False");
    m.float_or("momentum", 0.1);
    if (m.float_or("eps", 1e-5) < 0) fail("batch_norm(): eps must be non-negative");
    return {promote({&x, per_channel[0], per_channel[1], per_channel[2], per_channel[3]}), x.shape};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    const auto& x = v["input"];
    const auto& mean = v["running_mean"].data;
    const auto& var = v["running_var"].data;
    const Local<T>* w = v.tensor("weight");
    const Local<T>* b = v.tensor("bias");
    const T eps = static_cast<T>(v.meta.float_or("eps", 1e-5));
    const std::int64_t c = x.shape[1];
    const std::int64_t inner = numel(x.shape) / (x.shape[0] * c);
    std::vector<T> y(x.data.size());
    for (size_t i = 0; i < y.size(); ++i) {
      const auto ch = static_cast<size_t>((static_cast<std::int64_t>(i) / inner) % c);
      T val = (x.data[i] - mean[ch]) / std::sqrt(var[ch] + eps);
      if (w != nullptr) val *= w->data[ch];
      if (b != nullptr) val += b->data[ch];
      y[i] = val;
    }
    return y;
  }
};

struct LayerNormOp {
  static TensorMeta infer(const MetaView& m) {
    const auto& x = m.required_tensor("input");
    const auto ns = m.tuple("normalized_shape").value_or(std::vector<std::int64_t>{});
    const bool ok = !ns.empty() && ns.size() <= x.shape.size() &&
                    std::equal(ns.begin(), ns.end(), x.shape.end() - static_cast<std::ptrdiff_t>(ns.size()));
    if (!ok) {
      fail("layer_norm(): Given normalized_shape=" + shape_string(ns) + ", expected input with shape [*, " +
           shape_string(ns).substr(1) + ", but got input of size" + shape_string(x.shape));
    }
    const TensorMeta* w = m.tensor("weight");
    const TensorMeta* b = m.tensor("bias");
    for (const TensorMeta* t : {w, b}) {
      if (t != nullptr && t->shape != Shape(ns.begin(), ns.end())) {
        fail("layer_norm(): Expected weight/bias to be of same shape as normalized_shape, but got " +
             shape_string(t->shape) + " and normalized_shape = " + shape_string(ns));
      }
    }
    if (m.float_or("eps", 1e-5) < 0) fail("layer_norm(): eps must be non-negative");
    return {promote({&x, w, b}), x.shape};
  }
  template <class T>
  static std::vector<T> run(const ExecView<T>& v, const TensorMeta&) {
    const auto& x = v["input"];
    const Local<T>* w = v.tensor("weight");
    const Local<T>* b = v.tensor("bias");
    const auto ns = *v.meta.tuple("normalized_shape");
    const T eps = static_cast<T>(v.meta.float_or("eps", 1e-5));
    const std::int64_t len = numel(Shape(ns.begin(), ns.end()));
    const std::int64_t rows = numel(x.shape) / len;
    std::vector<T> y(x.data.size());
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* row = x.data.data() + r * len;
      T mean = 0;
      for (std::int64_t k = 0; k < len; ++k) mean += row[k];
      mean /= static_cast<T>(len);
      T var = 0;
      for (std::int64_t k = 0; k < len; ++k) var += (row[k] - mean) * (row[k] - mean);
      var /= static_cast<T>(len);
      const T inv = T(1) / std::sqrt(var + eps);
      for (std::int64_t k = 0; k < len; ++k) {
        T val = (row[k] - mean) * inv;
        if (w != nullptr) val *= w->data[static_cast<size_t>(k)];
        if (b != nullptr) val += b->data[static_cast<size_t>(k)];
        y[static_cast<size_t>(r * len + k)] = val;
      }
    }
    return y;
  }
};

// ---------------------------------------------------------------------------

struct KernelEntry {
  const char* api;
  TensorMeta (*infer)(const MetaView&);
  std::vector<float> (*run32)(const ExecView<float>&, const TensorMeta&);
  std::vector<double> (*run64)(const ExecView<double>&, const TensorMeta&);
};

template <class Op>
constexpr KernelEntry entry(const char* api) {
  return {api, &Op::infer, &Op::template run<float>, &Op::template run<double>};
}

const KernelEntry kKernels[] = {
    entry<FlattenOp>("flatten"),
    entry<MulOp>("__mul__"),
    entry<DivOp>("div"),
    entry<SoftmaxOp>("softmax"),
    entry<AdaptiveAvgPoolOp>("adaptive_avg_pool2d"),
    entry<MatmulOp>("matmul"),
    entry<MaxPoolOp>("max_pool2d"),
    entry<BatchNormOp>("batch_norm"),
    entry<DropoutOp>("dropout"),
    entry<ReluOp>("relu"),
    entry<Conv2dOp>("conv2d"),
    entry<GeluOp>("gelu"),
    entry<LinearOp>("linear"),
    entry<LayerNormOp>("layer_norm"),
    entry<AddOp>("__add__"),
};

const KernelEntry& kernel_for(const std::string& api) {
  for (const auto& k : kKernels) {
    if (api == k.api) return k;
  }
  fail("no reference kernel for api '" + api + "'");
}

const ApiSignature& signature_for(const std::string& api) {
  const ApiSignature* sig = ApiRegistry::instance().find(api);
  if (sig == nullptr) fail("unknown api '" + api + "'");
  return *sig;
}

}  // namespace

void validate(const std::string& api, const MetaArgs& args) { infer_output(api, args); }

TensorMeta infer_output(const std::string& api, const MetaArgs& args) {
  const MetaView view(signature_for(api), args);
  return kernel_for(api).infer(view);
}

TensorValue execute_node(const std::string& api, const Args& args, DType precision, const ExecContext& ctx) {
  const MetaArgs meta = meta_of(args);
  const MetaView view(signature_for(api), meta);
  const KernelEntry& k = kernel_for(api);
  const TensorMeta out = k.infer(view);
  if (precision == DType::kF32) {
    return TensorValue(out.shape, k.run32(ExecView<float>(view, args, ctx), out));
  }
  return TensorValue(out.shape, k.run64(ExecView<double>(view, args, ctx), out));
}

}  // namespace subdiff

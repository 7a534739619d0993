// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "subdiff/tensor.hpp"

#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "subdiff/errors.hpp"

namespace subdiff {

static_assert(std::endian::native == std::endian::little, "payload encoding assumes a little-endian host");

std::string_view to_string(DType dtype) { return dtype == DType::kF32 ? "f32" : "f64"; }

DType parse_dtype(std::string_view s) {
  if (s == "f32" || s == "float32") return DType::kF32;
  if (s == "f64" || s == "float64") return DType::kF64;
  throw ParseError("unsupported dtype '" + std::string(s) + "'");
}

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape, size_t len) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must be nonempty");
  for (auto d : shape) {
    if (d < 1) throw std::invalid_argument("tensor dims must be >= 1, got " + shape_string(shape));
  }
  if (static_cast<size_t>(numel(shape)) != len) {
    throw std::invalid_argument("tensor data length " + std::to_string(len) +
                                " does not match shape " + shape_string(shape));
  }
}

}  // namespace

TensorValue::TensorValue(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_, size());
}

TensorValue::TensorValue(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_, size());
}

TensorValue TensorValue::zeros(DType dtype, Shape shape) {
  const auto n = static_cast<size_t>(numel(shape));
  if (dtype == DType::kF32) return TensorValue(std::move(shape), std::vector<float>(n, 0.0f));
  return TensorValue(std::move(shape), std::vector<double>(n, 0.0));
}

size_t TensorValue::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data_);
}

double TensorValue::at(size_t i) const {
  return std::visit([i](const auto& v) { return static_cast<double>(v[i]); }, data_);
}

TensorValue TensorValue::cast(DType dtype) const {
  if (dtype == this->dtype()) return *this;
  if (dtype == DType::kF64) {
    const auto& src = std::get<std::vector<float>>(data_);
    return TensorValue(shape_, std::vector<double>(src.begin(), src.end()));
  }
  const auto& src = std::get<std::vector<double>>(data_);
  std::vector<float> out(src.size());
  for (size_t i = 0; i < src.size(); ++i) out[i] = static_cast<float>(src[i]);
  return TensorValue(shape_, std::move(out));
}

bool TensorValue::bit_equal(const TensorValue& other) const {
  if (dtype() != other.dtype() || shape_ != other.shape_) return false;
  return std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        const auto& w = std::get<V>(other.data_);
        return std::memcmp(v.data(), w.data(), v.size() * sizeof(typename V::value_type)) == 0;
      },
      data_);
}

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    const auto b1 = static_cast<unsigned char>(bytes[i + 1]);
    const auto b2 = static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[b0 >> 2];
    out += kAlphabet[((b0 & 0x3) << 4) | (b1 >> 4)];
    out += kAlphabet[((b1 & 0xf) << 2) | (b2 >> 6)];
    out += kAlphabet[b2 & 0x3f];
  }
  if (i + 1 == bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    out += kAlphabet[b0 >> 2];
    out += kAlphabet[(b0 & 0x3) << 4];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    const auto b1 = static_cast<unsigned char>(bytes[i + 1]);
    out += kAlphabet[b0 >> 2];
    out += kAlphabet[((b0 & 0x3) << 4) | (b1 >> 4)];
    out += kAlphabet[(b1 & 0xf) << 2];
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ParseError("base64 payload length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + static_cast<size_t>(k)];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0 || (v[k] = decode_char(c)) < 0) throw ParseError("invalid base64 payload");
    }
    const unsigned n = (static_cast<unsigned>(v[0]) << 18) | (static_cast<unsigned>(v[1]) << 12) |
                       (static_cast<unsigned>(v[2]) << 6) | static_cast<unsigned>(v[3]);
    out += static_cast<char>((n >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((n >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(n & 0xff);
  }
  return out;
}

std::string tensor_to_base64(const TensorValue& t) {
  if (t.dtype() == DType::kF32) {
    auto d = t.data<float>();
    return base64_encode({reinterpret_cast<const char*>(d.data()), d.size_bytes()});
  }
  auto d = t.data<double>();
  return base64_encode({reinterpret_cast<const char*>(d.data()), d.size_bytes()});
}

TensorValue tensor_from_base64(DType dtype, const Shape& shape, std::string_view b64) {
  const std::string bytes = base64_decode(b64);
  const size_t width = dtype == DType::kF32 ? sizeof(float) : sizeof(double);
  if (shape.empty() || bytes.size() != static_cast<size_t>(numel(shape)) * width) {
    throw ParseError("tensor payload of " + std::to_string(bytes.size()) +
                     " bytes does not match header " + std::string(to_string(dtype)) + " " +
                     shape_string(shape));
  }
  try {
    if (dtype == DType::kF32) {
      std::vector<float> data(bytes.size() / width);
      std::memcpy(data.data(), bytes.data(), bytes.size());
      return TensorValue(shape, std::move(data));
    }
    std::vector<double> data(bytes.size() / width);
    std::memcpy(data.data(), bytes.data(), bytes.size());
    return TensorValue(shape, std::move(data));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

}  // namespace subdiff

// SPDX-FileCopyrightText: Copyright (c) 2026 The subdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace subdiff {

enum class DType { kF32, kF64 };

std::string_view to_string(DType dtype);
DType parse_dtype(std::string_view s);  // "f32" | "f64"; throws ParseError

using Shape = std::vector<std::int64_t>;

std::int64_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor of f32 or f64 values.
class TensorValue {
 public:
  TensorValue() = default;
  TensorValue(Shape shape, std::vector<float> data);
  TensorValue(Shape shape, std::vector<double> data);

  static TensorValue zeros(DType dtype, Shape shape);

  DType dtype() const { return std::holds_alternative<std::vector<float>>(data_) ? DType::kF32 : DType::kF64; }
  const Shape& shape() const { return shape_; }
  size_t size() const;
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }

  // Element `i` widened to double.
  double at(size_t i) const;

  template <class T>
  std::span<const T> data() const {
    return std::get<std::vector<T>>(data_);
  }
  template <class T>
  std::span<T> data() {
    return std::get<std::vector<T>>(data_);
  }

  TensorValue cast(DType dtype) const;

  // Elementwise bit-identical (NaN payloads included) with equal dtype/shape.
  bool bit_equal(const TensorValue& other) const;

 private:
  Shape shape_;
  std::variant<std::vector<float>, std::vector<double>> data_;
};

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);  // throws ParseError

// Little-endian flat payload of the tensor's data, base64-encoded.
std::string tensor_to_base64(const TensorValue& t);
TensorValue tensor_from_base64(DType dtype, const Shape& shape, std::string_view b64);

}  // namespace subdiff

// Copyright 2026 The rdoae Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rdoae/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "rdoae/error.hpp"

namespace rdoae {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(product(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != product(shape_)) {
    throw ShapeError("tensor of shape " + shape_string(shape_) + " given " +
                     std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1, 1}, {value}); }

Tensor Tensor::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows in Tensor::from_rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  if (shape_.size() == 1) return 1;
  if (shape_.empty()) return 1;
  throw ShapeError("rows() on tensor of rank " + std::to_string(rank()));
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  if (shape_.empty()) return 1;
  throw ShapeError("cols() on tensor of rank " + std::to_string(rank()));
}

std::span<const double> Tensor::row_span(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(values_).subspan(r * c, c);
}

std::span<double> Tensor::row_span(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(values_).subspan(r * c, c);
}

Tensor Tensor::row_copy(std::size_t r) const {
  auto span = row_span(r);
  return Tensor::row(std::vector<double>(span.begin(), span.end()));
}

Tensor Tensor::select_rows(std::span<const std::size_t> index) const {
  const std::size_t c = cols();
  Tensor out = matrix(index.size(), c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= rows()) throw ShapeError("select_rows index out of range");
    auto src = row_span(index[i]);
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  return out;
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  }
  return values_[0];
}

void ParamStore::add(const std::string& name, Tensor value) {
  if (tensors_.count(name)) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  names_.push_back(name);
  tensors_.emplace(name, std::move(value));
}

bool ParamStore::contains(const std::string& name) const {
  return tensors_.count(name) != 0;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw ConfigError("unknown parameter '" + name + "'");
  }
  return it->second;
}

void ParamStore::set(const std::string& name, Tensor value) {
  Tensor& slot = mutable_ref(name);
  if (slot.shape() != value.shape()) {
    throw ShapeError("parameter '" + name + "' has shape " +
                     shape_string(slot.shape()) + ", got " +
                     shape_string(value.shape()));
  }
  slot = std::move(value);
}

Tensor& ParamStore::mutable_ref(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw ConfigError("unknown parameter '" + name + "'");
  }
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

bool ParamStore::operator==(const ParamStore& other) const {
  return names_ == other.names_ && tensors_ == other.tensors_;
}

}  // namespace rdoae

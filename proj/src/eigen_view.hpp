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

// Internal: zero-copy Eigen views over Tensor storage.

#ifndef RDOAE_SRC_EIGEN_VIEW_HPP_
#define RDOAE_SRC_EIGEN_VIEW_HPP_

#include <Eigen/Dense>

#include "rdoae/tensor.hpp"

namespace rdoae::detail {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Eigen::Map<RowMat> view(Tensor& t) {
  return Eigen::Map<RowMat>(t.data(), static_cast<Eigen::Index>(t.rows()),
                            static_cast<Eigen::Index>(t.cols()));
}

inline Eigen::Map<const RowMat> view(const Tensor& t) {
  return Eigen::Map<const RowMat>(t.data(),
                                  static_cast<Eigen::Index>(t.rows()),
                                  static_cast<Eigen::Index>(t.cols()));
}

inline Tensor to_tensor(const RowMat& m) {
  Tensor t = Tensor::matrix(static_cast<std::size_t>(m.rows()),
                            static_cast<std::size_t>(m.cols()));
  view(t) = m;
  return t;
}

template <typename Derived>
Tensor to_tensor(const Eigen::MatrixBase<Derived>& m) {
  Tensor t = Tensor::matrix(static_cast<std::size_t>(m.rows()),
                            static_cast<std::size_t>(m.cols()));
  view(t) = m;
  return t;
}

}  // namespace rdoae::detail

#endif  // RDOAE_SRC_EIGEN_VIEW_HPP_

// Copyright 2026 The AMUN Toolkit Authors.
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

#ifndef AMUN_SOFTMAX_HPP_
#define AMUN_SOFTMAX_HPP_

#include <cmath>

#include <Eigen/Dense>

namespace amun {

template <typename Derived>
typename Derived::Scalar LogSumExp(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = z.maxCoeff();
  return top + std::log((z.array() - top).exp().sum());
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> Softmax(
    const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = z.maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = (z.array() - top).exp().matrix();
  return e / e.sum();
}

// Row-wise softmax of an n x m logit matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
RowSoftmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> p =
      (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

// Row-wise log-sum-exp of an n x m logit matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> RowLogSumExp(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> top = logits.rowwise().maxCoeff();
  return top.array() +
         (logits.colwise() - top).array().exp().rowwise().sum().log();
}

}  // namespace amun

#endif  // AMUN_SOFTMAX_HPP_

// Copyright 2026 The lpx Authors
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

#pragma once

#include <cmath>

#include "lpx/graph.hpp"

namespace lpx::detail {

// Adam state for one parameter matrix.
struct Adam {
  explicit Adam(double rate) : lr(rate) {}

  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int t = 0;
  Matrix m1;
  Matrix m2;

  void step(Matrix& param, const Matrix& grad) {
    if (m1.size() == 0) {
      m1 = Matrix::Zero(param.rows(), param.cols());
      m2 = Matrix::Zero(param.rows(), param.cols());
    }
    ++t;
    m1 = beta1 * m1 + (1.0 - beta1) * grad;
    m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    param.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
  }
};

}  // namespace lpx::detail

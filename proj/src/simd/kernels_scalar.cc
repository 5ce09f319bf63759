// Copyright 2026 The memelens Authors.
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

#include "memelens/simd/kernels.h"

namespace memelens::simd {
namespace {

double DotScalar(const double *a, const double *b, size_t n) {
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void AxpyScalar(double alpha, const double *x, double *y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void GemvScalar(const double *a, size_t rows, size_t cols, const double *x,
                double *y) {
  for (size_t r = 0; r < rows; ++r) y[r] += DotScalar(a + r * cols, x, cols);
}

void GerScalar(const double *u, size_t rows, const double *v, size_t cols,
               double *a) {
  for (size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) AxpyScalar(u[r], v, a + r * cols, cols);
  }
}

}  // namespace

const KernelTable &ScalarKernels() {
  static const KernelTable table{Isa::kScalar, DotScalar, AxpyScalar,
                                 GemvScalar, GerScalar};
  return table;
}

}  // namespace memelens::simd

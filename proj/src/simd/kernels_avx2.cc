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

// This translation unit is compiled with -mavx2 -mfma. Nothing here may run
// unless the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include "memelens/simd/kernels.h"

namespace memelens::simd {
namespace {

inline double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double DotAvx2(const double *a, const double *b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    i += 4;
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void AxpyAvx2(double alpha, const double *x, double *y, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four rows per pass so each load of x feeds four accumulators.
void GemvAvx2(const double *a, size_t rows, size_t cols, const double *x,
              double *y) {
  size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double *r0 = a + r * cols;
    const double *r1 = r0 + cols;
    const double *r2 = r1 + cols;
    const double *r3 = r2 + cols;
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d vx = _mm256_loadu_pd(x + c);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + c), vx, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + c), vx, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + c), vx, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + c), vx, s3);
    }
    double t0 = HorizontalSum(s0);
    double t1 = HorizontalSum(s1);
    double t2 = HorizontalSum(s2);
    double t3 = HorizontalSum(s3);
    for (; c < cols; ++c) {
      t0 += r0[c] * x[c];
      t1 += r1[c] * x[c];
      t2 += r2[c] * x[c];
      t3 += r3[c] * x[c];
    }
    y[r] += t0;
    y[r + 1] += t1;
    y[r + 2] += t2;
    y[r + 3] += t3;
  }
  for (; r < rows; ++r) y[r] += DotAvx2(a + r * cols, x, cols);
}

void GerAvx2(const double *u, size_t rows, const double *v, size_t cols,
             double *a) {
  for (size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) AxpyAvx2(u[r], v, a + r * cols, cols);
  }
}

}  // namespace

const KernelTable *Avx2Kernels() {
  static const KernelTable table{Isa::kAvx2, DotAvx2, AxpyAvx2, GemvAvx2,
                                 GerAvx2};
  return &table;
}

}  // namespace memelens::simd

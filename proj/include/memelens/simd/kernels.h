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

#ifndef MEMELENS_SIMD_KERNELS_H_
#define MEMELENS_SIMD_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision kernels used by the recurrent model. Each kernel has
// a scalar reference implementation and, where the CPU supports it, an AVX2
// variant. The variant is picked once at first use; MEMELENS_SIMD=scalar|avx2
// overrides the choice.

namespace memelens::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  // Returns sum_i a[i] * b[i].
  double (*dot)(const double *a, const double *b, size_t n);
  // y[i] += alpha * x[i].
  void (*axpy)(double alpha, const double *x, double *y, size_t n);
  // y[r] += sum_c a[r * cols + c] * x[c] for r < rows.
  void (*gemv)(const double *a, size_t rows, size_t cols, const double *x,
               double *y);
  // a[r * cols + c] += u[r] * v[c].
  void (*ger)(const double *u, size_t rows, const double *v, size_t cols,
              double *a);
};

const KernelTable &ScalarKernels();

// Null when the binary was built without AVX2 support.
const KernelTable *Avx2Kernels();

bool IsaSupported(Isa isa);
std::string_view IsaName(Isa isa);

// The table used by the library. Thread-safe.
const KernelTable &Active();

// Span conveniences over Active(). Sizes are checked with assert only.
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
void Gemv(std::span<const double> a, size_t rows, size_t cols,
          std::span<const double> x, std::span<double> y);
void Ger(std::span<const double> u, std::span<const double> v,
         std::span<double> a);

}  // namespace memelens::simd

#endif  // MEMELENS_SIMD_KERNELS_H_

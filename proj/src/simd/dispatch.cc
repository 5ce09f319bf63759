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

#include <cassert>
#include <cstdlib>
#include <string>

#include "memelens/simd/kernels.h"

namespace memelens::simd {

#ifndef MEMELENS_HAVE_AVX2
const KernelTable *Avx2Kernels() { return nullptr; }
#endif

bool IsaSupported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(MEMELENS_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

namespace {

const KernelTable &Select() {
  const char *env = std::getenv("MEMELENS_SIMD");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return ScalarKernels();
  if (IsaSupported(Isa::kAvx2) && (choice == "auto" || choice == "avx2")) {
    return *Avx2Kernels();
  }
  return ScalarKernels();
}

}  // namespace

const KernelTable &Active() {
  static const KernelTable &table = Select();
  return table;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return Active().dot(a.data(), b.data(), a.size());
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  Active().axpy(alpha, x.data(), y.data(), x.size());
}

void Gemv(std::span<const double> a, size_t rows, size_t cols,
          std::span<const double> x, std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
  Active().gemv(a.data(), rows, cols, x.data(), y.data());
}

void Ger(std::span<const double> u, std::span<const double> v,
         std::span<double> a) {
  assert(a.size() == u.size() * v.size());
  Active().ger(u.data(), u.size(), v.data(), v.size(), a.data());
}

}  // namespace memelens::simd

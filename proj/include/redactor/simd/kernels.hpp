// Word-parallel Boolean kernels used by the bit-parallel simulator.
//
// Each lane of a uint64_t word is one simulation vector. Every kernel has a
// portable scalar reference and, on x86-64, an AVX2 variant; active() picks the
// best variant the running CPU supports (override with REDACTOR_SIMD=scalar).
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace redactor::simd {

using Word = std::uint64_t;

struct KernelTable {
  std::string_view name;
  void (*and2)(Word* dst, const Word* a, const Word* b, std::size_t n);
  void (*or2)(Word* dst, const Word* a, const Word* b, std::size_t n);
  void (*xor2)(Word* dst, const Word* a, const Word* b, std::size_t n);
  void (*not1)(Word* dst, const Word* a, std::size_t n);
  // dst = sel ? b : a, lane-wise
  void (*mux2)(Word* dst, const Word* sel, const Word* a, const Word* b, std::size_t n);
  // Number of set bits in (a ^ b).
  std::uint64_t (*popcount_xor)(const Word* a, const Word* b, std::size_t n);
  // Index of the first word where a != b, or n when equal.
  std::size_t (*first_diff)(const Word* a, const Word* b, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels();
const KernelTable& active();

}  // namespace redactor::simd

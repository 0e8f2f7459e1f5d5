// AVX2 variants. This translation unit is compiled with -mavx2 on x86-64; the
// table is only handed out after a runtime CPU check.
#include "redactor/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>

#include <bit>

namespace redactor::simd {
namespace {

inline __m256i load(const Word* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); }
inline void store(Word* p, __m256i v) { _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v); }

void and2(Word* d, const Word* a, const Word* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) store(d + i, _mm256_and_si256(load(a + i), load(b + i)));
  for (; i < n; ++i) d[i] = a[i] & b[i];
}
void or2(Word* d, const Word* a, const Word* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) store(d + i, _mm256_or_si256(load(a + i), load(b + i)));
  for (; i < n; ++i) d[i] = a[i] | b[i];
}
void xor2(Word* d, const Word* a, const Word* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) store(d + i, _mm256_xor_si256(load(a + i), load(b + i)));
  for (; i < n; ++i) d[i] = a[i] ^ b[i];
}
void not1(Word* d, const Word* a, std::size_t n) {
  const __m256i ones = _mm256_set1_epi64x(-1);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) store(d + i, _mm256_xor_si256(load(a + i), ones));
  for (; i < n; ++i) d[i] = ~a[i];
}
void mux2(Word* d, const Word* s, const Word* a, const Word* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i sv = load(s + i);
    store(d + i, _mm256_or_si256(_mm256_andnot_si256(sv, load(a + i)), _mm256_and_si256(sv, load(b + i))));
  }
  for (; i < n; ++i) d[i] = (a[i] & ~s[i]) | (b[i] & s[i]);
}

// Nibble-lookup popcount (Mula), accumulated with SAD into 64-bit lanes.
std::uint64_t popcount_xor(const Word* a, const Word* b, std::size_t n) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1, 2,
                                       2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i v = _mm256_xor_si256(load(a + i), load(b + i));
    const __m256i lo = _mm256_shuffle_epi8(lut, _mm256_and_si256(v, low));
    const __m256i hi = _mm256_shuffle_epi8(lut, _mm256_and_si256(_mm256_srli_epi16(v, 4), low));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(_mm256_add_epi8(lo, hi), _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] ^ b[i]));
  return total;
}

std::size_t first_diff(const Word* a, const Word* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i eq = _mm256_cmpeq_epi64(load(a + i), load(b + i));
    const int mask = _mm256_movemask_pd(_mm256_castsi256_pd(eq));
    if (mask != 0xF) return i + static_cast<std::size_t>(std::countr_one(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i)
    if (a[i] != b[i]) return i;
  return n;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2");
  static const KernelTable table{"avx2", and2, or2, xor2, not1, mux2, popcount_xor, first_diff};
  return supported ? &table : nullptr;
}

}  // namespace redactor::simd

#else

namespace redactor::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace redactor::simd

#endif

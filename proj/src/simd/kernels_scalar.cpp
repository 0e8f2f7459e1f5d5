#include <bit>
#include <cstdlib>
#include <string_view>

#include "redactor/simd/kernels.hpp"

namespace redactor::simd {
namespace {

void and2(Word* d, const Word* a, const Word* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] & b[i];
}
void or2(Word* d, const Word* a, const Word* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] | b[i];
}
void xor2(Word* d, const Word* a, const Word* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] ^ b[i];
}
void not1(Word* d, const Word* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) d[i] = ~a[i];
}
void mux2(Word* d, const Word* s, const Word* a, const Word* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) d[i] = (a[i] & ~s[i]) | (b[i] & s[i]);
}
std::uint64_t popcount_xor(const Word* a, const Word* b, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] ^ b[i]));
  return total;
}
std::size_t first_diff(const Word* a, const Word* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] != b[i]) return i;
  return n;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", and2, or2, xor2, not1, mux2, popcount_xor, first_diff};
  return table;
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("REDACTOR_SIMD");
    if (env && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* avx = avx2_kernels()) return avx;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace redactor::simd

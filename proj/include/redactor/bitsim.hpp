// Two-valued bit-parallel simulator for acyclic netlists: each net carries
// `words` 64-bit words, one vector per bit lane.
#pragma once

#include <span>
#include <vector>

#include "redactor/netlist.hpp"
#include "redactor/simd/kernels.hpp"

namespace redactor {

class BitSimulator {
 public:
  /// Throws Error when the netlist has a combinational loop.
  BitSimulator(const Netlist& n, std::size_t words, const simd::KernelTable& kernels = simd::active());

  [[nodiscard]] std::size_t words() const { return words_; }
  [[nodiscard]] std::span<simd::Word> net(NetId id) { return {data_.data() + id * words_, words_}; }
  [[nodiscard]] std::span<const simd::Word> net(NetId id) const { return {data_.data() + id * words_, words_}; }

  /// Evaluates all cells from the current source nets (inputs and DFF outputs).
  void run();

 private:
  const Netlist& netlist_;
  std::size_t words_;
  const simd::KernelTable& k_;
  std::vector<CellId> order_;
  std::vector<simd::Word> data_;
  std::vector<simd::Word> scratch_;
};

/// Fills `words` with the lane pattern of bit `bit` of the vector index, for
/// vectors starting at `base` (base must be a multiple of 64).
void fill_counter_pattern(std::span<simd::Word> words, unsigned bit, std::uint64_t base);

}  // namespace redactor

#include "redactor/bitsim.hpp"

#include <algorithm>

#include "redactor/graph.hpp"

namespace redactor {

BitSimulator::BitSimulator(const Netlist& n, std::size_t words, const simd::KernelTable& kernels)
    : netlist_(n), words_(words), k_(kernels), order_(topological_order(n)), data_(n.num_nets() * words, 0) {
  std::erase_if(order_, [&](CellId c) { return n.cell(c).kind == CellKind::Dff; });
  scratch_.resize(words * 2 * (1u << kMaxLutInputs));
}

void BitSimulator::run() {
  using simd::Word;
  const std::size_t w = words_;
  for (CellId id : order_) {
    const Cell& c = netlist_.cell(id);
    Word* out = data_.data() + c.output * w;
    auto in = [&](std::size_t i) { return static_cast<const Word*>(data_.data() + c.inputs[i] * w); };
    switch (c.kind) {
      case CellKind::Buf: std::copy_n(in(0), w, out); break;
      case CellKind::Not: k_.not1(out, in(0), w); break;
      case CellKind::And:
      case CellKind::Nand:
        std::copy_n(in(0), w, out);
        for (std::size_t i = 1; i < c.inputs.size(); ++i) k_.and2(out, out, in(i), w);
        if (c.kind == CellKind::Nand) k_.not1(out, out, w);
        break;
      case CellKind::Or:
      case CellKind::Nor:
        std::copy_n(in(0), w, out);
        for (std::size_t i = 1; i < c.inputs.size(); ++i) k_.or2(out, out, in(i), w);
        if (c.kind == CellKind::Nor) k_.not1(out, out, w);
        break;
      case CellKind::Xor:
      case CellKind::Xnor:
        std::copy_n(in(0), w, out);
        for (std::size_t i = 1; i < c.inputs.size(); ++i) k_.xor2(out, out, in(i), w);
        if (c.kind == CellKind::Xnor) k_.not1(out, out, w);
        break;
      case CellKind::Mux2: k_.mux2(out, in(0), in(1), in(2), w); break;
      case CellKind::Const0: std::fill_n(out, w, Word{0}); break;
      case CellKind::Const1: std::fill_n(out, w, ~Word{0}); break;
      case CellKind::Lut: {
        // Mux tree: level i halves the table using input i as select.
        const std::size_t k = c.inputs.size();
        std::size_t count = std::size_t{1} << k;
        Word* level = scratch_.data();
        for (std::size_t r = 0; r < count; ++r)
          std::fill_n(level + r * w, w, ((c.table >> r) & 1) ? ~Word{0} : Word{0});
        for (std::size_t i = 0; i < k; ++i) {
          count /= 2;
          for (std::size_t r = 0; r < count; ++r)
            k_.mux2(level + r * w, in(i), level + (2 * r) * w, level + (2 * r + 1) * w, w);
        }
        std::copy_n(level, w, out);
        break;
      }
      case CellKind::Dff: break;
    }
  }
}

void fill_counter_pattern(std::span<simd::Word> words, unsigned bit, std::uint64_t base) {
  static constexpr simd::Word kLow[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                                         0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (bit < 6) {
      words[i] = kLow[bit];
    } else {
      const std::uint64_t index = base + i * 64;
      words[i] = ((index >> bit) & 1) ? ~simd::Word{0} : simd::Word{0};
    }
  }
}

}  // namespace redactor

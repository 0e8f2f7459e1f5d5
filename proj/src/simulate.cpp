#include "redactor/simulate.hpp"

#include <algorithm>

#include "redactor/graph.hpp"

namespace redactor {

char logic_char(Logic v) {
  switch (v) {
    case Logic::Zero: return '0';
    case Logic::One: return '1';
    default: return 'X';
  }
}

namespace {

Logic lnot(Logic a) { return a == Logic::X ? Logic::X : to_logic(a == Logic::Zero); }

Logic land(std::span<const Logic> in) {
  bool any_x = false;
  for (Logic v : in) {
    if (v == Logic::Zero) return Logic::Zero;
    any_x |= v == Logic::X;
  }
  return any_x ? Logic::X : Logic::One;
}

Logic lor(std::span<const Logic> in) {
  bool any_x = false;
  for (Logic v : in) {
    if (v == Logic::One) return Logic::One;
    any_x |= v == Logic::X;
  }
  return any_x ? Logic::X : Logic::Zero;
}

Logic lxor(std::span<const Logic> in) {
  bool acc = false;
  for (Logic v : in) {
    if (v == Logic::X) return Logic::X;
    acc ^= v == Logic::One;
  }
  return to_logic(acc);
}

// A LUT output is defined when every table entry compatible with the known
// inputs agrees.
Logic llut(std::uint64_t table, std::span<const Logic> in) {
  std::uint32_t fixed = 0, x_mask = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == Logic::One) fixed |= 1u << i;
    if (in[i] == Logic::X) x_mask |= 1u << i;
  }
  const bool first = (table >> fixed) & 1;
  // Enumerate subsets of x_mask.
  for (std::uint32_t sub = x_mask;; sub = (sub - 1) & x_mask) {
    if (((table >> (fixed | sub)) & 1) != first) return Logic::X;
    if (sub == 0) break;
  }
  return to_logic(first);
}

}  // namespace

Logic eval_cell(const Cell& cell, std::span<const Logic> in) {
  switch (cell.kind) {
    case CellKind::Buf: return in[0];
    case CellKind::Not: return lnot(in[0]);
    case CellKind::And: return land(in);
    case CellKind::Nand: return lnot(land(in));
    case CellKind::Or: return lor(in);
    case CellKind::Nor: return lnot(lor(in));
    case CellKind::Xor: return lxor(in);
    case CellKind::Xnor: return lnot(lxor(in));
    case CellKind::Mux2:
      if (in[0] == Logic::Zero) return in[1];
      if (in[0] == Logic::One) return in[2];
      return in[1] == in[2] ? in[1] : Logic::X;
    case CellKind::Lut: return llut(cell.table, in);
    case CellKind::Const0: return Logic::Zero;
    case CellKind::Const1: return Logic::One;
    case CellKind::Dff: return Logic::X;  // not evaluated, DFF outputs are sources
  }
  return Logic::X;
}

std::vector<Logic> simulate(const Netlist& n, std::span<const Logic> sources, std::size_t max_iterations) {
  std::vector<Logic> value(n.num_nets(), Logic::X);
  auto source = [&](NetId net) { return net < sources.size() ? sources[net] : Logic::X; };
  for (NetId i : n.inputs()) value[i] = source(i);
  for (CellId d : n.dffs()) value[n.cell(d).output] = source(n.cell(d).output);

  // Feedback edges removed gives an order that settles acyclic parts in one sweep.
  const auto order = topological_order(n, feedback_edge_set(n));
  const bool acyclic = is_acyclic(n);
  if (max_iterations == 0) max_iterations = n.num_cells() + 1;

  std::vector<Logic> buf;
  for (std::size_t sweep = 0; sweep < max_iterations; ++sweep) {
    bool changed = false;
    for (CellId c : order) {
      const Cell& cell = n.cell(c);
      if (cell.kind == CellKind::Dff) continue;
      buf.clear();
      for (NetId in : cell.inputs) buf.push_back(value[in]);
      const Logic v = eval_cell(cell, buf);
      if (v != value[cell.output]) {
        value[cell.output] = v;
        changed = true;
      }
    }
    if (!changed || acyclic) break;
  }
  return value;
}

std::vector<Logic> simulate_scan(const Netlist& n, std::span<const Logic> scan_inputs, std::span<const Logic> keys,
                                 std::size_t max_iterations) {
  const ScanPorts ports = scan_ports(n);
  if (scan_inputs.size() != ports.input_nets.size()) throw Error("simulate_scan: input width mismatch");
  std::vector<Logic> src(n.num_nets(), Logic::X);
  for (std::size_t i = 0; i < scan_inputs.size(); ++i) src[ports.input_nets[i]] = scan_inputs[i];
  const auto key_nets = n.key_inputs();
  if (!keys.empty()) {
    if (keys.size() != key_nets.size()) throw Error("simulate_scan: key width mismatch");
    for (std::size_t i = 0; i < keys.size(); ++i) src[key_nets[i]] = keys[i];
  }
  const auto values = simulate(n, src, max_iterations);
  std::vector<Logic> out;
  out.reserve(ports.output_nets.size());
  for (NetId o : ports.output_nets) out.push_back(values[o]);
  return out;
}

}  // namespace redactor

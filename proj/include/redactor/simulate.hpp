// Three-valued netlist simulation (0, 1, X) with fixpoint iteration for cyclic
// netlists. DFF outputs are sources and DFF data pins are sinks (full scan).
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "redactor/netlist.hpp"

namespace redactor {

enum class Logic : std::uint8_t { Zero = 0, One = 1, X = 2 };

inline Logic to_logic(bool b) { return b ? Logic::One : Logic::Zero; }
char logic_char(Logic v);

Logic eval_cell(const Cell& cell, std::span<const Logic> in);

/// Evaluates every net. `sources` is indexed by NetId and only entries for primary
/// inputs and DFF outputs are read (missing entries count as X). Internal nets
/// start at X and the netlist is swept until nothing changes or `max_iterations`
/// sweeps have run (0 selects cells + 1). Nets that never settle stay X.
std::vector<Logic> simulate(const Netlist& n, std::span<const Logic> sources, std::size_t max_iterations = 0);

/// Convenience wrapper: values for scan_ports(n) inputs in order, keys given
/// separately in key_inputs() order; returns scan output values in order.
std::vector<Logic> simulate_scan(const Netlist& n, std::span<const Logic> scan_inputs,
                                 std::span<const Logic> keys = {}, std::size_t max_iterations = 0);

}  // namespace redactor

// Combinational cell-graph analysis: SCCs, feedback edges, cycles.
//
// The cell graph has an edge u -> v for every input pin of v driven by cell u,
// except when u is a DFF (flip-flops are cut points under the full-scan model).
#pragma once

#include <cstdint>
#include <span>
#include <optional>
#include <vector>

#include "redactor/netlist.hpp"

namespace redactor {

/// Input pin `pin` of `cell`; identifies the edge from that pin's driver into `cell`.
struct PinEdge {
  CellId cell;
  std::uint32_t pin;
  friend bool operator==(const PinEdge&, const PinEdge&) = default;
};

/// Strongly connected components over cells; together they partition all cells.
std::vector<std::vector<CellId>> find_sccs(const Netlist& n);

/// True for a component with more than one cell or a single self-looping cell.
bool is_loop(const Netlist& n, const std::vector<CellId>& component);

/// Cells that belong to some combinational loop.
std::vector<bool> loop_cells(const Netlist& n);

/// DFS back edges; removing them leaves the cell graph acyclic.
std::vector<PinEdge> feedback_edge_set(const Netlist& n);

/// Order in which every cell appears after its combinational drivers, ignoring
/// the given removed edges. Throws Error if a cycle remains.
std::vector<CellId> topological_order(const Netlist& n, const std::vector<PinEdge>& removed = {});

bool is_acyclic(const Netlist& n);

/// Shortest cycle that uses the given edge, as a list of edges in path order
/// starting with `edge`. Empty when the edge is on no cycle.
std::vector<PinEdge> cycle_through(const Netlist& n, PinEdge edge);

/// Key-dependent view: a MUX2 whose select is a key input only passes the data
/// input selected by `key_values` (indexed like n.key_inputs()). Returns some cycle
/// of the remaining graph, or nullopt when the active graph is acyclic.
std::optional<std::vector<PinEdge>> find_active_cycle(const Netlist& n, std::span<const std::uint8_t> key_values);

/// True when no combinational loop reaches a primary output or DFF data pin.
bool output_cone_acyclic(const Netlist& n);

}  // namespace redactor

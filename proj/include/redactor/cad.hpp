// CAD flow onto a generated fabric: LUT mapping, packing, placement, routing,
// bitstream generation and programming.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "redactor/arch.hpp"
#include "redactor/fabric.hpp"
#include "redactor/netlist.hpp"

namespace redactor {

// Mapping --------------------------------------------------------------------

struct MapOptions {
  int cuts_per_node = 10;
};

/// K-feasible cut mapping (depth first, then area flow). The result contains
/// only LUT and DFF cells; each DFF data pin is driven by a LUT read by nothing
/// else. Net names of inputs, outputs and DFF outputs are preserved.
Netlist lut_map(const Netlist& design, int k, const MapOptions& opt = {});

// Packing --------------------------------------------------------------------

struct BleUnit {
  std::vector<CellId> luts;     // one, or two for a fractured FLUT
  std::vector<CellId> dffs;     // per LUT, kNoCell when combinational
  std::vector<NetId> outputs;   // per LUT: the signal leaving the BLE
  [[nodiscard]] bool fractured() const { return luts.size() == 2; }
};

struct Packing {
  std::vector<BleUnit> units;
  std::vector<std::vector<int>> clusters;  // unit ids per CLB; position = BLE index
  std::vector<int> cluster_of;             // per unit
};

/// Greedy seed-and-grow clustering. `max_bles` (0 = N) caps the BLEs per
/// cluster, which spreads the design over more CLBs. Throws Error when a single
/// unit cannot fit a CLB (too many distinct inputs).
Packing pack(const Netlist& luts, const ArchParams& p, int max_bles = 0);

/// Distinct nets read by a cluster from outside it.
std::vector<NetId> cluster_inputs(const Netlist& luts, const Packing& pk, int cluster);

// Placement ------------------------------------------------------------------

struct Placement {
  std::vector<int> clb_site;    // per cluster: index into Fabric::clbs
  std::vector<int> input_pad;   // per input of the LUT network, -1 when not routed
  std::vector<int> output_pad;  // per output of the LUT network
  double cost = 0;              // total half-perimeter wirelength
};

/// Exhaustive for up to four clusters, simulated annealing otherwise.
Placement place(const Netlist& luts, const Packing& pk, const ArchParams& p, std::uint64_t seed);

/// Total half-perimeter wirelength of a placement.
double placement_cost(const Netlist& luts, const Packing& pk, const ArchParams& p, const Placement& pl);

// Routing --------------------------------------------------------------------

struct RouteTree {
  NetId net = 0;  // net of the LUT network
  std::int32_t source = -1;
  std::vector<std::int32_t> sinks;
  std::vector<std::pair<std::int32_t, std::int32_t>> nodes;  // (node, parent) in growth order
};

struct Routing {
  bool success = false;
  int width = 0;
  int iterations = 0;
  std::vector<RouteTree> nets;
  [[nodiscard]] std::size_t wirelength(const Fabric& f) const;
};

struct RouteOptions {
  int max_iterations = 50;
  double initial_present = 0.5;
  double present_growth = 1.5;
  double history_increment = 1.0;
};

/// PathFinder on a fabric built at a concrete width.
Routing route(const Netlist& luts, const Packing& pk, const Placement& pl, const Fabric& f,
              const RouteOptions& opt = {});

struct AutoRouteResult {
  Routing routing;
  Fabric fabric;
  std::vector<std::pair<int, bool>> trials;  // (W, routed) in trial order
};

/// Minimal even channel width: doubling from 2 up to max_width, then a binary
/// search, so width-2 is always a tried and failed width (or 0).
AutoRouteResult route_auto(const Netlist& luts, const Packing& pk, const Placement& pl, ArchParams p,
                           int max_width = 128, const RouteOptions& opt = {});

// Bitstream ------------------------------------------------------------------

Bitstream bitgen(const Netlist& luts, const Packing& pk, const Placement& pl, const Routing& r, const Fabric& f);

std::string write_bitstream(const Bitstream& b);
Bitstream parse_bitstream(std::string_view text);

/// Replaces every key input with its bit and turns MUX2 cells with a constant
/// select into buffers. Net and cell ids are preserved.
Netlist program(const Netlist& keyed, const Bitstream& b);

// Port binding ---------------------------------------------------------------

/// How a design's ports and state map onto fabric pads and flip-flops.
struct PortBinding {
  std::vector<std::pair<std::string, int>> inputs;   // design input -> pad
  std::vector<std::pair<std::string, int>> outputs;  // design output -> pad
  std::vector<std::string> input_order;              // all design inputs, declaration order
  std::vector<std::pair<std::string, CellId>> flops; // scan label -> fabric DFF cell
};

PortBinding make_binding(const Netlist& design, const Netlist& luts, const Packing& pk, const Placement& pl,
                         const Fabric& f);

/// Renames pads to design ports, ties unused input pads low, drops unused
/// output pads, labels used flip-flops and removes unused ones. Works on the
/// keyed fabric netlist or on a programmed copy of it.
Netlist bind(const Netlist& fabric_netlist, const Fabric& f, const PortBinding& b);

// Whole flow -----------------------------------------------------------------

struct FlowOptions {
  std::uint64_t seed = 1;
  int max_width = 128;
  int max_bles = 0;  // passed to pack
  MapOptions map;
  RouteOptions route;
};

struct FlowResult {
  Netlist luts;
  Packing packing;
  Placement placement;
  Routing routing;
  Fabric fabric;
  Bitstream bitstream;
  PortBinding binding;
  Netlist keyed;       // bound, key-exposed fabric
  Netlist programmed;  // bound fabric with the bitstream applied
  std::vector<std::pair<int, bool>> width_trials;
};

/// Runs map, pack, place, route (auto or fixed width), bitgen, program and bind.
FlowResult run_flow(const Netlist& design, const ArchParams& p, const FlowOptions& opt = {});

FabricStats fabric_stats(const FlowResult& r);

// Sizing ---------------------------------------------------------------------

struct SizeSearchOptions {
  int max_grid = 8;
  int max_n = 9;
  int max_io_per_tile = 16;
  double min_io_utilization = 0.90;
  bool relax_io = false;  // accept the best I/O utilization below the target
  FlowOptions flow;
};

struct SizeSearchResult {
  ArchParams params;
  FabricStats stats;
  int candidates_tried = 0;
  int max_bles = 0;  // packing cap that produced the full-use clustering
  FlowResult flow;   // the accepted run
};

/// Smallest grid_w*grid_h*N (then io_per_tile) reaching full block use and the
/// I/O target with a successful flow. Throws Error when nothing qualifies.
SizeSearchResult size_search(const Netlist& design, const ArchParams& base, const SizeSearchOptions& opt = {});

}  // namespace redactor

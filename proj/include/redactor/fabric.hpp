// Key-programmable eFPGA fabric: gate-level netlist, routing-resource graph and
// the ordered configuration chain. Every configuration bit is a key input.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redactor/arch.hpp"
#include "redactor/netlist.hpp"

namespace redactor {

inline constexpr std::uint32_t kNoBit = 0xffffffffu;

using Bitstream = std::vector<std::uint8_t>;

enum class ConfigRole : std::uint8_t { LutBit, ModeBit, BleOutSelect, RoutingMuxSelect };
std::string_view role_name(ConfigRole role);

struct ConfigBit {
  ConfigRole role;
  int x = 0;
  int y = 0;
  std::string element;
};

enum class RrType : std::uint8_t { Source, Sink, Opin, Ipin, ChanX, ChanY };

struct RrEdge {
  std::uint32_t to;
  std::int32_t mux;    // -1 for hard-wired edges
  std::int32_t input;  // mux input index
};

struct RrNode {
  RrType type;
  int x = 0;  // tile for pins; channel coordinates for tracks
  int y = 0;
  int ptc = 0;  // pin or track index
  int lo = 0;   // track span along the channel
  int hi = 0;
  bool inc = true;  // track direction
  int capacity = 1;
  NetId net = 0;  // signal net in the fabric netlist (unused for Source/Sink)
  std::int32_t mux = -1;
  std::vector<RrEdge> out;
};

enum class MuxKind : std::uint8_t { Crossbar, ConnectionBlock, PadOut, SwitchBlock };

/// Key-selected multiplexer. Input 0 is always the constant-0 net, so the
/// all-zero select drives a constant. Realised as a MUX2 tree; level l is
/// selected by bit first_bit + l.
struct Mux {
  MuxKind kind;
  int tile_x = 0;
  int tile_y = 0;
  std::string element;
  std::vector<NetId> inputs;
  NetId output = 0;
  std::uint32_t first_bit = kNoBit;
  std::uint32_t bits = 0;
  std::int32_t node = -1;  // driven RR node, -1 for crossbar muxes
};

struct BleSite {
  std::vector<NetId> pins;
  std::vector<NetId> lut_out;  // one per BLE output
  std::vector<NetId> ff_q;
  std::vector<NetId> out;
  std::vector<CellId> dff;
  std::uint32_t table_bit = kNoBit;
  std::uint32_t mode_bit = kNoBit;
  std::vector<std::uint32_t> omux_bit;
};

struct ClbSite {
  int x = 0;
  int y = 0;
  std::vector<BleSite> bles;
  std::vector<std::int32_t> xbar;        // mux id per BLE pin, index ble*K + pin
  std::vector<std::int32_t> ipin_nodes;  // I entries
  std::vector<std::int32_t> source_nodes;  // per BLE output, index ble*outs + o
  std::vector<std::int32_t> opin_nodes;
  std::int32_t sink_node = -1;
};

struct PadSite {
  int x = 0;
  int y = 0;
  int slot = 0;
  NetId in_net = 0;   // fabric primary input driven by this pad
  NetId out_net = 0;  // fabric primary output fed by this pad
  std::int32_t out_mux = -1;
  std::int32_t source_node = -1;
  std::int32_t opin_node = -1;
  std::int32_t ipin_node = -1;
  std::int32_t sink_node = -1;
};

struct Fabric {
  ArchParams params;  // w is the concrete channel width
  Netlist netlist;
  NetId gnd = 0;
  std::vector<RrNode> nodes;
  std::vector<Mux> muxes;
  std::vector<ClbSite> clbs;  // row-major, index (y-1)*grid_w + (x-1)
  std::vector<PadSite> pads;  // raster tile order, then slot
  std::vector<ConfigBit> config_chain;

  [[nodiscard]] std::size_t config_size() const { return config_chain.size(); }
  [[nodiscard]] const ClbSite& clb_at(int x, int y) const { return clbs.at((y - 1) * params.grid_w + (x - 1)); }
};

struct PadLocation {
  int x, y, slot;
};
/// Pad positions in fabric order: raster over the perimeter I/O tiles, then slot.
std::vector<PadLocation> pad_sites(const ArchParams& p);

/// Deterministic construction; p.w must be a concrete even width >= 2.
Fabric build_fabric(const ArchParams& p);

/// Writes the select bits choosing input `index` of `mux`.
void set_mux_select(Bitstream& bits, const Mux& mux, std::uint32_t index);
/// Input index currently selected by `bits` (may exceed the input count).
std::uint32_t mux_selection(const Bitstream& bits, const Mux& mux);

/// One line per configuration bit: `index role tile=(x,y) element=...`.
std::string write_chain(const Fabric& f);

std::vector<ConfigBit> parse_chain(std::string_view text);

struct FabricStats {
  double block_utilization = 0;
  double io_utilization = 0;
  std::size_t bitstream_size = 0;
  int channel_width = 0;
  int used_clbs = 0;
  int used_pads = 0;
};

}  // namespace redactor

#include <algorithm>
#include <map>
#include <sstream>

#include "redactor/cad.hpp"

namespace redactor {

namespace {

const RrEdge& edge_between(const Fabric& f, std::int32_t from, std::int32_t to) {
  for (const RrEdge& e : f.nodes[from].out)
    if (static_cast<std::int32_t>(e.to) == to) return e;
  throw Error("bitgen: routing uses a missing RR edge");
}

// Table of a LUT whose input i is wired to physical pin pos[i], over `width` pins.
std::uint64_t permute_table(const Cell& lut, const std::vector<int>& pos, int width) {
  std::uint64_t t = 0;
  for (unsigned idx = 0; idx < (1u << width); ++idx) {
    unsigned li = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) li |= ((idx >> pos[i]) & 1u) << i;
    t |= ((lut.table >> li) & 1u) << idx;
  }
  return t;
}

}  // namespace

Bitstream bitgen(const Netlist& luts, const Packing& pk, const Placement& pl, const Routing& r, const Fabric& f) {
  if (!r.success) throw Error("bitgen: routing did not succeed");
  Bitstream bits(f.config_size(), 0);
  const ArchParams& p = f.params;
  const int outs = p.ble_outputs();
  const int inputs = p.clb_inputs();

  // Routing mux selects, and the ipin each external net enters a CLB on.
  std::map<std::pair<std::int32_t, NetId>, int> ipin_of;  // (sink node, net) -> ipin index
  for (const RouteTree& t : r.nets)
    for (const auto& [node, parent] : t.nodes) {
      if (parent < 0) continue;
      const RrEdge& e = edge_between(f, parent, node);
      if (e.mux >= 0) set_mux_select(bits, f.muxes[e.mux], static_cast<std::uint32_t>(e.input));
      if (f.nodes[node].type == RrType::Sink && f.nodes[parent].type == RrType::Ipin)
        ipin_of[{node, t.net}] = f.nodes[parent].ptc;
    }

  for (std::size_t c = 0; c < pk.clusters.size(); ++c) {
    const ClbSite& clb = f.clbs.at(pl.clb_site[c]);
    std::map<NetId, int> local;  // unit output -> crossbar feedback index
    for (std::size_t b = 0; b < pk.clusters[c].size(); ++b) {
      const BleUnit& u = pk.units[pk.clusters[c][b]];
      for (std::size_t o = 0; o < u.outputs.size(); ++o)
        local[u.outputs[o]] = 1 + inputs + static_cast<int>(b) * outs + static_cast<int>(o);
    }
    for (std::size_t b = 0; b < pk.clusters[c].size(); ++b) {
      const BleUnit& u = pk.units[pk.clusters[c][b]];
      const BleSite& ble = clb.bles[b];
      // Physical pin order: first LUT's inputs, then any new inputs of the second.
      std::vector<NetId> pins;
      for (CellId l : u.luts)
        for (NetId x : luts.cell(l).inputs)
          if (std::find(pins.begin(), pins.end(), x) == pins.end()) pins.push_back(x);
      for (std::size_t i = 0; i < pins.size(); ++i) {
        int sel = 0;
        if (auto it = local.find(pins[i]); it != local.end()) {
          sel = it->second;
        } else {
          auto jt = ipin_of.find({clb.sink_node, pins[i]});
          if (jt == ipin_of.end()) throw Error("bitgen: net '" + luts.net_name(pins[i]) + "' not routed to its CLB");
          sel = 1 + jt->second;
        }
        set_mux_select(bits, f.muxes[clb.xbar[b * p.k + i]], static_cast<std::uint32_t>(sel));
      }
      auto positions = [&](CellId l) {
        std::vector<int> pos;
        for (NetId x : luts.cell(l).inputs)
          pos.push_back(static_cast<int>(std::find(pins.begin(), pins.end(), x) - pins.begin()));
        return pos;
      };
      if (!u.fractured()) {
        const std::uint64_t t = permute_table(luts.cell(u.luts[0]), positions(u.luts[0]), static_cast<int>(pins.size()));
        for (unsigned idx = 0; idx < (1u << pins.size()); ++idx) bits[ble.table_bit + idx] = (t >> idx) & 1;
      } else {
        const int half = 1 << (p.k - 1);
        for (int h = 0; h < 2; ++h) {
          const std::uint64_t t = permute_table(luts.cell(u.luts[h]), positions(u.luts[h]), static_cast<int>(pins.size()));
          for (unsigned idx = 0; idx < (1u << pins.size()); ++idx) bits[ble.table_bit + h * half + idx] = (t >> idx) & 1;
        }
        bits[ble.mode_bit] = 1;
      }
      for (std::size_t o = 0; o < u.luts.size(); ++o)
        if (u.dffs[o] != kNoCell) bits[ble.omux_bit[o]] = 1;
    }
  }
  return bits;
}

std::string write_bitstream(const Bitstream& b) {
  std::string s;
  s.reserve(b.size() * 2);
  for (auto bit : b) {
    s += bit ? '1' : '0';
    s += '\n';
  }
  return s;
}

Bitstream parse_bitstream(std::string_view text) {
  Bitstream b;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t end = text.find('\n', i);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(i, end - i);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (l == "0" || l == "1") b.push_back(l == "1");
    else if (!l.empty()) throw Error("bitstream line " + std::to_string(line) + ": expected 0 or 1");
    i = end + 1;
    ++line;
  }
  return b;
}

Netlist program(const Netlist& keyed, const Bitstream& b) {
  const auto keys = keyed.key_inputs();
  if (keys.size() != b.size())
    throw Error("program: bitstream has " + std::to_string(b.size()) + " bits, fabric expects " +
                std::to_string(keys.size()));
  Netlist n = keyed;
  std::vector<int> value(n.num_nets(), -1);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    n.tie_input(keys[i], b[i] != 0);
    value[keys[i]] = b[i] != 0;
  }
  for (CellId c = 0; c < n.num_cells(); ++c) {
    const Cell& cell = n.cell(c);
    if (cell.kind != CellKind::Mux2) continue;
    const int s = value[cell.inputs[0]];
    if (s < 0) continue;
    n.rewrite_cell(c, CellKind::Buf, {cell.inputs[s ? 2 : 1]});
  }
  return n;
}

}  // namespace redactor

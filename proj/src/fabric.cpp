#include "redactor/fabric.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace redactor {

std::string_view role_name(ConfigRole role) {
  switch (role) {
    case ConfigRole::LutBit: return "lut-bit";
    case ConfigRole::ModeBit: return "mode-bit";
    case ConfigRole::BleOutSelect: return "ble-out-select";
    case ConfigRole::RoutingMuxSelect: return "routing-mux-select";
  }
  return "?";
}

namespace {

std::string xy(int x, int y) { return "x" + std::to_string(x) + "y" + std::to_string(y); }
std::string paren(int x, int y) { return "(" + std::to_string(x) + "," + std::to_string(y) + ")"; }

int select_bits(std::size_t inputs) {
  int b = 0;
  while ((std::size_t{1} << b) < inputs) ++b;
  return b;
}

RrNode make_node(RrType type, int x = 0, int y = 0, int ptc = 0) {
  RrNode n;
  n.type = type;
  n.x = x;
  n.y = y;
  n.ptc = ptc;
  return n;
}

struct Segment {
  int lo, hi;
};

// Segments of one directional track along positions 1..len. Starts are
// staggered by the track pair index and truncated at both ends.
std::vector<Segment> track_segments(int len, int seg_len, int pidx, bool inc) {
  std::vector<int> starts;
  for (int q = 1; q <= len; ++q)
    if (q == 1 || (q - 1) % seg_len == pidx % seg_len) starts.push_back(q);
  std::vector<Segment> out;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const int qlo = starts[i];
    const int qhi = i + 1 < starts.size() ? starts[i + 1] - 1 : len;
    if (inc) out.push_back({qlo, qhi});
    else out.push_back({len - qhi + 1, len - qlo + 1});
  }
  return out;
}

// Category order of configuration elements inside a tile.
enum Category { kTable = 0, kMode = 1, kOmux = 2, kXbar = 3, kCb = 4, kSb = 5 };

struct Element {
  int tile_key;
  int category;
  std::size_t seq;
  // what gets the bits
  enum { Table, Mode, Omux, MuxSel } what;
  int clb = -1, ble = -1, out = -1, mux = -1;
};

class Builder {
 public:
  explicit Builder(const ArchParams& p) : p_(p) {
    validate(p);
    if (p.w < 2 || p.w % 2) throw Error("build_fabric: a concrete even channel width >= 2 is required");
    f_.params = p;
    f_.netlist = Netlist("fabric_" + std::to_string(p.grid_w) + "x" + std::to_string(p.grid_h) + "_K" +
                         std::to_string(p.k) + (p.ble_kind == BleKind::Flut ? "_frac" : "") + "_N" +
                         std::to_string(p.n) + "_W" + std::to_string(p.w));
  }

  Fabric run() {
    make_pads();
    f_.gnd = nl().add_gate(CellKind::Const0, {}, "fab.gnd");
    make_clbs();
    make_tracks();
    make_connection_blocks();
    make_switch_blocks();
    connect_drivers();
    allocate_chain();
    emit();
    f_.netlist.validate();
    return std::move(f_);
  }

 private:
  Netlist& nl() { return f_.netlist; }
  int tile_key(int x, int y) const { return y * (p_.grid_w + 2) + x; }

  std::int32_t add_node(RrNode node) {
    f_.nodes.push_back(std::move(node));
    return static_cast<std::int32_t>(f_.nodes.size() - 1);
  }

  std::int32_t add_mux(MuxKind kind, int tx, int ty, std::string element, NetId out, std::int32_t node) {
    Mux m;
    m.kind = kind;
    m.tile_x = tx;
    m.tile_y = ty;
    m.element = std::move(element);
    m.inputs.push_back(f_.gnd);
    m.output = out;
    m.node = node;
    f_.muxes.push_back(std::move(m));
    return static_cast<std::int32_t>(f_.muxes.size() - 1);
  }

  // Routes the signal carried by `from` into `mux`, recording the RR edge.
  void feed(std::int32_t from, std::int32_t mux) {
    Mux& m = f_.muxes[mux];
    if (std::find(m.inputs.begin(), m.inputs.end(), f_.nodes[from].net) != m.inputs.end()) return;
    m.inputs.push_back(f_.nodes[from].net);
    f_.nodes[from].out.push_back({static_cast<std::uint32_t>(m.node), mux, static_cast<std::int32_t>(m.inputs.size() - 1)});
  }

  void make_pads() {
    for (const PadLocation& loc : pad_sites(p_)) {
      PadSite pad;
      pad.x = loc.x;
      pad.y = loc.y;
      pad.slot = loc.slot;
      const std::string base = "fab.pad." + xy(loc.x, loc.y) + ".s" + std::to_string(loc.slot);
      pad.in_net = nl().add_input(base + ".in");
      pad.out_net = nl().add_net(base + ".out");
      f_.pads.push_back(pad);
    }
  }

  void make_clbs() {
    const int outs = p_.ble_outputs();
    const int inputs = p_.clb_inputs();
    for (int y = 1; y <= p_.grid_h; ++y)
      for (int x = 1; x <= p_.grid_w; ++x) {
        ClbSite clb;
        clb.x = x;
        clb.y = y;
        const std::string base = "fab." + xy(x, y);
        RrNode sink = make_node(RrType::Sink, x, y);
        sink.capacity = inputs;  // inputs are interchangeable through the full crossbar
        clb.sink_node = add_node(sink);
        for (int b = 0; b < p_.n; ++b) {
          BleSite ble;
          const std::string bb = base + ".b" + std::to_string(b);
          for (int i = 0; i < p_.k; ++i) ble.pins.push_back(nl().add_net(bb + ".pin" + std::to_string(i)));
          for (int o = 0; o < outs; ++o) {
            const std::string ob = bb + ".o" + std::to_string(o);
            ble.lut_out.push_back(nl().add_net(ob + ".lut"));
            ble.ff_q.push_back(nl().add_net(ob + ".q"));
            ble.out.push_back(nl().add_net(ob));
            RrNode src = make_node(RrType::Source, x, y, b * outs + o);
            clb.source_nodes.push_back(add_node(src));
            RrNode opin = make_node(RrType::Opin, x, y, b * outs + o);
            opin.net = ble.out.back();
            clb.opin_nodes.push_back(add_node(opin));
            f_.nodes[clb.source_nodes.back()].out.push_back({static_cast<std::uint32_t>(clb.opin_nodes.back()), -1, -1});
          }
          clb.bles.push_back(std::move(ble));
        }
        for (int i = 0; i < inputs; ++i) {
          RrNode ipin = make_node(RrType::Ipin, x, y, i);
          ipin.net = nl().add_net(base + ".ipin" + std::to_string(i));
          const auto id = add_node(ipin);
          f_.nodes[id].mux = add_mux(MuxKind::ConnectionBlock, x, y, "cb.clb" + paren(x, y) + ".ipin" + std::to_string(i),
                                     ipin.net, id);
          f_.nodes[id].out.push_back({static_cast<std::uint32_t>(clb.sink_node), -1, -1});
          clb.ipin_nodes.push_back(id);
        }
        f_.clbs.push_back(std::move(clb));
      }
    // Crossbar muxes are created after all CLBs so that their ids follow the
    // connection-block muxes; chain order is fixed separately.
    for (ClbSite& clb : f_.clbs) {
      for (int b = 0; b < p_.n; ++b)
        for (int i = 0; i < p_.k; ++i) {
          const NetId pin = clb.bles[b].pins[i];
          const auto m = add_mux(MuxKind::Crossbar, clb.x, clb.y,
                                 "clb" + paren(clb.x, clb.y) + ".xbar.b" + std::to_string(b) + ".pin" + std::to_string(i),
                                 pin, -1);
          for (auto ip : clb.ipin_nodes) f_.muxes[m].inputs.push_back(f_.nodes[ip].net);
          for (const BleSite& ble : clb.bles)
            for (NetId o : ble.out) f_.muxes[m].inputs.push_back(o);
          clb.xbar.push_back(m);
        }
    }
    for (PadSite& pad : f_.pads) {
      RrNode src = make_node(RrType::Source, pad.x, pad.y, pad.slot);
      pad.source_node = add_node(src);
      RrNode opin = make_node(RrType::Opin, pad.x, pad.y, pad.slot);
      opin.net = pad.in_net;
      pad.opin_node = add_node(opin);
      f_.nodes[pad.source_node].out.push_back({static_cast<std::uint32_t>(pad.opin_node), -1, -1});
      RrNode sink = make_node(RrType::Sink, pad.x, pad.y, pad.slot);
      pad.sink_node = add_node(sink);
      RrNode ipin = make_node(RrType::Ipin, pad.x, pad.y, pad.slot);
      ipin.net = pad.out_net;
      pad.ipin_node = add_node(ipin);
      pad.out_mux = add_mux(MuxKind::PadOut, pad.x, pad.y,
                            "pad" + paren(pad.x, pad.y) + ".s" + std::to_string(pad.slot) + ".out", pad.out_net,
                            pad.ipin_node);
      f_.nodes[pad.ipin_node].mux = pad.out_mux;
      f_.nodes[pad.ipin_node].out.push_back({static_cast<std::uint32_t>(pad.sink_node), -1, -1});
    }
  }

  // chanx_[y][t][p-1] / chany_[x][t][p-1]: node covering position p.
  std::vector<std::vector<std::vector<std::int32_t>>> chanx_, chany_;

  void make_channel(bool horizontal, int fixed, std::vector<std::vector<std::int32_t>>& out) {
    const int len = horizontal ? p_.grid_w : p_.grid_h;
    out.assign(p_.w, std::vector<std::int32_t>(len, -1));
    for (int t = 0; t < p_.w; ++t) {
      const bool inc = t % 2 == 0;
      for (const Segment& s : track_segments(len, p_.l, t / 2, inc)) {
        RrNode node = make_node(horizontal ? RrType::ChanX : RrType::ChanY);
        node.x = horizontal ? s.lo : fixed;
        node.y = horizontal ? fixed : s.lo;
        node.ptc = t;
        node.lo = s.lo;
        node.hi = s.hi;
        node.inc = inc;
        const std::string name = std::string(horizontal ? "fab.cx" : "fab.cy") + "." + std::to_string(fixed) + ".p" +
                                 std::to_string(s.lo) + ".t" + std::to_string(t);
        node.net = nl().add_net(name);
        const auto id = add_node(node);
        // The driver sits at the switch block where the segment starts.
        const int start = inc ? s.lo - 1 : s.hi;
        const int sx = horizontal ? start : fixed, sy = horizontal ? fixed : start;
        f_.nodes[id].mux = add_mux(MuxKind::SwitchBlock, sx, sy,
                                   std::string("sb") + paren(sx, sy) + (horizontal ? ".chanx" : ".chany") +
                                       paren(node.x, node.y) + ".t" + std::to_string(t),
                                   node.net, id);
        for (int q = s.lo; q <= s.hi; ++q) out[t][q - 1] = id;
      }
    }
  }

  void make_tracks() {
    chanx_.resize(p_.grid_h + 1);
    chany_.resize(p_.grid_w + 1);
    for (int y = 0; y <= p_.grid_h; ++y) make_channel(true, y, chanx_[y]);
    for (int x = 0; x <= p_.grid_w; ++x) make_channel(false, x, chany_[x]);
  }

  // Channel adjacent to a CLB side: 0 top, 1 right, 2 bottom, 3 left.
  const std::vector<std::vector<std::int32_t>>& clb_channel(int x, int y, int side, int& pos) const {
    switch (side) {
      case 0: pos = x; return chanx_[y];
      case 1: pos = y; return chany_[x];
      case 2: pos = x; return chanx_[y - 1];
      default: pos = y; return chany_[x - 1];
    }
  }

  const std::vector<std::vector<std::int32_t>>& pad_channel(const PadSite& pad, int& pos) const {
    if (pad.y == 0) return pos = pad.x, chanx_[0];
    if (pad.y == p_.grid_h + 1) return pos = pad.x, chanx_[p_.grid_h];
    if (pad.x == 0) return pos = pad.y, chany_[0];
    return pos = pad.y, chany_[p_.grid_w];
  }

  // Tracks read by an input pin: evenly spaced over the W tracks at `pos`.
  void read_tracks(const std::vector<std::vector<std::int32_t>>& chan, int pos, int base, std::int32_t mux) {
    const int count = fc_tracks(p_.fc_in, p_.w);
    for (int m = 0; m < count; ++m) {
      const int t = (base + m * p_.w / count) % p_.w;
      feed(chan[t][pos - 1], mux);
    }
  }

  // Tracks whose segment starts at `pos`, in track order.
  std::vector<std::int32_t> starting_tracks(const std::vector<std::vector<std::int32_t>>& chan, int pos) const {
    std::vector<std::int32_t> out;
    for (const auto& track : chan) {
      const RrNode& n = f_.nodes[track[pos - 1]];
      if ((n.inc && n.lo == pos) || (!n.inc && n.hi == pos)) out.push_back(track[pos - 1]);
    }
    return out;
  }

  void drive_tracks(std::int32_t opin, const std::vector<std::vector<std::int32_t>>& chan, int pos, int base) {
    const auto starts = starting_tracks(chan, pos);
    if (starts.empty()) return;
    const int avail = static_cast<int>(starts.size());
    const int count = std::min(fc_tracks(p_.fc_out, p_.w), avail);
    for (int m = 0; m < count; ++m) {
      const auto track = starts[(base + m * avail / count) % avail];
      feed(opin, f_.nodes[track].mux);
    }
  }

  void make_connection_blocks() {
    for (const ClbSite& clb : f_.clbs)
      for (std::size_t i = 0; i < clb.ipin_nodes.size(); ++i) {
        int pos = 0;
        const auto& chan = clb_channel(clb.x, clb.y, static_cast<int>(i % 4), pos);
        read_tracks(chan, pos, static_cast<int>(i), f_.nodes[clb.ipin_nodes[i]].mux);
      }
    for (const PadSite& pad : f_.pads) {
      int pos = 0;
      const auto& chan = pad_channel(pad, pos);
      read_tracks(chan, pos, pad.slot, pad.out_mux);
    }
  }

  void connect_drivers() {
    for (const ClbSite& clb : f_.clbs)
      for (std::size_t j = 0; j < clb.opin_nodes.size(); ++j) {
        int pos = 0;
        const auto& chan = clb_channel(clb.x, clb.y, static_cast<int>(j % 4), pos);
        drive_tracks(clb.opin_nodes[j], chan, pos, static_cast<int>(j / 4));
      }
    for (const PadSite& pad : f_.pads) {
      int pos = 0;
      const auto& chan = pad_channel(pad, pos);
      drive_tracks(pad.opin_node, chan, pos, pad.slot);
    }
  }

  // Directions: 0 east, 1 north, 2 west, 3 south.
  void make_switch_blocks() {
    const int gw = p_.grid_w, gh = p_.grid_h;
    for (int sy = 0; sy <= gh; ++sy)
      for (int sx = 0; sx <= gw; ++sx) {
        std::array<std::vector<std::int32_t>, 4> in, out;
        for (int t = 0; t < p_.w; ++t) {
          const bool inc = t % 2 == 0;
          if (inc) {
            if (sx >= 1 && f_.nodes[chanx_[sy][t][sx - 1]].hi == sx) in[0].push_back(chanx_[sy][t][sx - 1]);
            if (sx + 1 <= gw && f_.nodes[chanx_[sy][t][sx]].lo == sx + 1) out[0].push_back(chanx_[sy][t][sx]);
            if (sy >= 1 && f_.nodes[chany_[sx][t][sy - 1]].hi == sy) in[1].push_back(chany_[sx][t][sy - 1]);
            if (sy + 1 <= gh && f_.nodes[chany_[sx][t][sy]].lo == sy + 1) out[1].push_back(chany_[sx][t][sy]);
          } else {
            if (sx + 1 <= gw && f_.nodes[chanx_[sy][t][sx]].lo == sx + 1) in[2].push_back(chanx_[sy][t][sx]);
            if (sx >= 1 && f_.nodes[chanx_[sy][t][sx - 1]].hi == sx) out[2].push_back(chanx_[sy][t][sx - 1]);
            if (sy + 1 <= gh && f_.nodes[chany_[sx][t][sy]].lo == sy + 1) in[3].push_back(chany_[sx][t][sy]);
            if (sy >= 1 && f_.nodes[chany_[sx][t][sy - 1]].hi == sy) out[3].push_back(chany_[sx][t][sy - 1]);
          }
        }
        for (int d = 0; d < 4; ++d)
          for (std::size_t i = 0; i < in[d].size(); ++i) {
            const int pidx = f_.nodes[in[d][i]].ptc / 2;
            // straight, left turn, right turn; no U-turns
            const std::array<int, 3> sides = {d, (d + 1) % 4, (d + 3) % 4};
            std::array<int, 3> quota{};
            int avail = 0;
            for (int s : sides) avail += static_cast<int>(out[s].size());
            int left = std::min(p_.fs, avail);
            for (int r = 0; left > 0; ++r) {
              const int s = r % 3;
              if (quota[s] < static_cast<int>(out[sides[s]].size())) ++quota[s], --left;
            }
            for (int s = 0; s < 3; ++s) {
              const auto& cand = out[sides[s]];
              const int c = static_cast<int>(cand.size());
              if (c == 0) continue;
              int base = 0;
              if (s == 0) base = pidx % c;
              else if (s == 1) base = (c - pidx % c) % c;
              else base = (pidx + 1) % c;
              for (int m = 0; m < quota[s]; ++m) feed(in[d][i], f_.nodes[cand[(base + m) % c]].mux);
            }
          }
      }
  }

  void allocate_chain() {
    std::vector<Element> elems;
    std::size_t seq = 0;
    for (std::size_t c = 0; c < f_.clbs.size(); ++c) {
      const ClbSite& clb = f_.clbs[c];
      const int key = tile_key(clb.x, clb.y);
      for (int b = 0; b < p_.n; ++b) {
        elems.push_back({key, kTable, seq++, Element::Table, static_cast<int>(c), b});
        if (p_.ble_kind == BleKind::Flut) elems.push_back({key, kMode, seq++, Element::Mode, static_cast<int>(c), b});
        for (int o = 0; o < p_.ble_outputs(); ++o)
          elems.push_back({key, kOmux, seq++, Element::Omux, static_cast<int>(c), b, o});
      }
    }
    for (std::size_t m = 0; m < f_.muxes.size(); ++m) {
      const Mux& mux = f_.muxes[m];
      const int cat = mux.kind == MuxKind::Crossbar ? kXbar : mux.kind == MuxKind::SwitchBlock ? kSb : kCb;
      Element e{tile_key(mux.tile_x, mux.tile_y), cat, seq++, Element::MuxSel};
      e.mux = static_cast<int>(m);
      elems.push_back(e);
    }
    std::stable_sort(elems.begin(), elems.end(), [](const Element& a, const Element& b) {
      return std::tie(a.tile_key, a.category, a.seq) < std::tie(b.tile_key, b.category, b.seq);
    });
    auto& chain = f_.config_chain;
    for (const Element& e : elems) {
      if (e.what == Element::MuxSel) {
        Mux& mux = f_.muxes[e.mux];
        mux.bits = static_cast<std::uint32_t>(select_bits(mux.inputs.size()));
        mux.first_bit = static_cast<std::uint32_t>(chain.size());
        for (std::uint32_t l = 0; l < mux.bits; ++l)
          chain.push_back({ConfigRole::RoutingMuxSelect, mux.tile_x, mux.tile_y, mux.element + ".sel[" + std::to_string(l) + "]"});
        continue;
      }
      ClbSite& clb = f_.clbs[e.clb];
      BleSite& ble = clb.bles[e.ble];
      const std::string base = "clb" + paren(clb.x, clb.y) + ".ble" + std::to_string(e.ble);
      if (e.what == Element::Table) {
        ble.table_bit = static_cast<std::uint32_t>(chain.size());
        for (int i = 0; i < (1 << p_.k); ++i)
          chain.push_back({ConfigRole::LutBit, clb.x, clb.y, base + ".lut[" + std::to_string(i) + "]"});
      } else if (e.what == Element::Mode) {
        ble.mode_bit = static_cast<std::uint32_t>(chain.size());
        chain.push_back({ConfigRole::ModeBit, clb.x, clb.y, base + ".mode"});
      } else {
        ble.omux_bit.push_back(static_cast<std::uint32_t>(chain.size()));
        chain.push_back({ConfigRole::BleOutSelect, clb.x, clb.y, base + ".omux" + std::to_string(e.out)});
      }
    }
    keys_.clear();
    for (std::size_t i = 0; i < chain.size(); ++i) keys_.push_back(nl().add_input("key" + std::to_string(i)));
  }

  // Emits a MUX2 tree: `level` holds 2^sels leaves, level l selected by sels[l].
  void emit_tree(std::vector<NetId> level, const std::vector<NetId>& sels, NetId out, const std::string base) {
    for (std::size_t l = 0; l < sels.size(); ++l) {
      const bool last = l + 1 == sels.size();
      std::vector<NetId> next;
      for (std::size_t r = 0; r < level.size() / 2; ++r) {
        const NetId a = level[2 * r], b = level[2 * r + 1];
        if (last) {
          if (a == b) nl().add_cell(CellKind::Buf, {a}, out);
          else nl().add_cell(CellKind::Mux2, {sels[l], a, b}, out);
          return;
        }
        if (a == b) next.push_back(a);
        else next.push_back(nl().add_gate(CellKind::Mux2, {sels[l], a, b}, base + ".m" + std::to_string(l) + "_" + std::to_string(r)));
      }
      level = std::move(next);
    }
    nl().add_cell(CellKind::Buf, {level[0]}, out);
  }

  void emit() {
    for (ClbSite& clb : f_.clbs)
      for (BleSite& ble : clb.bles) {
        const auto table_keys = [&](int from, int count) {
          return std::vector<NetId>(keys_.begin() + ble.table_bit + from, keys_.begin() + ble.table_bit + from + count);
        };
        if (p_.ble_kind == BleKind::Lut) {
          emit_tree(table_keys(0, 1 << p_.k), ble.pins, ble.lut_out[0], nl().net_name(ble.lut_out[0]));
        } else {
          const int half = 1 << (p_.k - 1);
          const std::vector<NetId> low_pins(ble.pins.begin(), ble.pins.end() - 1);
          const std::string base = nl().net_name(ble.lut_out[0]);
          const NetId lo = nl().add_net(base + ".lo");
          emit_tree(table_keys(0, half), low_pins, lo, base + ".lo");
          emit_tree(table_keys(half, half), low_pins, ble.lut_out[1], nl().net_name(ble.lut_out[1]));
          const NetId nmode = nl().add_gate(CellKind::Not, {keys_[ble.mode_bit]}, base + ".nmode");
          const NetId top = nl().add_gate(CellKind::And, {ble.pins.back(), nmode}, base + ".top");
          nl().add_cell(CellKind::Mux2, {top, lo, ble.lut_out[1]}, ble.lut_out[0]);
        }
        for (std::size_t o = 0; o < ble.out.size(); ++o) {
          ble.dff.push_back(nl().add_cell(CellKind::Dff, {ble.lut_out[o]}, ble.ff_q[o]));
          nl().add_cell(CellKind::Mux2, {keys_[ble.omux_bit[o]], ble.lut_out[o], ble.ff_q[o]}, ble.out[o]);
        }
      }
    for (const Mux& m : f_.muxes) {
      std::vector<NetId> leaves(std::size_t{1} << m.bits, f_.gnd);
      std::copy(m.inputs.begin(), m.inputs.end(), leaves.begin());
      std::vector<NetId> sels(keys_.begin() + m.first_bit, keys_.begin() + m.first_bit + m.bits);
      emit_tree(std::move(leaves), sels, m.output, nl().net_name(m.output));
    }
    std::vector<NetId> outs;
    for (const PadSite& pad : f_.pads) outs.push_back(pad.out_net);
    nl().set_outputs(outs);
  }

  ArchParams p_;
  Fabric f_;
  std::vector<NetId> keys_;
};

}  // namespace

std::vector<PadLocation> pad_sites(const ArchParams& p) {
  std::vector<PadLocation> out;
  for (int y = 0; y <= p.grid_h + 1; ++y)
    for (int x = 0; x <= p.grid_w + 1; ++x) {
      const bool ring_x = (x == 0 || x == p.grid_w + 1), ring_y = (y == 0 || y == p.grid_h + 1);
      if (ring_x == ring_y) continue;  // CLB tile or corner
      for (int s = 0; s < p.io_per_tile; ++s) out.push_back({x, y, s});
    }
  return out;
}

Fabric build_fabric(const ArchParams& p) { return Builder(p).run(); }

void set_mux_select(Bitstream& bits, const Mux& mux, std::uint32_t index) {
  if (index >= mux.inputs.size()) throw Error("mux " + mux.element + ": input index out of range");
  for (std::uint32_t l = 0; l < mux.bits; ++l) bits.at(mux.first_bit + l) = (index >> l) & 1;
}

std::uint32_t mux_selection(const Bitstream& bits, const Mux& mux) {
  std::uint32_t v = 0;
  for (std::uint32_t l = 0; l < mux.bits; ++l) v |= std::uint32_t{bits.at(mux.first_bit + l) != 0} << l;
  return v;
}

std::string write_chain(const Fabric& f) {
  std::ostringstream os;
  for (std::size_t i = 0; i < f.config_chain.size(); ++i) {
    const ConfigBit& b = f.config_chain[i];
    os << i << ' ' << role_name(b.role) << " tile=" << paren(b.x, b.y) << " element=" << b.element << '\n';
  }
  return os.str();
}

std::vector<ConfigBit> parse_chain(std::string_view text) {
  std::vector<ConfigBit> out;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t index = 0;
    std::string role, tile, element;
    if (!(ls >> index >> role >> tile >> element) || index != out.size())
      throw Error("chain file line " + std::to_string(out.size() + 1) + ": malformed");
    ConfigBit b;
    if (role == "lut-bit") b.role = ConfigRole::LutBit;
    else if (role == "mode-bit") b.role = ConfigRole::ModeBit;
    else if (role == "ble-out-select") b.role = ConfigRole::BleOutSelect;
    else if (role == "routing-mux-select") b.role = ConfigRole::RoutingMuxSelect;
    else throw Error("chain file: unknown role '" + role + "'");
    if (std::sscanf(tile.c_str(), "tile=(%d,%d)", &b.x, &b.y) != 2) throw Error("chain file: bad tile field");
    if (element.rfind("element=", 0) != 0) throw Error("chain file: bad element field");
    b.element = element.substr(8);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace redactor

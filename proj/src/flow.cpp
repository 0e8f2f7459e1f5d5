#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "redactor/cad.hpp"

namespace redactor {

PortBinding make_binding(const Netlist& design, const Netlist& luts, const Packing& pk, const Placement& pl,
                         const Fabric& f) {
  PortBinding b;
  for (std::size_t i = 0; i < luts.inputs().size(); ++i)
    if (pl.input_pad[i] >= 0) b.inputs.push_back({luts.net_name(luts.inputs()[i]), pl.input_pad[i]});
  for (std::size_t o = 0; o < luts.outputs().size(); ++o)
    b.outputs.push_back({design.net_name(design.outputs()[o]), pl.output_pad[o]});
  for (NetId in : design.inputs()) b.input_order.push_back(design.net_name(in));
  for (std::size_t c = 0; c < pk.clusters.size(); ++c) {
    const ClbSite& clb = f.clbs.at(pl.clb_site[c]);
    for (std::size_t s = 0; s < pk.clusters[c].size(); ++s) {
      const BleUnit& u = pk.units[pk.clusters[c][s]];
      for (std::size_t o = 0; o < u.dffs.size(); ++o)
        if (u.dffs[o] != kNoCell) b.flops.push_back({luts.state_label(u.dffs[o]), clb.bles[s].dff[o]});
    }
  }
  return b;
}

Netlist bind(const Netlist& fabric_netlist, const Fabric& f, const PortBinding& b) {
  Netlist n = fabric_netlist;
  auto check_name = [](const std::string& name) {
    if (name.rfind("fab.", 0) == 0 || is_key_name(name))
      throw Error("bind: design port '" + name + "' collides with fabric naming");
  };
  std::set<std::string> input_names(b.input_order.begin(), b.input_order.end());
  std::set<std::string> output_names;
  for (const auto& [name, pad] : b.outputs) {
    check_name(name);
    if (input_names.count(name)) throw Error("bind: output '" + name + "' is directly a primary input");
    if (!output_names.insert(name).second) throw Error("bind: output '" + name + "' listed twice");
  }
  std::vector<char> pad_used(f.pads.size(), 0);
  for (const auto& [name, pad] : b.inputs) {
    check_name(name);
    n.rename_net(f.pads.at(pad).in_net, name);
    pad_used[pad] = 1;
  }
  for (std::size_t i = 0; i < f.pads.size(); ++i)
    if (!pad_used[i] && n.is_input(f.pads[i].in_net)) n.tie_input(f.pads[i].in_net, false);
  for (const std::string& name : b.input_order) {
    check_name(name);
    if (!n.find_net(name)) n.add_input(name);  // no fanout in the design (a clock, say)
  }
  std::vector<NetId> outs;
  for (const auto& [name, pad] : b.outputs) {
    n.rename_net(f.pads.at(pad).out_net, name);
    outs.push_back(f.pads.at(pad).out_net);
  }
  n.set_outputs(outs);

  std::set<CellId> used;
  for (const auto& [label, cell] : b.flops) {
    n.set_label(cell, label);
    used.insert(cell);
  }
  for (CellId ff : fabric_netlist.dffs())
    if (!used.count(ff)) n.rewrite_cell(ff, CellKind::Const0, {});

  std::vector<NetId> order;
  for (const std::string& name : b.input_order) order.push_back(n.net(name));
  for (NetId k : n.key_inputs()) order.push_back(k);
  n.set_input_order(order);
  return n;
}

FlowResult run_flow(const Netlist& design, const ArchParams& p, const FlowOptions& opt) {
  validate(p);
  FlowResult r;
  r.luts = lut_map(design, p.k, opt.map);
  r.packing = pack(r.luts, p, opt.max_bles);
  r.placement = place(r.luts, r.packing, p, opt.seed);
  if (p.w == 0) {
    AutoRouteResult a = route_auto(r.luts, r.packing, r.placement, p, opt.max_width, opt.route);
    r.routing = std::move(a.routing);
    r.fabric = std::move(a.fabric);
    r.width_trials = std::move(a.trials);
  } else {
    r.fabric = build_fabric(p);
    r.routing = route(r.luts, r.packing, r.placement, r.fabric, opt.route);
    r.width_trials.push_back({p.w, r.routing.success});
    if (!r.routing.success) throw Error("route: unroutable at channel width " + std::to_string(p.w));
  }
  r.bitstream = bitgen(r.luts, r.packing, r.placement, r.routing, r.fabric);
  r.binding = make_binding(design, r.luts, r.packing, r.placement, r.fabric);
  r.keyed = bind(r.fabric.netlist, r.fabric, r.binding);
  r.programmed = program(r.keyed, r.bitstream);
  return r;
}

FabricStats fabric_stats(const FlowResult& r) {
  if (!r.routing.success) throw Error("fabric_stats: implementation is not routed");
  FabricStats s;
  const ArchParams& p = r.fabric.params;
  s.used_clbs = static_cast<int>(r.packing.clusters.size());
  s.used_pads = static_cast<int>(r.binding.inputs.size() + r.binding.outputs.size());
  s.block_utilization = static_cast<double>(s.used_clbs) / p.num_clbs();
  s.io_utilization = static_cast<double>(s.used_pads) / p.num_pads();
  s.bitstream_size = r.fabric.config_size();
  s.channel_width = p.w;
  return s;
}

SizeSearchResult size_search(const Netlist& design, const ArchParams& base, const SizeSearchOptions& opt) {
  const Netlist luts = lut_map(design, base.k, opt.flow.map);
  int used_io = static_cast<int>(luts.outputs().size());
  {
    std::set<NetId> read;
    for (const Cell& c : luts.cells())
      for (NetId x : c.inputs) read.insert(x);
    for (NetId o : luts.outputs()) read.insert(o);
    for (NetId in : luts.inputs()) used_io += read.count(in) ? 1 : 0;
  }

  struct Candidate {
    ArchParams p;
    int cap;
    std::tuple<int, int, int, int, int> key;
  };
  std::vector<Candidate> cands;
  for (int n = 1; n <= opt.max_n; ++n) {
    ArchParams p = base;
    p.n = n;
    p.w = base.w;
    // Cluster count reachable with each per-cluster cap.
    std::map<int, int> cap_for_clusters;
    for (int cap = n; cap >= 1; --cap) {
      try {
        const int c = static_cast<int>(pack(luts, p, cap).clusters.size());
        cap_for_clusters.emplace(c, cap);
      } catch (const Error&) {
        break;  // a unit does not fit a CLB at this N
      }
    }
    for (int gw = 1; gw <= opt.max_grid; ++gw)
      for (int gh = 1; gh <= opt.max_grid; ++gh) {
        auto it = cap_for_clusters.find(gw * gh);
        if (it == cap_for_clusters.end()) continue;
        for (int io = 1; io <= opt.max_io_per_tile; ++io) {
          ArchParams q = p;
          q.grid_w = gw;
          q.grid_h = gh;
          q.io_per_tile = io;
          const int pads = q.num_pads();
          if (used_io > pads) continue;
          if (!opt.relax_io && used_io < opt.min_io_utilization * pads - 1e-12) continue;
          cands.push_back({q, it->second, {gw * gh * n, io, gw * gh, gw, gh}});
        }
      }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.key < b.key; });

  SizeSearchResult res;
  for (const Candidate& c : cands) {
    ++res.candidates_tried;
    FlowOptions fo = opt.flow;
    fo.max_bles = c.cap;
    try {
      FlowResult r = run_flow(design, c.p, fo);
      const FabricStats s = fabric_stats(r);
      if (s.block_utilization < 1.0) continue;
      if (!opt.relax_io && s.io_utilization < opt.min_io_utilization) continue;
      res.params = r.fabric.params;
      res.stats = s;
      res.max_bles = c.cap;
      res.flow = std::move(r);
      return res;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("size_search: no fabric within bounds reaches full block use and " +
              std::to_string(static_cast<int>(opt.min_io_utilization * 100)) + "% I/O use (" +
              std::to_string(used_io) + " I/Os)");
}

}  // namespace redactor

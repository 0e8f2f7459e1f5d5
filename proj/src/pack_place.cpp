#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "redactor/cad.hpp"

namespace redactor {

namespace {

std::vector<NetId> unit_inputs(const Netlist& n, const BleUnit& u) {
  std::vector<NetId> in;
  for (CellId l : u.luts)
    for (NetId x : n.cell(l).inputs) in.push_back(x);
  std::sort(in.begin(), in.end());
  in.erase(std::unique(in.begin(), in.end()), in.end());
  return in;
}

const std::string& unit_name(const Netlist& n, const BleUnit& u) { return n.net_name(u.outputs[0]); }

// Units whose combinational output reaches another unit's pins must not form
// a cycle once fractured pairs share their pins.
bool unit_graph_acyclic(const Netlist& n, const std::vector<BleUnit>& units) {
  std::map<NetId, int> comb_out;
  for (std::size_t i = 0; i < units.size(); ++i)
    for (std::size_t j = 0; j < units[i].luts.size(); ++j)
      if (units[i].dffs[j] == kNoCell) comb_out[units[i].outputs[j]] = static_cast<int>(i);
  std::vector<std::vector<int>> succ(units.size());
  for (std::size_t i = 0; i < units.size(); ++i)
    for (NetId in : unit_inputs(n, units[i]))
      if (auto it = comb_out.find(in); it != comb_out.end()) succ[it->second].push_back(static_cast<int>(i));
  std::vector<int> state(units.size(), 0);
  std::vector<std::pair<int, std::size_t>> stack;
  for (std::size_t r = 0; r < units.size(); ++r) {
    if (state[r]) continue;
    stack.push_back({static_cast<int>(r), 0});
    state[r] = 1;
    while (!stack.empty()) {
      auto& [v, e] = stack.back();
      if (e < succ[v].size()) {
        const int w = succ[v][e++];
        if (state[w] == 1) return false;
        if (state[w] == 0) {
          state[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        state[v] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

std::vector<BleUnit> make_units(const Netlist& n, const ArchParams& p) {
  std::map<NetId, CellId> ff_of;
  for (CellId ff : n.dffs()) ff_of[n.cell(ff).inputs[0]] = ff;
  std::vector<BleUnit> units;
  for (CellId c = 0; c < n.num_cells(); ++c) {
    const Cell& cell = n.cell(c);
    if (cell.kind == CellKind::Dff) continue;
    if (cell.kind != CellKind::Lut) throw Error("pack: network must contain only LUT and DFF cells");
    if (cell.lut_size() > p.k) throw Error("pack: LUT wider than K");
    BleUnit u;
    u.luts.push_back(c);
    auto it = ff_of.find(cell.output);
    u.dffs.push_back(it == ff_of.end() ? kNoCell : it->second);
    u.outputs.push_back(it == ff_of.end() ? cell.output : n.cell(it->second).output);
    units.push_back(std::move(u));
  }
  std::sort(units.begin(), units.end(),
            [&](const BleUnit& a, const BleUnit& b) { return unit_name(n, a) < unit_name(n, b); });
  if (p.ble_kind != BleKind::Flut) return units;

  // Pair LUTs of at most K-1 inputs into fractured BLEs, most shared inputs first.
  std::vector<char> taken(units.size(), 0);
  std::vector<BleUnit> out;
  const std::size_t limit = static_cast<std::size_t>(p.k - 1);
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (taken[i]) continue;
    taken[i] = 1;
    const auto in_i = unit_inputs(n, units[i]);
    if (in_i.size() > limit) {
      out.push_back(units[i]);
      continue;
    }
    int best = -1;
    std::size_t best_shared = 0;
    for (std::size_t j = i + 1; j < units.size(); ++j) {
      if (taken[j]) continue;
      const auto in_j = unit_inputs(n, units[j]);
      std::vector<NetId> uni;
      std::set_union(in_i.begin(), in_i.end(), in_j.begin(), in_j.end(), std::back_inserter(uni));
      if (uni.size() > limit) continue;
      const std::size_t shared = in_i.size() + in_j.size() - uni.size();
      if (best >= 0 && shared <= best_shared) continue;
      BleUnit merged = units[i];
      merged.luts.push_back(units[j].luts[0]);
      merged.dffs.push_back(units[j].dffs[0]);
      merged.outputs.push_back(units[j].outputs[0]);
      std::vector<BleUnit> trial = out;
      trial.push_back(merged);
      for (std::size_t r = i + 1; r < units.size(); ++r)
        if (!taken[r] && r != j) trial.push_back(units[r]);
      if (!unit_graph_acyclic(n, trial)) continue;
      best = static_cast<int>(j);
      best_shared = shared;
    }
    if (best < 0) {
      out.push_back(units[i]);
      continue;
    }
    taken[best] = 1;
    BleUnit merged = units[i];
    merged.luts.push_back(units[best].luts[0]);
    merged.dffs.push_back(units[best].dffs[0]);
    merged.outputs.push_back(units[best].outputs[0]);
    out.push_back(std::move(merged));
  }
  return out;
}

std::size_t external_inputs(const Netlist& n, const std::vector<BleUnit>& units, const std::vector<int>& members,
                            int extra) {
  std::set<NetId> in, local;
  auto add = [&](int u) {
    for (NetId x : unit_inputs(n, units[u])) in.insert(x);
    for (NetId o : units[u].outputs) local.insert(o);
  };
  for (int u : members) add(u);
  if (extra >= 0) add(extra);
  std::size_t count = 0;
  for (NetId x : in) count += !local.count(x);
  return count;
}

}  // namespace

Packing pack(const Netlist& luts, const ArchParams& p, int max_bles) {
  validate(p);
  Packing pk;
  pk.units = make_units(luts, p);
  const std::size_t inputs = static_cast<std::size_t>(p.clb_inputs());
  const std::size_t cap = static_cast<std::size_t>(max_bles > 0 ? std::min(max_bles, p.n) : p.n);
  pk.cluster_of.assign(pk.units.size(), -1);
  std::vector<std::set<NetId>> nets(pk.units.size());
  for (std::size_t u = 0; u < pk.units.size(); ++u) {
    for (NetId x : unit_inputs(luts, pk.units[u])) nets[u].insert(x);
    for (NetId o : pk.units[u].outputs) nets[u].insert(o);
    if (external_inputs(luts, pk.units, {}, static_cast<int>(u)) > inputs)
      throw Error("pack: unit '" + unit_name(luts, pk.units[u]) + "' needs more than I inputs");
  }
  for (;;) {
    int seed = -1;
    std::size_t seed_inputs = 0;
    for (std::size_t u = 0; u < pk.units.size(); ++u) {
      if (pk.cluster_of[u] >= 0) continue;
      const auto count = unit_inputs(luts, pk.units[u]).size();
      if (seed < 0 || count > seed_inputs) seed = static_cast<int>(u), seed_inputs = count;
    }
    if (seed < 0) break;
    const int cid = static_cast<int>(pk.clusters.size());
    pk.clusters.push_back({seed});
    pk.cluster_of[seed] = cid;
    std::set<NetId> cluster_nets = nets[seed];
    while (pk.clusters[cid].size() < cap) {
      int best = -1;
      std::size_t best_gain = 0;
      for (std::size_t u = 0; u < pk.units.size(); ++u) {
        if (pk.cluster_of[u] >= 0) continue;
        if (external_inputs(luts, pk.units, pk.clusters[cid], static_cast<int>(u)) > inputs) continue;
        std::size_t gain = 0;
        for (NetId x : nets[u]) gain += cluster_nets.count(x);
        if (best < 0 || gain > best_gain) best = static_cast<int>(u), best_gain = gain;
      }
      if (best < 0) break;
      pk.clusters[cid].push_back(best);
      pk.cluster_of[best] = cid;
      cluster_nets.insert(nets[best].begin(), nets[best].end());
    }
  }
  return pk;
}

std::vector<NetId> cluster_inputs(const Netlist& luts, const Packing& pk, int cluster) {
  std::set<NetId> in, local;
  for (int u : pk.clusters.at(cluster)) {
    for (NetId x : unit_inputs(luts, pk.units[u])) in.insert(x);
    for (NetId o : pk.units[u].outputs) local.insert(o);
  }
  std::vector<NetId> out;
  for (NetId x : in)
    if (!local.count(x)) out.push_back(x);
  return out;
}

// Placement ------------------------------------------------------------------

namespace {

// Blocks: clusters [0, C), then I/O ports [C, C + ios).
struct PlaceNet {
  std::vector<int> blocks;
};

struct PlaceModel {
  int clusters = 0;
  std::vector<int> io_is_input;  // per I/O port: index into luts.inputs() or -1
  std::vector<int> io_output;    // per I/O port: index into luts.outputs() or -1
  std::vector<PlaceNet> nets;
  std::vector<std::vector<int>> nets_of_block;
};

PlaceModel build_model(const Netlist& luts, const Packing& pk) {
  PlaceModel m;
  m.clusters = static_cast<int>(pk.clusters.size());
  std::map<NetId, int> driver_block;
  for (std::size_t u = 0; u < pk.units.size(); ++u)
    for (NetId o : pk.units[u].outputs) driver_block[o] = pk.cluster_of[u];
  std::map<NetId, std::set<int>> readers;
  for (std::size_t u = 0; u < pk.units.size(); ++u)
    for (NetId x : unit_inputs(luts, pk.units[u])) readers[x].insert(pk.cluster_of[u]);
  std::map<NetId, int> pi_index;
  for (std::size_t i = 0; i < luts.inputs().size(); ++i) pi_index[luts.inputs()[i]] = static_cast<int>(i);

  std::map<NetId, std::vector<int>> blocks;
  for (std::size_t i = 0; i < luts.inputs().size(); ++i) {
    const NetId in = luts.inputs()[i];
    if (!readers.count(in)) continue;
    const int io = m.clusters + static_cast<int>(m.io_is_input.size());
    m.io_is_input.push_back(static_cast<int>(i));
    m.io_output.push_back(-1);
    blocks[in].push_back(io);
  }
  for (std::size_t o = 0; o < luts.outputs().size(); ++o) {
    const int io = m.clusters + static_cast<int>(m.io_is_input.size());
    m.io_is_input.push_back(-1);
    m.io_output.push_back(static_cast<int>(o));
    blocks[luts.outputs()[o]].push_back(io);
  }
  for (auto& [net, rs] : readers) {
    if (auto it = driver_block.find(net); it != driver_block.end()) blocks[net].push_back(it->second);
    for (int c : rs) blocks[net].push_back(c);
  }
  for (auto& [net, bl] : blocks) {
    if (auto it = driver_block.find(net); it != driver_block.end()) bl.push_back(it->second);
    std::sort(bl.begin(), bl.end());
    bl.erase(std::unique(bl.begin(), bl.end()), bl.end());
    if (bl.size() >= 2) m.nets.push_back({bl});
  }
  m.nets_of_block.assign(m.clusters + m.io_is_input.size(), {});
  for (std::size_t i = 0; i < m.nets.size(); ++i)
    for (int b : m.nets[i].blocks) m.nets_of_block[b].push_back(static_cast<int>(i));
  return m;
}

struct Coords {
  std::vector<std::pair<int, int>> clb;  // per CLB site
  std::vector<std::pair<int, int>> pad;  // per pad
};

Coords coords(const ArchParams& p) {
  Coords c;
  for (int y = 1; y <= p.grid_h; ++y)
    for (int x = 1; x <= p.grid_w; ++x) c.clb.push_back({x, y});
  for (const PadLocation& l : pad_sites(p)) c.pad.push_back({l.x, l.y});
  return c;
}

class Placer {
 public:
  Placer(const PlaceModel& m, const ArchParams& p) : m_(m), xy_(coords(p)) {
    loc_.assign(m.nets_of_block.size(), -1);
  }

  std::pair<int, int> pos(int block) const {
    return block < m_.clusters ? xy_.clb[loc_[block]] : xy_.pad[loc_[block]];
  }

  double net_cost(int net) const {
    int x0 = 1 << 30, x1 = -1, y0 = 1 << 30, y1 = -1;
    for (int b : m_.nets[net].blocks) {
      if (loc_[b] < 0) continue;
      const auto [x, y] = pos(b);
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    return x1 < 0 ? 0.0 : (x1 - x0) + (y1 - y0);
  }

  double total() const {
    double c = 0;
    for (std::size_t i = 0; i < m_.nets.size(); ++i) c += net_cost(static_cast<int>(i));
    return c;
  }

  // Greedy pad assignment for all I/O blocks given the cluster locations.
  void assign_pads() {
    std::vector<char> used(xy_.pad.size(), 0);
    for (std::size_t b = m_.clusters; b < loc_.size(); ++b) loc_[b] = -1;
    for (std::size_t b = m_.clusters; b < loc_.size(); ++b) {
      int best = -1;
      double best_cost = 0;
      for (std::size_t pad = 0; pad < xy_.pad.size(); ++pad) {
        if (used[pad]) continue;
        loc_[b] = static_cast<int>(pad);
        double c = 0;
        for (int net : m_.nets_of_block[b]) c += net_cost(net);
        if (best < 0 || c < best_cost) best = static_cast<int>(pad), best_cost = c;
      }
      loc_[b] = best;
      used[best] = 1;
    }
  }

  const PlaceModel& m_;
  Coords xy_;
  std::vector<int> loc_;
};

}  // namespace

double placement_cost(const Netlist& luts, const Packing& pk, const ArchParams& p, const Placement& pl) {
  const PlaceModel m = build_model(luts, pk);
  Placer pr(m, p);
  for (int c = 0; c < m.clusters; ++c) pr.loc_[c] = pl.clb_site[c];
  for (std::size_t i = 0; i < m.io_is_input.size(); ++i) {
    const int b = m.clusters + static_cast<int>(i);
    pr.loc_[b] = m.io_is_input[i] >= 0 ? pl.input_pad[m.io_is_input[i]] : pl.output_pad[m.io_output[i]];
  }
  return pr.total();
}

Placement place(const Netlist& luts, const Packing& pk, const ArchParams& p, std::uint64_t seed) {
  const PlaceModel m = build_model(luts, pk);
  const int sites = p.num_clbs();
  const int pads = p.num_pads();
  const int ios = static_cast<int>(m.io_is_input.size());
  if (m.clusters > sites) throw Error("place: " + std::to_string(m.clusters) + " CLBs do not fit " + std::to_string(sites) + " sites");
  if (ios > pads) throw Error("place: " + std::to_string(ios) + " I/Os do not fit " + std::to_string(pads) + " pads");
  Placer pr(m, p);

  // Exhaustive search over injective cluster placements when small.
  double perms = 1;
  for (int i = 0; i < m.clusters; ++i) perms *= sites - i;
  if (m.clusters <= 4 && perms <= 20000) {
    std::vector<int> best_loc;
    double best = 0;
    std::vector<int> chosen(m.clusters, 0);
    std::vector<char> used(sites, 0);
    auto rec = [&](auto&& self, int c) -> void {
      if (c == m.clusters) {
        for (int i = 0; i < m.clusters; ++i) pr.loc_[i] = chosen[i];
        pr.assign_pads();
        const double cost = pr.total();
        if (best_loc.empty() || cost < best) best = cost, best_loc = pr.loc_;
        return;
      }
      for (int s = 0; s < sites; ++s) {
        if (used[s]) continue;
        used[s] = 1;
        chosen[c] = s;
        self(self, c + 1);
        used[s] = 0;
      }
    };
    rec(rec, 0);
    if (best_loc.empty()) pr.assign_pads(), best_loc = pr.loc_;
    pr.loc_ = best_loc;
  } else {
    std::mt19937_64 rng(seed);
    for (int c = 0; c < m.clusters; ++c) pr.loc_[c] = c;
    pr.assign_pads();
    // occupant per CLB site / pad (-1 free)
    std::vector<int> site_of(sites, -1), pad_of(pads, -1);
    for (int c = 0; c < m.clusters; ++c) site_of[pr.loc_[c]] = c;
    for (int b = m.clusters; b < m.clusters + ios; ++b) pad_of[pr.loc_[b]] = b;
    double cost = pr.total();
    const int blocks = m.clusters + ios;

    auto affected_cost = [&](int a, int b) {
      std::vector<int> nets = m.nets_of_block[a];
      if (b >= 0) nets.insert(nets.end(), m.nets_of_block[b].begin(), m.nets_of_block[b].end());
      std::sort(nets.begin(), nets.end());
      nets.erase(std::unique(nets.begin(), nets.end()), nets.end());
      double c = 0;
      for (int n : nets) c += pr.net_cost(n);
      return c;
    };
    // Proposes moving `block` to a random location; returns the displaced block.
    auto propose = [&](int block, int& target) {
      if (block < m.clusters) {
        target = static_cast<int>(rng() % sites);
        return site_of[target];
      }
      target = static_cast<int>(rng() % pads);
      return pad_of[target];
    };
    // Moves `block` to `target`, swapping the occupant (if any) into its old spot.
    auto swap_to = [&](int block, int target) {
      auto& occ = block < m.clusters ? site_of : pad_of;
      const int from = pr.loc_[block];
      const int other = occ[target];
      pr.loc_[block] = target;
      occ[target] = block;
      occ[from] = other;
      if (other >= 0) pr.loc_[other] = from;
    };
    auto try_move = [&](double temperature, bool force) {
      const int block = static_cast<int>(rng() % blocks);
      int target = 0;
      const int other = propose(block, target);
      if (target == pr.loc_[block]) return false;
      const double before = affected_cost(block, other);
      const int from = pr.loc_[block];
      swap_to(block, target);
      const double delta = affected_cost(block, other) - before;
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      if (force || delta <= 0 || (temperature > 0 && uni(rng) < std::exp(-delta / temperature))) {
        cost += delta;
        return true;
      }
      swap_to(block, from);
      return false;
    };

    if (blocks > 0 && !m.nets.empty()) {
      // Initial temperature: 20x the standard deviation of costs over random moves.
      std::vector<double> samples;
      for (int i = 0; i < std::max(blocks, 10); ++i) {
        try_move(0, true);
        samples.push_back(cost);
      }
      const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
      double var = 0;
      for (double s : samples) var += (s - mean) * (s - mean);
      double temperature = 20.0 * std::sqrt(var / samples.size());
      const int moves = static_cast<int>(std::ceil(100.0 * std::pow(std::max(1, m.clusters), 1.33)));
      std::vector<int> best_loc = pr.loc_;
      double best = cost;
      for (int round = 0; round < 300 && temperature > 1e-3; ++round) {
        for (int i = 0; i < moves; ++i) {
          try_move(temperature, false);
          if (cost < best - 1e-9) best = cost, best_loc = pr.loc_;
        }
        temperature *= 0.9;
      }
      // Final greedy quench.
      for (int i = 0; i < moves; ++i) {
        try_move(0, false);
        if (cost < best - 1e-9) best = cost, best_loc = pr.loc_;
      }
      pr.loc_ = best_loc;
    }
  }

  Placement pl;
  pl.clb_site.assign(pr.loc_.begin(), pr.loc_.begin() + m.clusters);
  pl.input_pad.assign(luts.inputs().size(), -1);
  pl.output_pad.assign(luts.outputs().size(), -1);
  for (int i = 0; i < ios; ++i) {
    const int b = m.clusters + i;
    if (m.io_is_input[i] >= 0) pl.input_pad[m.io_is_input[i]] = pr.loc_[b];
    else pl.output_pad[m.io_output[i]] = pr.loc_[b];
  }
  pl.cost = pr.total();
  return pl;
}

}  // namespace redactor

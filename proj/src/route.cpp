#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "redactor/cad.hpp"

namespace redactor {

std::size_t Routing::wirelength(const Fabric& f) const {
  std::size_t wl = 0;
  for (const RouteTree& t : nets)
    for (const auto& [node, parent] : t.nodes) {
      const RrNode& n = f.nodes[node];
      if (n.type == RrType::ChanX || n.type == RrType::ChanY) wl += static_cast<std::size_t>(n.hi - n.lo + 1);
    }
  return wl;
}

namespace {

struct NetTerminals {
  NetId net;
  std::int32_t source;
  std::vector<std::int32_t> sinks;
};

// Where a unit output leaves its CLB: source node of (site, ble, output).
std::vector<NetTerminals> terminals(const Netlist& luts, const Packing& pk, const Placement& pl, const Fabric& f) {
  const int outs = f.params.ble_outputs();
  std::map<NetId, std::int32_t> source;
  std::map<NetId, int> driver_cluster;
  for (std::size_t c = 0; c < pk.clusters.size(); ++c) {
    const ClbSite& clb = f.clbs.at(pl.clb_site[c]);
    for (std::size_t b = 0; b < pk.clusters[c].size(); ++b) {
      const BleUnit& u = pk.units[pk.clusters[c][b]];
      for (std::size_t o = 0; o < u.outputs.size(); ++o) {
        source[u.outputs[o]] = clb.source_nodes[b * outs + o];
        driver_cluster[u.outputs[o]] = static_cast<int>(c);
      }
    }
  }
  for (std::size_t i = 0; i < luts.inputs().size(); ++i)
    if (pl.input_pad[i] >= 0) source[luts.inputs()[i]] = f.pads.at(pl.input_pad[i]).source_node;

  std::map<NetId, std::set<std::int32_t>> sinks;
  for (std::size_t c = 0; c < pk.clusters.size(); ++c)
    for (NetId x : cluster_inputs(luts, pk, static_cast<int>(c))) sinks[x].insert(f.clbs.at(pl.clb_site[c]).sink_node);
  for (std::size_t o = 0; o < luts.outputs().size(); ++o)
    sinks[luts.outputs()[o]].insert(f.pads.at(pl.output_pad[o]).sink_node);

  std::vector<NetTerminals> out;
  for (auto& [net, s] : sinks) {
    auto it = source.find(net);
    if (it == source.end()) throw Error("route: net '" + luts.net_name(net) + "' has no placed driver");
    out.push_back({net, it->second, {s.begin(), s.end()}});
  }
  return out;
}

class PathFinder {
 public:
  PathFinder(const Fabric& f, const RouteOptions& opt)
      : f_(f), opt_(opt), occ_(f.nodes.size(), 0), hist_(f.nodes.size(), 0.0),
        cost_(f.nodes.size(), 0.0), prev_(f.nodes.size(), -1), stamp_(f.nodes.size(), 0) {}

  Routing run(const std::vector<NetTerminals>& nets) {
    Routing r;
    r.width = f_.params.w;
    r.nets.resize(nets.size());
    double pres = opt_.initial_present;
    pres_ = pres;
    for (int it = 1; it <= opt_.max_iterations; ++it) {
      r.iterations = it;
      for (std::size_t i = 0; i < nets.size(); ++i) {
        rip_up(r.nets[i]);
        if (!route_net(nets[i], r.nets[i])) return r;  // a sink is unreachable at this width
      }
      bool congested = false;
      for (std::size_t v = 0; v < f_.nodes.size(); ++v)
        if (occ_[v] > f_.nodes[v].capacity) {
          congested = true;
          hist_[v] += opt_.history_increment * (occ_[v] - f_.nodes[v].capacity);
        }
      if (!congested) {
        r.success = true;
        return r;
      }
      pres *= opt_.present_growth;
      pres_ = pres;
    }
    return r;
  }

 private:
  double node_cost(std::int32_t v) const {
    const RrNode& n = f_.nodes[v];
    const int over = std::max(0, occ_[v] + 1 - n.capacity);
    return (1.0 + hist_[v]) * (1.0 + pres_ * over);
  }

  void rip_up(RouteTree& t) {
    for (const auto& [node, parent] : t.nodes) --occ_[node];
    t.nodes.clear();
  }

  bool route_net(const NetTerminals& net, RouteTree& t) {
    t.net = net.net;
    t.source = net.source;
    t.sinks = net.sinks;
    t.nodes.push_back({net.source, -1});
    ++occ_[net.source];
    std::set<std::int32_t> tree{net.source};
    for (std::int32_t target : net.sinks) {
      ++epoch_;
      using Item = std::pair<double, std::int32_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      for (std::int32_t v : tree) {
        visit(v, 0.0, -1);
        pq.push({0.0, v});
      }
      bool found = false;
      while (!pq.empty()) {
        const auto [c, v] = pq.top();
        pq.pop();
        if (c > cost_[v]) continue;
        if (v == target) {
          found = true;
          break;
        }
        for (const RrEdge& e : f_.nodes[v].out) {
          const auto w = static_cast<std::int32_t>(e.to);
          const RrNode& wn = f_.nodes[w];
          if (wn.type == RrType::Sink && w != target) continue;
          if (tree.count(w)) continue;
          const double nc = c + node_cost(w);
          if (stamp_[w] != epoch_ || nc < cost_[w]) {
            visit(w, nc, v);
            pq.push({nc, w});
          }
        }
      }
      if (!found) return false;
      std::vector<std::int32_t> path;
      for (std::int32_t v = target; !tree.count(v); v = prev_[v]) path.push_back(v);
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        t.nodes.push_back({*it, prev_[*it]});
        tree.insert(*it);
        ++occ_[*it];
      }
    }
    return true;
  }

  void visit(std::int32_t v, double c, std::int32_t from) {
    stamp_[v] = epoch_;
    cost_[v] = c;
    prev_[v] = from;
  }

  const Fabric& f_;
  RouteOptions opt_;
  double pres_ = 0.5;
  std::vector<int> occ_;
  std::vector<double> hist_;
  std::vector<double> cost_;
  std::vector<std::int32_t> prev_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

}  // namespace

Routing route(const Netlist& luts, const Packing& pk, const Placement& pl, const Fabric& f, const RouteOptions& opt) {
  PathFinder pf(f, opt);
  return pf.run(terminals(luts, pk, pl, f));
}

AutoRouteResult route_auto(const Netlist& luts, const Packing& pk, const Placement& pl, ArchParams p, int max_width,
                           const RouteOptions& opt) {
  AutoRouteResult res;
  std::map<int, std::pair<Routing, Fabric>> done;
  auto attempt = [&](int w) {
    p.w = w;
    Fabric f = build_fabric(p);
    Routing r = route(luts, pk, pl, f, opt);
    res.trials.push_back({w, r.success});
    const bool ok = r.success;
    if (ok) done.emplace(w, std::make_pair(std::move(r), std::move(f)));
    return ok;
  };
  int lo = 0;  // largest failed width
  int hi = 0;  // smallest routed width
  for (int w = 2; w <= max_width; w *= 2) {
    if (attempt(w)) {
      hi = w;
      break;
    }
    lo = w;
  }
  if (hi == 0) throw Error("route: unroutable up to channel width " + std::to_string(max_width));
  while (hi - lo > 2) {
    const int mid = ((lo + hi) / 2) & ~1;
    if (attempt(mid)) hi = mid;
    else lo = mid;
  }
  auto& [r, f] = done.at(hi);
  res.routing = std::move(r);
  res.fabric = std::move(f);
  return res;
}

}  // namespace redactor

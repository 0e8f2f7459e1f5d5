#include "redactor/graph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace redactor {
namespace {

struct Succ {
  CellId cell;
  std::uint32_t pin;
};

std::vector<std::vector<Succ>> successors(const Netlist& n) {
  std::vector<std::vector<Succ>> succ(n.num_cells());
  for (CellId v = 0; v < n.num_cells(); ++v) {
    const Cell& c = n.cell(v);
    for (std::uint32_t p = 0; p < c.inputs.size(); ++p) {
      const CellId u = n.driver(c.inputs[p]);
      if (u == kNoCell || n.cell(u).kind == CellKind::Dff) continue;
      succ[u].push_back({v, p});
    }
  }
  return succ;
}

CellId edge_source(const Netlist& n, PinEdge e) { return n.driver(n.cell(e.cell).inputs[e.pin]); }

}  // namespace

std::vector<std::vector<CellId>> find_sccs(const Netlist& n) {
  const auto succ = successors(n);
  const std::size_t count = n.num_cells();
  std::vector<int> index(count, -1), low(count, 0);
  std::vector<bool> on_stack(count, false);
  std::vector<CellId> stack;
  std::vector<std::vector<CellId>> out;
  int next = 0;

  struct Frame {
    CellId v;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (CellId root = 0; root < count; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < succ[f.v].size()) {
        const CellId w = succ[f.v][f.edge++].cell;
        if (index[w] < 0) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const CellId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<CellId> comp;
        CellId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

bool is_loop(const Netlist& n, const std::vector<CellId>& component) {
  if (component.size() > 1) return true;
  if (component.empty()) return false;
  const CellId c = component[0];
  if (n.cell(c).kind == CellKind::Dff) return false;
  for (NetId in : n.cell(c).inputs)
    if (n.driver(in) == c) return true;
  return false;
}

std::vector<bool> loop_cells(const Netlist& n) {
  std::vector<bool> out(n.num_cells(), false);
  for (const auto& comp : find_sccs(n))
    if (is_loop(n, comp))
      for (CellId c : comp) out[c] = true;
  return out;
}

std::vector<PinEdge> feedback_edge_set(const Netlist& n) {
  const auto succ = successors(n);
  std::vector<std::uint8_t> state(n.num_cells(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<PinEdge> back;
  struct Frame {
    CellId v;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (CellId root = 0; root < n.num_cells(); ++root) {
    if (state[root]) continue;
    state[root] = 1;
    call.push_back({root, 0});
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < succ[f.v].size()) {
        const Succ s = succ[f.v][f.edge++];
        if (state[s.cell] == 1) {
          back.push_back({s.cell, s.pin});
        } else if (state[s.cell] == 0) {
          state[s.cell] = 1;
          call.push_back({s.cell, 0});
        }
        continue;
      }
      state[f.v] = 2;
      call.pop_back();
    }
  }
  return back;
}

std::vector<CellId> topological_order(const Netlist& n, const std::vector<PinEdge>& removed) {
  const auto succ = successors(n);
  std::vector<std::vector<bool>> cut(n.num_cells());
  for (const PinEdge& e : removed) {
    auto& v = cut[e.cell];
    if (v.empty()) v.assign(n.cell(e.cell).inputs.size(), false);
    v[e.pin] = true;
  }
  auto is_cut = [&](CellId c, std::uint32_t p) { return !cut[c].empty() && cut[c][p]; };
  std::vector<int> indeg(n.num_cells(), 0);
  for (CellId u = 0; u < n.num_cells(); ++u)
    for (const Succ& s : succ[u])
      if (!is_cut(s.cell, s.pin)) ++indeg[s.cell];
  std::vector<CellId> order;
  order.reserve(n.num_cells());
  for (CellId c = 0; c < n.num_cells(); ++c)
    if (indeg[c] == 0) order.push_back(c);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const CellId u = order[head];
    for (const Succ& s : succ[u])
      if (!is_cut(s.cell, s.pin) && --indeg[s.cell] == 0) order.push_back(s.cell);
  }
  if (order.size() != n.num_cells()) throw Error("netlist '" + n.name() + "' has a combinational loop");
  return order;
}

bool is_acyclic(const Netlist& n) {
  for (const auto& comp : find_sccs(n))
    if (is_loop(n, comp)) return false;
  return true;
}

std::vector<PinEdge> cycle_through(const Netlist& n, PinEdge edge) {
  const CellId from = edge_source(n, edge);
  if (from == kNoCell || n.cell(from).kind == CellKind::Dff) return {};
  if (from == edge.cell) return {edge};
  const auto succ = successors(n);
  std::unordered_map<CellId, PinEdge> via;
  std::deque<CellId> queue{edge.cell};
  via.emplace(edge.cell, PinEdge{kNoCell, 0});
  while (!queue.empty()) {
    const CellId u = queue.front();
    queue.pop_front();
    if (u == from) break;
    for (const Succ& s : succ[u])
      if (via.emplace(s.cell, PinEdge{s.cell, s.pin}).second) queue.push_back(s.cell);
  }
  if (!via.count(from)) return {};
  std::vector<PinEdge> path;
  for (CellId c = from; c != edge.cell;) {
    const PinEdge e = via.at(c);
    path.push_back(e);
    c = edge_source(n, e);
  }
  std::reverse(path.begin(), path.end());
  path.insert(path.begin(), edge);
  return path;
}

std::optional<std::vector<PinEdge>> find_active_cycle(const Netlist& n, std::span<const std::uint8_t> key_values) {
  const auto keys = n.key_inputs();
  if (key_values.size() != keys.size()) throw Error("find_active_cycle: key width mismatch");
  std::unordered_map<NetId, bool> key_of;
  for (std::size_t i = 0; i < keys.size(); ++i) key_of.emplace(keys[i], key_values[i] != 0);

  auto succ = successors(n);
  for (auto& list : succ) {
    std::erase_if(list, [&](const Succ& s) {
      const Cell& c = n.cell(s.cell);
      if (c.kind != CellKind::Mux2) return false;
      auto it = key_of.find(c.inputs[0]);
      if (it == key_of.end() || s.pin == 0) return false;
      return s.pin != (it->second ? 2u : 1u);
    });
  }

  std::vector<std::uint8_t> state(n.num_cells(), 0);
  struct Frame {
    CellId v;
    std::size_t edge;
    PinEdge in;
  };
  std::vector<Frame> call;
  for (CellId root = 0; root < n.num_cells(); ++root) {
    if (state[root]) continue;
    state[root] = 1;
    call.push_back({root, 0, {kNoCell, 0}});
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < succ[f.v].size()) {
        const Succ s = succ[f.v][f.edge++];
        if (state[s.cell] == 1) {
          std::vector<PinEdge> cycle{{s.cell, s.pin}};
          for (auto it = call.rbegin(); it != call.rend() && it->v != s.cell; ++it) cycle.push_back(it->in);
          std::reverse(cycle.begin() + 1, cycle.end());
          return cycle;
        }
        if (state[s.cell] == 0) {
          state[s.cell] = 1;
          call.push_back({s.cell, 0, {s.cell, s.pin}});
        }
        continue;
      }
      state[f.v] = 2;
      call.pop_back();
    }
  }
  return std::nullopt;
}

bool output_cone_acyclic(const Netlist& n) {
  const auto loops = loop_cells(n);
  std::vector<bool> seen(n.num_nets(), false);
  std::vector<NetId> work(n.outputs().begin(), n.outputs().end());
  for (CellId d : n.dffs()) work.push_back(n.cell(d).inputs[0]);
  while (!work.empty()) {
    const NetId net = work.back();
    work.pop_back();
    if (seen[net]) continue;
    seen[net] = true;
    const CellId c = n.driver(net);
    if (c == kNoCell || n.cell(c).kind == CellKind::Dff) continue;
    if (loops[c]) return false;
    for (NetId in : n.cell(c).inputs) work.push_back(in);
  }
  return true;
}

}  // namespace redactor

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "redactor/cad.hpp"
#include "redactor/graph.hpp"

namespace redactor {

namespace {

// Subject graph: every node has at most three fanins (MUX2) or K (small LUTs).
enum class Op : std::uint8_t { Source, Const0, Const1, Buf, Not, And, Or, Xor, Mux, Lut };

struct Node {
  Op op = Op::Source;
  std::vector<int> fanins;
  std::uint64_t table = 0;
  std::int64_t net = -1;  // design net rooted at this node
};

using Cut = std::vector<int>;  // sorted node ids

struct CutInfo {
  Cut leaves;
  int depth = 0;
  double flow = 0;
};

class Mapper {
 public:
  Mapper(const Netlist& d, int k, const MapOptions& opt) : d_(d), k_(k), opt_(opt) {}

  Netlist run() {
    if (k_ < 2 || k_ > kMaxLutInputs) throw Error("lut_map: K out of range");
    build_subject();
    enumerate();
    return cover();
  }

 private:
  int add(Op op, std::vector<int> fanins, std::uint64_t table = 0) {
    nodes_.push_back({op, std::move(fanins), table, -1});
    return static_cast<int>(nodes_.size() - 1);
  }

  int tree(Op op, std::vector<int> xs) {
    while (xs.size() > 1) {
      std::vector<int> next;
      for (std::size_t i = 0; i + 1 < xs.size(); i += 2) next.push_back(add(op, {xs[i], xs[i + 1]}));
      if (xs.size() % 2) next.push_back(xs.back());
      xs = std::move(next);
    }
    return xs[0];
  }

  // Shannon expansion of a LUT wider than K on its last input.
  int lut_node(std::vector<int> ins, std::uint64_t table) {
    const std::size_t n = ins.size();
    if (n <= static_cast<std::size_t>(k_)) return add(Op::Lut, std::move(ins), table);
    const std::size_t half = std::size_t{1} << (n - 1);
    const std::uint64_t mask = half >= 64 ? ~0ull : (std::uint64_t{1} << half) - 1;
    const int sel = ins.back();
    ins.pop_back();
    const int lo = lut_node(ins, table & mask);
    const int hi = lut_node(ins, half >= 64 ? 0 : (table >> half) & mask);
    return add(Op::Mux, {sel, lo, hi});
  }

  void build_subject() {
    net_node_.assign(d_.num_nets(), -1);
    for (NetId in : d_.inputs()) {
      net_node_[in] = add(Op::Source, {});
      nodes_.back().net = in;
    }
    for (CellId c : d_.dffs()) {
      net_node_[d_.cell(c).output] = add(Op::Source, {});
      nodes_.back().net = d_.cell(c).output;
    }
    std::vector<CellId> order;
    try {
      order = topological_order(d_);
    } catch (const Error&) {
      throw Error("lut_map: design has a combinational loop");
    }
    for (CellId id : order) {
      const Cell& c = d_.cell(id);
      if (c.kind == CellKind::Dff) continue;
      std::vector<int> in;
      for (NetId n : c.inputs) in.push_back(net_node_[n]);
      int out = -1;
      switch (c.kind) {
        case CellKind::Const0: out = add(Op::Const0, {}); break;
        case CellKind::Const1: out = add(Op::Const1, {}); break;
        case CellKind::Buf: out = add(Op::Buf, in); break;
        case CellKind::Not: out = add(Op::Not, in); break;
        case CellKind::And: out = add(Op::Buf, {tree(Op::And, in)}); break;
        case CellKind::Or: out = add(Op::Buf, {tree(Op::Or, in)}); break;
        case CellKind::Xor: out = add(Op::Buf, {tree(Op::Xor, in)}); break;
        case CellKind::Nand: out = add(Op::Not, {tree(Op::And, in)}); break;
        case CellKind::Nor: out = add(Op::Not, {tree(Op::Or, in)}); break;
        case CellKind::Xnor: out = add(Op::Not, {tree(Op::Xor, in)}); break;
        case CellKind::Mux2: out = add(Op::Mux, in); break;
        case CellKind::Lut: out = lut_node(in, c.table); break;
        case CellKind::Dff: break;
      }
      nodes_[out].net = c.output;
      net_node_[c.output] = out;
    }
    fanout_.assign(nodes_.size(), 0);
    for (const Node& n : nodes_)
      for (int f : n.fanins) ++fanout_[f];
  }

  static Cut merge(const Cut& a, const Cut& b) {
    Cut out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  bool is_const(int v) const { return nodes_[v].op == Op::Const0 || nodes_[v].op == Op::Const1; }

  void enumerate() {
    cuts_.assign(nodes_.size(), {});
    best_.assign(nodes_.size(), {});
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
      const Node& n = nodes_[v];
      if (n.op == Op::Source) {
        best_[v] = {{static_cast<int>(v)}, 0, 0};
        cuts_[v] = {{static_cast<int>(v)}};
        continue;
      }
      if (is_const(static_cast<int>(v))) {
        best_[v] = {{}, 0, 0};
        cuts_[v] = {{}};
        continue;
      }
      std::vector<Cut> acc = {{}};
      for (int f : n.fanins) {
        std::vector<Cut> next;
        for (const Cut& a : acc)
          for (const Cut& b : cuts_[f]) {
            Cut m = merge(a, b);
            if (m.size() <= static_cast<std::size_t>(k_)) next.push_back(std::move(m));
          }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        acc = std::move(next);
      }
      std::vector<CutInfo> scored;
      for (Cut& c : acc) {
        CutInfo info{std::move(c), 1, 1.0};
        for (int leaf : info.leaves) {
          info.depth = std::max(info.depth, best_[leaf].depth + 1);
          info.flow += best_[leaf].flow / std::max(1, fanout_[leaf]);
        }
        scored.push_back(std::move(info));
      }
      std::sort(scored.begin(), scored.end(), [](const CutInfo& a, const CutInfo& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        if (a.flow != b.flow) return a.flow < b.flow;
        if (a.leaves.size() != b.leaves.size()) return a.leaves.size() < b.leaves.size();
        return a.leaves < b.leaves;
      });
      if (scored.size() > static_cast<std::size_t>(opt_.cuts_per_node)) scored.resize(opt_.cuts_per_node);
      best_[v] = scored.front();
      for (const CutInfo& c : scored) cuts_[v].push_back(c.leaves);
      cuts_[v].push_back({static_cast<int>(v)});
    }
  }

  // Truth table of node v over `leaves` (at most six).
  std::uint64_t cut_function(int v, const Cut& leaves) {
    static constexpr std::uint64_t kProj[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                                               0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
    std::map<int, std::uint64_t> memo;
    for (std::size_t i = 0; i < leaves.size(); ++i) memo[leaves[i]] = kProj[i];
    std::function<std::uint64_t(int)> eval = [&](int u) -> std::uint64_t {
      if (auto it = memo.find(u); it != memo.end()) return it->second;
      const Node& n = nodes_[u];
      std::vector<std::uint64_t> in;
      for (int f : n.fanins) in.push_back(eval(f));
      std::uint64_t r = 0;
      switch (n.op) {
        case Op::Source: throw Error("lut_map: cut does not separate node from sources");
        case Op::Const0: r = 0; break;
        case Op::Const1: r = ~0ull; break;
        case Op::Buf: r = in[0]; break;
        case Op::Not: r = ~in[0]; break;
        case Op::And: r = in[0] & in[1]; break;
        case Op::Or: r = in[0] | in[1]; break;
        case Op::Xor: r = in[0] ^ in[1]; break;
        case Op::Mux: r = (~in[0] & in[1]) | (in[0] & in[2]); break;
        case Op::Lut:
          for (unsigned bit = 0; bit < 64; ++bit) {
            unsigned idx = 0;
            for (std::size_t i = 0; i < in.size(); ++i) idx |= ((in[i] >> bit) & 1) << i;
            r |= ((n.table >> idx) & 1) << bit;
          }
          break;
      }
      memo[u] = r;
      return r;
    };
    const std::uint64_t full = eval(v);
    const unsigned width = 1u << leaves.size();
    return width >= 64 ? full : full & ((std::uint64_t{1} << width) - 1);
  }

  Netlist cover() {
    Netlist out(d_.name());
    std::vector<NetId> map(d_.num_nets(), 0);
    for (NetId in : d_.inputs()) map[in] = out.add_input(d_.net_name(in));
    for (CellId c : d_.dffs()) map[d_.cell(c).output] = out.add_net(d_.net_name(d_.cell(c).output));

    // Select roots: outputs and DFF data pins.
    std::vector<int> needed;
    std::vector<char> chosen(nodes_.size(), 0);
    auto require = [&](int v) {
      if (nodes_[v].op == Op::Source || chosen[v]) return;
      chosen[v] = 1;
      needed.push_back(v);
    };
    for (NetId o : d_.outputs()) require(net_node_[o]);
    for (CellId c : d_.dffs()) require(net_node_[d_.cell(c).inputs[0]]);
    for (std::size_t i = 0; i < needed.size(); ++i)
      for (int leaf : best_[needed[i]].leaves) require(leaf);

    // Emit in subject order (topological).
    std::sort(needed.begin(), needed.end());
    std::vector<NetId> node_net(nodes_.size(), 0);
    for (std::size_t v = 0; v < nodes_.size(); ++v)
      if (nodes_[v].op == Op::Source) node_net[v] = map[nodes_[v].net];
    for (int v : needed) {
      std::string name = name_for(v, out);
      std::vector<NetId> ins;
      for (int leaf : best_[v].leaves) ins.push_back(node_net[leaf]);
      node_net[v] = out.add_gate(CellKind::Lut, ins, name, cut_function(v, best_[v].leaves));
    }
    for (CellId c : d_.dffs()) {
      const CellId id = out.add_cell(CellKind::Dff, {node_net[net_node_[d_.cell(c).inputs[0]]]}, map[d_.cell(c).output]);
      out.set_label(id, d_.state_label(c));
    }
    for (NetId o : d_.outputs()) {
      const int v = net_node_[o];
      out.add_output(node_net[v]);
    }
    isolate_flop_drivers(out);
    return out;
  }

  // Name of a covered node: its design net when it has one, else a fresh name.
  std::string name_for(int v, const Netlist& out) {
    if (nodes_[v].net >= 0) return d_.net_name(static_cast<NetId>(nodes_[v].net));
    std::string name;
    do {
      name = "lut" + std::to_string(fresh_++);
    } while (out.find_net(name) || d_.find_net(name));
    return name;
  }

  // Each DFF needs a private LUT in front of it (one BLE = LUT + optional FF).
  static void isolate_flop_drivers(Netlist& n) {
    for (CellId ff : n.dffs()) {
      const auto fo = n.fanouts();
      const NetId d = n.cell(ff).inputs[0];
      const CellId drv = n.driver(d);
      bool exclusive = drv != kNoCell && n.cell(drv).kind == CellKind::Lut && fo[d].size() == 1;
      if (exclusive)
        for (NetId o : n.outputs()) exclusive &= o != d;
      if (exclusive) continue;
      std::string name = n.net_name(n.cell(ff).output) + "__d";
      while (n.find_net(name)) name += "_";
      NetId fresh = 0;
      if (drv != kNoCell && n.cell(drv).kind == CellKind::Lut) {
        const Cell copy = n.cell(drv);
        fresh = n.add_gate(CellKind::Lut, copy.inputs, name, copy.table);
      } else {
        fresh = n.add_gate(CellKind::Lut, {d}, name, 0x2);
      }
      const std::string label = n.cell(ff).label;
      n.rewrite_cell(ff, CellKind::Dff, {fresh});
      n.set_label(ff, label);
    }
  }

  const Netlist& d_;
  int k_;
  MapOptions opt_;
  std::vector<Node> nodes_;
  std::vector<int> net_node_;
  std::vector<int> fanout_;
  std::vector<std::vector<Cut>> cuts_;
  std::vector<CutInfo> best_;
  int fresh_ = 0;
};

}  // namespace

Netlist lut_map(const Netlist& design, int k, const MapOptions& opt) { return Mapper(design, k, opt).run(); }

}  // namespace redactor

#include "redactor/cnf.hpp"

#include "redactor/attack.hpp"
#include "redactor/graph.hpp"

namespace redactor {

std::vector<int> encode_netlist(ClauseSink& s, const Netlist& n, const std::vector<int>& preset) {
  std::vector<int> var(n.num_nets(), 0);
  for (NetId i = 0; i < n.num_nets(); ++i) var[i] = i < preset.size() && preset[i] != 0 ? preset[i] : s.new_var();

  std::vector<Lit> buf;
  for (const Cell& c : n.cells()) {
    const Lit y = var[c.output];
    auto in = [&](std::size_t i) { return static_cast<Lit>(var[c.inputs[i]]); };
    switch (c.kind) {
      case CellKind::Dff: break;
      case CellKind::Const0: s.add({-y}); break;
      case CellKind::Const1: s.add({y}); break;
      case CellKind::Buf:
        s.add({-in(0), y});
        s.add({in(0), -y});
        break;
      case CellKind::Not:
        s.add({in(0), y});
        s.add({-in(0), -y});
        break;
      case CellKind::And:
      case CellKind::Nand:
      case CellKind::Or:
      case CellKind::Nor: {
        // AND: y -> each a_i, (all a_i) -> y. OR is the dual; N-variants flip y.
        const bool is_or = c.kind == CellKind::Or || c.kind == CellKind::Nor;
        const bool inv = c.kind == CellKind::Nand || c.kind == CellKind::Nor;
        const Lit out = inv ? -y : y;
        const Lit sign = is_or ? -1 : 1;
        buf.clear();
        for (std::size_t i = 0; i < c.inputs.size(); ++i) {
          s.add({-sign * out, sign * in(i)});
          buf.push_back(-sign * in(i));
        }
        buf.push_back(sign * out);
        s.add_clause(buf);
        break;
      }
      case CellKind::Xor:
      case CellKind::Xnor: {
        Lit acc = in(0);
        for (std::size_t i = 1; i < c.inputs.size(); ++i) {
          const bool last = i + 1 == c.inputs.size();
          const Lit t = last ? (c.kind == CellKind::Xnor ? -y : y) : s.new_var();
          const Lit b = in(i);
          s.add({-acc, -b, -t});
          s.add({acc, b, -t});
          s.add({acc, -b, t});
          s.add({-acc, b, t});
          acc = t;
        }
        if (c.inputs.size() == 1) {
          const Lit out = c.kind == CellKind::Xnor ? -y : y;
          s.add({-acc, out});
          s.add({acc, -out});
        }
        break;
      }
      case CellKind::Mux2: {
        const Lit sel = in(0), a = in(1), b = in(2);
        s.add({sel, -a, y});
        s.add({sel, a, -y});
        s.add({-sel, -b, y});
        s.add({-sel, b, -y});
        break;
      }
      case CellKind::Lut: {
        const std::size_t k = c.inputs.size();
        for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << k); ++idx) {
          buf.clear();
          for (std::size_t i = 0; i < k; ++i) buf.push_back(((idx >> i) & 1) ? -in(i) : in(i));
          buf.push_back(((c.table >> idx) & 1) ? y : -y);
          s.add_clause(buf);
        }
        break;
      }
    }
  }
  return var;
}

CnfInstance to_cnf(const Netlist& n, int copies) {
  if (copies < 1) throw Error("to_cnf: copies must be at least 1");
  CnfInstance inst;
  const bool cyclic = !is_acyclic(n);
  const Netlist unrolled = cyclic ? unroll(n, copies) : Netlist{};
  const Netlist& target = cyclic ? unrolled : n;
  const auto keys = target.key_inputs();
  std::vector<int> preset(target.num_nets(), 0);
  for (NetId k : keys) {
    preset[k] = inst.cnf.new_var();
    inst.key_vars.push_back(preset[k]);
  }
  const int count = cyclic ? 1 : copies;
  for (int c = 0; c < count; ++c) inst.vars.push_back(encode_netlist(inst.cnf, target, preset));
  return inst;
}

}  // namespace redactor

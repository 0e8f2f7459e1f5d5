#include "redactor/attack.hpp"

#include <chrono>
#include <map>
#include <set>

#include "redactor/cad.hpp"
#include "redactor/cnf.hpp"
#include "redactor/simulate.hpp"
#include "redactor/verify.hpp"

namespace redactor {

const Netlist& key_expose(const Fabric& f) {
  if (f.netlist.key_inputs().size() != f.config_size())
    throw Error("key_expose: " + std::to_string(f.netlist.key_inputs().size()) + " key inputs for " +
                std::to_string(f.config_size()) + " configuration bits");
  return f.netlist;
}

KeyClause cycle_clause(const Netlist& keyed, const std::vector<PinEdge>& cycle) {
  std::map<NetId, int> key_index;
  const auto keys = keyed.key_inputs();
  for (std::size_t i = 0; i < keys.size(); ++i) key_index[keys[i]] = static_cast<int>(i);
  KeyClause clause;
  for (const PinEdge& e : cycle) {
    const Cell& c = keyed.cell(e.cell);
    if (c.kind != CellKind::Mux2 || e.pin == 0) continue;
    auto it = key_index.find(c.inputs[0]);
    if (it == key_index.end()) continue;
    // In-cycle input a (pin 1) is left by sel=1, input b (pin 2) by sel=0.
    const Lit l = e.pin == 1 ? it->second + 1 : -(it->second + 1);
    if (std::find(clause.begin(), clause.end(), l) == clause.end()) clause.push_back(l);
  }
  if (clause.empty()) throw Error("break_phase: combinational cycle without a key-controlled mux");
  std::sort(clause.begin(), clause.end());
  return clause;
}

std::vector<KeyClause> break_phase(const Netlist& keyed) {
  std::set<KeyClause> seen;
  std::vector<KeyClause> out;
  for (const PinEdge& e : feedback_edge_set(keyed)) {
    const auto cyc = cycle_through(keyed, e);
    if (cyc.empty()) continue;
    KeyClause c = cycle_clause(keyed, cyc);
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

Netlist unroll(const Netlist& n, int u) {
  if (u < 1) throw Error("unroll: U must be at least 1");
  const std::vector<bool> in_loop = loop_cells(n);
  if (std::none_of(in_loop.begin(), in_loop.end(), [](bool b) { return b; })) return n;
  std::set<std::pair<CellId, std::uint32_t>> fes;
  for (const PinEdge& e : feedback_edge_set(n)) fes.insert({e.cell, e.pin});

  Netlist out(n.name());
  std::vector<NetId> base(n.num_nets(), 0);  // copy U and shared nets
  std::vector<char> done(n.num_nets(), 0);
  for (NetId i : n.inputs()) {
    base[i] = out.add_input(n.net_name(i));
    done[i] = 1;
  }
  for (NetId i = 0; i < n.num_nets(); ++i)
    if (!done[i]) base[i] = out.add_net(n.net_name(i));

  std::vector<char> loop_net(n.num_nets(), 0);
  for (CellId c = 0; c < n.num_cells(); ++c)
    if (in_loop[c]) loop_net[n.cell(c).output] = 1;
  std::vector<std::vector<NetId>> copy(static_cast<std::size_t>(u));
  for (int t = 0; t < u; ++t) {
    copy[t].assign(n.num_nets(), 0);
    for (NetId i = 0; i < n.num_nets(); ++i)
      if (loop_net[i]) copy[t][i] = out.add_net(n.net_name(i) + "@" + std::to_string(t));
  }
  auto net_at = [&](NetId net, int t) { return t == u || !loop_net[net] ? base[net] : copy[t][net]; };
  std::map<NetId, NetId> free_input;
  for (const auto& [cell, pin] : fes) {
    const NetId d = n.cell(cell).inputs[pin];
    if (!free_input.count(d)) free_input[d] = out.add_input(std::string(kUnrollFreePrefix) + n.net_name(d));
  }

  for (CellId c = 0; c < n.num_cells(); ++c) {
    const Cell& cell = n.cell(c);
    if (!in_loop[c]) {
      std::vector<NetId> ins;
      for (NetId x : cell.inputs) ins.push_back(base[x]);
      const CellId id = out.add_cell(cell.kind, ins, base[cell.output], cell.table);
      if (cell.kind == CellKind::Dff) out.set_label(id, n.state_label(c));
      continue;
    }
    for (int t = 0; t <= u; ++t) {
      std::vector<NetId> ins;
      for (std::uint32_t p = 0; p < cell.inputs.size(); ++p) {
        const NetId x = cell.inputs[p];
        if (fes.count({c, p})) ins.push_back(t == 0 ? free_input.at(x) : net_at(x, t - 1));
        else ins.push_back(net_at(x, t));
      }
      out.add_cell(cell.kind, ins, net_at(cell.output, t), cell.table);
    }
  }
  std::vector<NetId> outs;
  for (NetId o : n.outputs()) outs.push_back(base[o]);
  out.set_outputs(outs);
  return out;
}

nlohmann::json to_json(const AttackReport& r) {
  nlohmann::json j;
  j["fabric"] = r.fabric;
  j["unroll"] = r.unroll;
  j["clauses"] = r.clauses;
  j["time_s"] = r.time_s;
  j["key_reported"] = r.key_reported;
  j["iterations"] = r.iterations;
  if (r.recovered_key) {
    std::string s;
    for (auto b : *r.recovered_key) s += b ? '1' : '0';
    j["recovered_key"] = s;
  } else {
    j["recovered_key"] = nullptr;
  }
  j["verified"] = r.verified;
  j["status"] = r.status;
  j["key_clauses"] = r.key_clauses.size();
  j["oracle_queries"] = r.queries.size();
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

// Scan interface of the unrolled netlist lined up with the keyed netlist.
struct UnrolledView {
  Netlist net;
  ScanPorts ports;
  std::vector<NetId> inputs;   // per keyed scan input
  std::vector<NetId> outputs;  // per keyed scan output
  std::vector<NetId> keys;     // key_inputs() order
};

UnrolledView make_view(const Netlist& keyed, int u) {
  UnrolledView v{unroll(keyed, u), {}, {}, {}, {}};
  v.ports = scan_ports(v.net);
  const ScanPorts kp = scan_ports(keyed);
  std::map<std::string, NetId> in, out;
  for (std::size_t i = 0; i < v.ports.input_labels.size(); ++i) in[v.ports.input_labels[i]] = v.ports.input_nets[i];
  for (std::size_t i = 0; i < v.ports.output_labels.size(); ++i) out[v.ports.output_labels[i]] = v.ports.output_nets[i];
  for (const auto& l : kp.input_labels) v.inputs.push_back(in.at(l));
  for (const auto& l : kp.output_labels) v.outputs.push_back(out.at(l));
  v.keys = v.net.key_inputs();
  return v;
}

// Encodes one copy of the unrolled netlist with the given key variables and,
// optionally, scan inputs fixed to constants.
std::vector<int> encode_copy(Solver& s, const UnrolledView& v, const std::vector<int>& key_vars,
                             const std::vector<int>* shared_inputs, int vtrue, int vfalse,
                             const std::vector<bool>* fixed_inputs) {
  std::vector<int> preset(v.net.num_nets(), 0);
  for (std::size_t i = 0; i < v.keys.size(); ++i) preset[v.keys[i]] = key_vars[i];
  for (std::size_t i = 0; i < v.inputs.size(); ++i) {
    if (fixed_inputs) preset[v.inputs[i]] = (*fixed_inputs)[i] ? vtrue : vfalse;
    else if (shared_inputs) preset[v.inputs[i]] = (*shared_inputs)[v.inputs[i]];
  }
  return encode_netlist(s, v.net, preset);
}

void add_key_clause(Solver& s, const KeyClause& c, const std::vector<int>& key_vars) {
  std::vector<Lit> lits;
  for (Lit l : c) lits.push_back(l > 0 ? key_vars[l - 1] : -key_vars[-l - 1]);
  s.add_clause(lits);
}

void add_query(Solver& s, const UnrolledView& v, const std::vector<int>& key_vars, int vtrue, int vfalse,
               const OracleQuery& q) {
  const auto vars = encode_copy(s, v, key_vars, nullptr, vtrue, vfalse, &q.inputs);
  for (std::size_t o = 0; o < v.outputs.size(); ++o) {
    const int x = vars[v.outputs[o]];
    s.add({q.outputs[o] ? x : -x});
  }
}

Bitstream read_key(const Solver& s, const std::vector<int>& key_vars) {
  Bitstream b(key_vars.size());
  for (std::size_t i = 0; i < key_vars.size(); ++i) b[i] = s.model_value(key_vars[i]);
  return b;
}

}  // namespace

AttackReport attack(const Netlist& keyed, const Netlist& oracle, const AttackConfig& cfg, std::string fabric_name) {
  if (cfg.timeout_s <= 0) throw Error("attack: timeout must be positive");
  if (cfg.max_unroll < 1) throw Error("attack: max_unroll must be at least 1");
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout_s));
  AttackReport rep;
  rep.fabric = std::move(fabric_name);
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  auto timed_out = [&] {
    return Clock::now() >= deadline || (cfg.cancel && cfg.cancel->load(std::memory_order_relaxed));
  };
  auto finish = [&](std::string status) {
    rep.status = std::move(status);
    rep.time_s = elapsed();
    return rep;
  };

  // Oracle interface, matched by scan label.
  const ScanPorts kp = scan_ports(keyed);
  const ScanPorts op = scan_ports(oracle);
  if (kp.input_labels.size() != op.input_labels.size() || kp.output_labels.size() != op.output_labels.size())
    throw Error("attack: oracle interface mismatch");
  std::vector<std::size_t> oracle_in, oracle_out;
  {
    std::map<std::string, std::size_t> in, out;
    for (std::size_t i = 0; i < op.input_labels.size(); ++i) in[op.input_labels[i]] = i;
    for (std::size_t i = 0; i < op.output_labels.size(); ++i) out[op.output_labels[i]] = i;
    for (const auto& l : kp.input_labels) {
      if (!in.count(l)) throw Error("attack: oracle has no input '" + l + "'");
      oracle_in.push_back(in[l]);
    }
    for (const auto& l : kp.output_labels) {
      if (!out.count(l)) throw Error("attack: oracle has no output '" + l + "'");
      oracle_out.push_back(out[l]);
    }
  }
  auto query = [&](const std::vector<bool>& x) {
    std::vector<Logic> in(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) in[oracle_in[i]] = to_logic(x[i]);
    const auto y = simulate_scan(oracle, in);
    std::vector<bool> out;
    for (std::size_t o = 0; o < oracle_out.size(); ++o) {
      if (y[oracle_out[o]] == Logic::X) throw Error("attack: oracle output is undefined");
      out.push_back(y[oracle_out[o]] == Logic::One);
    }
    return out;
  };

  const std::size_t nkeys = keyed.key_inputs().size();
  int u = cfg.initial_unroll > 0 ? cfg.initial_unroll : static_cast<int>(feedback_edge_set(keyed).size()) + 1;
  u = std::min(u, cfg.max_unroll);
  if (cfg.strategy == AttackStrategy::BreakThenUnroll) rep.key_clauses = break_phase(keyed);
  if (timed_out()) return finish("timeout");

  std::set<std::vector<bool>> queried;
  for (;;) {
    rep.unroll = u;
    const UnrolledView view = make_view(keyed, u);
    Solver s(cfg.seed);
    s.set_deadline(deadline);
    s.set_cancel_flag(cfg.cancel);
    const int vtrue = s.new_var();
    const int vfalse = s.new_var();
    s.add({vtrue});
    s.add({-vfalse});
    std::vector<int> k1(nkeys), k2(nkeys);
    for (auto& v : k1) v = s.new_var();
    for (auto& v : k2) v = s.new_var();
    for (const KeyClause& c : rep.key_clauses) {
      add_key_clause(s, c, k1);
      add_key_clause(s, c, k2);
    }
    // Miter: shared scan inputs, separate keys and free unroll inputs.
    const auto c1 = encode_copy(s, view, k1, nullptr, vtrue, vfalse, nullptr);
    const auto c2 = encode_copy(s, view, k2, &c1, vtrue, vfalse, nullptr);
    const int act = s.new_var();
    std::vector<Lit> any_diff{-act};
    for (NetId o : view.outputs) {
      const int a = c1[o], b = c2[o], d = s.new_var();
      s.add({-a, -b, -d});
      s.add({a, b, -d});
      any_diff.push_back(d);
    }
    s.add_clause(any_diff);
    for (const OracleQuery& q : rep.queries) {
      add_query(s, view, k1, vtrue, vfalse, q);
      add_query(s, view, k2, vtrue, vfalse, q);
    }
    rep.clauses = s.num_clauses();

    // Adds clauses for any active cycle under `key`; true when one was found.
    auto refine = [&](const Bitstream& key) {
      const auto cyc = find_active_cycle(keyed, key);
      if (!cyc) return false;
      KeyClause c = cycle_clause(keyed, *cyc);
      add_key_clause(s, c, k1);
      add_key_clause(s, c, k2);
      rep.key_clauses.push_back(std::move(c));
      return true;
    };

    bool deepen = false;
    while (!deepen) {
      if (timed_out()) return finish("timeout");
      const Lit assume[] = {act};
      const SatResult r = s.solve(assume);
      rep.clauses = s.num_clauses();
      if (r == SatResult::Unknown) return finish("timeout");
      if (r == SatResult::Sat) {
        const Bitstream key1 = read_key(s, k1), key2 = read_key(s, k2);
        const bool r1 = refine(key1);
        const bool r2 = refine(key2);
        if (r1 || r2) continue;
        std::vector<bool> x;
        for (NetId i : view.inputs) x.push_back(s.model_value(c1[i]));
        if (!queried.insert(x).second) {
          deepen = true;  // outputs still depend on the free copy-0 values
          break;
        }
        OracleQuery q{x, query(x), u};
        add_query(s, view, k1, vtrue, vfalse, q);
        add_query(s, view, k2, vtrue, vfalse, q);
        rep.queries.push_back(std::move(q));
        ++rep.iterations;
        continue;
      }
      // No differentiating input left: extract an acyclic candidate key.
      std::optional<Bitstream> key;
      while (!key) {
        if (timed_out()) return finish("timeout");
        const SatResult r2 = s.solve();
        rep.clauses = s.num_clauses();
        if (r2 == SatResult::Unknown) return finish("timeout");
        if (r2 == SatResult::Unsat) break;
        Bitstream cand = read_key(s, k1);
        if (!refine(cand)) key = std::move(cand);
      }
      if (!key) {
        deepen = true;
        break;
      }
      const Netlist programmed = program(keyed, *key);
      bool ok = false;
      try {
        ok = check_equiv(oracle, programmed, cfg.exhaustive_limit).equivalent;
      } catch (const Error&) {
        ok = false;
      }
      if (ok) {
        rep.key_reported = true;
        rep.verified = true;
        rep.recovered_key = std::move(key);
        return finish("recovered");
      }
      deepen = true;
    }
    if (u >= cfg.max_unroll) return finish("unroll-limit");
    u = std::min(2 * u, cfg.max_unroll);
  }
}

bool key_satisfies_report(const Netlist& keyed, const AttackReport& r, const Bitstream& key) {
  std::vector<std::uint8_t> assignment(key.size() + 1, 0);
  for (std::size_t i = 0; i < key.size(); ++i) assignment[i + 1] = key[i];
  if (!satisfies(r.key_clauses, assignment)) return false;
  std::map<int, UnrolledView> views;
  for (const OracleQuery& q : r.queries) {
    auto it = views.find(q.unroll);
    if (it == views.end()) it = views.emplace(q.unroll, make_view(keyed, q.unroll)).first;
    Solver s;
    const int vtrue = s.new_var(), vfalse = s.new_var();
    s.add({vtrue});
    s.add({-vfalse});
    std::vector<int> kv;
    for (auto b : key) kv.push_back(b ? vtrue : vfalse);
    add_query(s, it->second, kv, vtrue, vfalse, q);
    if (s.solve() != SatResult::Sat) return false;
  }
  return true;
}

}  // namespace redactor

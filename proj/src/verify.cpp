#include "redactor/verify.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <random>

#include "redactor/bitsim.hpp"
#include "redactor/cnf.hpp"
#include "redactor/sat.hpp"
#include "redactor/simulate.hpp"

namespace redactor {

std::string_view method_name(EquivMethod m) {
  switch (m) {
    case EquivMethod::Exhaustive: return "exhaustive";
    case EquivMethod::Random: return "random";
    case EquivMethod::Sat: return "sat";
  }
  return "?";
}

nlohmann::json to_json(const EquivalenceVerdict& v) {
  nlohmann::json j;
  j["method"] = method_name(v.method);
  j["equivalent"] = v.equivalent;
  if (v.counterexample) {
    std::string bits;
    nlohmann::json named = nlohmann::json::object();
    for (std::size_t i = 0; i < v.counterexample->size(); ++i) {
      bits += (*v.counterexample)[i] ? '1' : '0';
      if (i < v.input_labels.size()) named[v.input_labels[i]] = (*v.counterexample)[i] ? 1 : 0;
    }
    j["counterexample"] = bits;
    j["counterexample_inputs"] = named;
  } else {
    j["counterexample"] = nullptr;
  }
  j["vectors_checked"] = v.vectors_checked;
  return j;
}

namespace {

// Scan interfaces of a and b lined up by label.
struct Alignment {
  ScanPorts a, b;
  std::vector<std::size_t> b_input;   // per a input: index into b's inputs
  std::vector<std::size_t> b_output;  // per a output: index into b's outputs
};

Alignment align(const Netlist& a, const Netlist& b) {
  if (!a.key_inputs().empty() || !b.key_inputs().empty())
    throw Error("verify: netlist has unprogrammed key inputs");
  Alignment al{scan_ports(a), scan_ports(b), {}, {}};
  auto match = [](const std::vector<std::string>& la, const std::vector<std::string>& lb, const char* what) {
    if (la.size() != lb.size())
      throw Error(std::string("verify: interface mismatch: ") + std::to_string(la.size()) + " vs " +
                  std::to_string(lb.size()) + " " + what);
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < lb.size(); ++i)
      if (!pos.emplace(lb[i], i).second) throw Error("verify: duplicate " + std::string(what) + " label '" + lb[i] + "'");
    std::vector<std::size_t> out;
    for (const std::string& l : la) {
      auto it = pos.find(l);
      if (it == pos.end()) throw Error("verify: interface mismatch: '" + l + "' missing");
      out.push_back(it->second);
    }
    return out;
  };
  al.b_input = match(al.a.input_labels, al.b.input_labels, "inputs");
  al.b_output = match(al.a.output_labels, al.b.output_labels, "outputs");
  return al;
}

std::vector<bool> vector_bits(std::uint64_t index, std::size_t n) {
  std::vector<bool> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (index >> i) & 1;
  return v;
}

// Three-valued comparison of one vector; used for cyclic netlists and replay.
bool differs(const Netlist& a, const Netlist& b, const Alignment& al, const std::vector<bool>& vec) {
  std::vector<Logic> ia(vec.size()), ib(vec.size());
  for (std::size_t i = 0; i < vec.size(); ++i) {
    ia[i] = to_logic(vec[i]);
    ib[al.b_input[i]] = to_logic(vec[i]);
  }
  const auto oa = simulate_scan(a, ia);
  const auto ob = simulate_scan(b, ib);
  for (std::size_t o = 0; o < oa.size(); ++o) {
    const Logic x = oa[o], y = ob[al.b_output[o]];
    if (x == Logic::X || y == Logic::X || x != y) return true;
  }
  return false;
}

constexpr std::size_t kChunkWords = 1024;

// Runs a and b over `words` words of vectors produced by `fill(input, span)`.
// Returns the first differing lane (word * 64 + bit) among the first `lanes`.
template <typename Fill>
std::optional<std::uint64_t> compare_chunk(BitSimulator& sa, BitSimulator& sb, const Alignment& al, std::uint64_t lanes,
                                           Fill&& fill) {
  const auto& k = simd::active();
  for (std::size_t i = 0; i < al.a.input_nets.size(); ++i) {
    auto wa = sa.net(al.a.input_nets[i]);
    fill(i, wa);
    auto wb = sb.net(al.b.input_nets[al.b_input[i]]);
    std::copy(wa.begin(), wa.end(), wb.begin());
  }
  sa.run();
  sb.run();
  std::optional<std::uint64_t> first;
  const std::size_t words = sa.words();
  for (std::size_t o = 0; o < al.a.output_nets.size(); ++o) {
    const auto x = sa.net(al.a.output_nets[o]);
    const auto y = sb.net(al.b.output_nets[al.b_output[o]]);
    std::size_t w = k.first_diff(x.data(), y.data(), words);
    while (w < words) {
      const std::uint64_t lane = w * 64 + static_cast<std::uint64_t>(std::countr_zero(x[w] ^ y[w]));
      if (lane < lanes) {
        if (!first || lane < *first) first = lane;
        break;
      }
      // Difference only in padding lanes; keep looking further on.
      const std::size_t next = w + 1;
      if (next >= words) break;
      w = next + k.first_diff(x.data() + next, y.data() + next, words - next);
    }
  }
  return first;
}

}  // namespace

EquivalenceVerdict exhaustive_equiv(const Netlist& a, const Netlist& b, int max_inputs) {
  const Alignment al = align(a, b);
  const std::size_t n = al.a.input_nets.size();
  if (n > static_cast<std::size_t>(max_inputs) || n > 40)
    throw Error("verify: " + std::to_string(n) + " scan inputs exceed the exhaustive limit of " +
                std::to_string(max_inputs));
  EquivalenceVerdict v;
  v.method = EquivMethod::Exhaustive;
  v.input_labels = al.a.input_labels;
  const std::uint64_t total = std::uint64_t{1} << n;
  v.vectors_checked = total;

  if (!is_acyclic(a) || !is_acyclic(b)) {
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      auto vec = vector_bits(idx, n);
      if (differs(a, b, al, vec)) {
        v.equivalent = false;
        v.counterexample = std::move(vec);
        v.vectors_checked = idx + 1;
        return v;
      }
    }
    return v;
  }

  const std::size_t words = static_cast<std::size_t>(std::min<std::uint64_t>(kChunkWords, (total + 63) / 64));
  BitSimulator sa(a, words), sb(b, words);
  for (std::uint64_t base = 0; base < total; base += words * 64) {
    const std::uint64_t lanes = std::min<std::uint64_t>(total - base, words * 64);
    auto diff = compare_chunk(sa, sb, al, lanes, [&](std::size_t i, std::span<simd::Word> w) {
      fill_counter_pattern(w, static_cast<unsigned>(i), base);
    });
    if (diff) {
      v.equivalent = false;
      v.counterexample = vector_bits(base + *diff, n);
      v.vectors_checked = base + *diff + 1;
      return v;
    }
  }
  return v;
}

EquivalenceVerdict random_equiv(const Netlist& a, const Netlist& b, std::uint64_t n_vectors, std::uint64_t seed) {
  const Alignment al = align(a, b);
  const std::size_t n = al.a.input_nets.size();
  EquivalenceVerdict v;
  v.method = EquivMethod::Random;
  v.input_labels = al.a.input_labels;
  v.vectors_checked = n_vectors;
  std::mt19937_64 rng(seed);
  const bool cyclic = !is_acyclic(a) || !is_acyclic(b);
  if (cyclic) {
    for (std::uint64_t t = 0; t < n_vectors; ++t) {
      std::vector<bool> vec(n);
      for (std::size_t i = 0; i < n; ++i) vec[i] = rng() & 1;
      if (differs(a, b, al, vec)) {
        v.equivalent = false;
        v.counterexample = std::move(vec);
        v.vectors_checked = t + 1;
        return v;
      }
    }
    return v;
  }
  const std::size_t words = static_cast<std::size_t>(std::min<std::uint64_t>(kChunkWords, (n_vectors + 63) / 64));
  if (words == 0) return v;
  BitSimulator sa(a, words), sb(b, words);
  std::vector<std::vector<simd::Word>> saved(n);
  for (std::uint64_t base = 0; base < n_vectors; base += words * 64) {
    const std::uint64_t lanes = std::min<std::uint64_t>(n_vectors - base, words * 64);
    auto diff = compare_chunk(sa, sb, al, lanes, [&](std::size_t i, std::span<simd::Word> w) {
      for (auto& x : w) x = rng();
      saved[i].assign(w.begin(), w.end());
    });
    if (diff) {
      std::vector<bool> vec(n);
      for (std::size_t i = 0; i < n; ++i) vec[i] = (saved[i][*diff / 64] >> (*diff % 64)) & 1;
      v.equivalent = false;
      v.counterexample = std::move(vec);
      v.vectors_checked = base + *diff + 1;
      return v;
    }
  }
  return v;
}

EquivalenceVerdict sat_equiv(const Netlist& a, const Netlist& b) {
  const Alignment al = align(a, b);
  if (!is_acyclic(a) || !is_acyclic(b)) throw Error("sat_equiv: combinational cycle");
  EquivalenceVerdict v;
  v.method = EquivMethod::Sat;
  v.input_labels = al.a.input_labels;
  Solver s;
  const auto va = encode_netlist(s, a);
  std::vector<int> preset(b.num_nets(), 0);
  for (std::size_t i = 0; i < al.a.input_nets.size(); ++i) preset[al.b.input_nets[al.b_input[i]]] = va[al.a.input_nets[i]];
  const auto vb = encode_netlist(s, b, preset);
  std::vector<Lit> any;
  for (std::size_t o = 0; o < al.a.output_nets.size(); ++o) {
    const int x = va[al.a.output_nets[o]], y = vb[al.b.output_nets[al.b_output[o]]], d = s.new_var();
    s.add({-x, -y, -d});
    s.add({x, y, -d});
    any.push_back(d);
  }
  if (any.empty()) return v;
  s.add_clause(any);
  const SatResult r = s.solve();
  if (r == SatResult::Unknown) throw Error("sat_equiv: solver gave up");
  if (r == SatResult::Sat) {
    std::vector<bool> cex;
    for (NetId n : al.a.input_nets) cex.push_back(s.model_value(va[n]));
    v.equivalent = false;
    v.counterexample = std::move(cex);
    v.vectors_checked = 1;
  }
  return v;
}

EquivalenceVerdict check_equiv(const Netlist& a, const Netlist& b, int max_inputs) {
  if (scan_ports(a).input_nets.size() <= static_cast<std::size_t>(max_inputs)) return exhaustive_equiv(a, b, max_inputs);
  return sat_equiv(a, b);
}

bool replay_differs(const Netlist& a, const Netlist& b, const std::vector<bool>& vector) {
  const Alignment al = align(a, b);
  if (vector.size() != al.a.input_nets.size()) throw Error("replay: vector width mismatch");
  return differs(a, b, al, vector);
}

// Loops ----------------------------------------------------------------------

std::vector<LoopEntry> loop_report(const Netlist& n) {
  std::vector<LoopEntry> out;
  const auto fes = feedback_edge_set(n);
  for (auto& comp : find_sccs(n)) {
    if (!is_loop(n, comp)) continue;
    LoopEntry e;
    e.cells = comp;
    std::sort(e.cells.begin(), e.cells.end());
    for (const PinEdge& pe : fes)
      if (std::binary_search(e.cells.begin(), e.cells.end(), pe.cell)) {
        const CellId drv = n.driver(n.cell(pe.cell).inputs[pe.pin]);
        if (drv != kNoCell && std::binary_search(e.cells.begin(), e.cells.end(), drv)) e.break_edges.push_back(pe);
      }
    for (CellId c : e.cells) {
      const Cell& cell = n.cell(c);
      if (cell.kind == CellKind::Mux2 && n.is_key(cell.inputs[0])) e.key_muxes.push_back(c);
    }
    if (!e.break_edges.empty()) {
      const auto cyc = cycle_through(n, e.break_edges.front());
      for (const PinEdge& pe : cyc) e.path += n.net_name(n.cell(pe.cell).inputs[pe.pin]) + " -> ";
      if (!cyc.empty()) e.path += n.net_name(n.cell(cyc.front().cell).inputs[cyc.front().pin]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

nlohmann::json to_json(const Netlist& n, const std::vector<LoopEntry>& loops) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LoopEntry& e : loops) {
    nlohmann::json j;
    nlohmann::json cells = nlohmann::json::array();
    for (CellId c : e.cells) cells.push_back(n.net_name(n.cell(c).output));
    j["cells"] = cells;
    nlohmann::json br = nlohmann::json::array();
    for (const PinEdge& pe : e.break_edges)
      br.push_back({{"cell", n.net_name(n.cell(pe.cell).output)},
                    {"pin", pe.pin},
                    {"net", n.net_name(n.cell(pe.cell).inputs[pe.pin])},
                    {"suggestion", "insert a loop-breaker buffer on " + n.net_name(n.cell(pe.cell).inputs[pe.pin])}});
    j["break_edges"] = br;
    nlohmann::json km = nlohmann::json::array();
    for (CellId c : e.key_muxes) km.push_back(n.net_name(n.cell(c).output));
    j["key_muxes"] = km;
    j["path"] = e.path;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace redactor

#include "redactor/metrics.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "redactor/bitsim.hpp"
#include "redactor/graph.hpp"

namespace redactor {

nlohmann::json to_json(const AreaWeights& w) {
  return {{"gate", w.gate}, {"mux2", w.mux2}, {"lut_entry", w.lut_entry}, {"dff", w.dff}, {"constant", w.constant}};
}

double area_proxy(const Netlist& n, const AreaWeights& w) {
  double a = 0;
  for (const Cell& c : n.cells()) {
    switch (c.kind) {
      case CellKind::Const0:
      case CellKind::Const1: a += w.constant; break;
      case CellKind::Mux2: a += w.mux2; break;
      case CellKind::Lut: a += std::ldexp(w.lut_entry, static_cast<int>(c.inputs.size())); break;
      case CellKind::Dff: a += w.dff; break;
      default: a += w.gate; break;
    }
  }
  return a;
}

int delay_proxy(const Netlist& n) {
  if (!is_acyclic(n)) throw Error("delay_proxy: netlist has a combinational loop");
  std::vector<int> level(n.num_nets(), 0);
  for (CellId id : topological_order(n)) {
    const Cell& c = n.cell(id);
    if (c.kind == CellKind::Dff || c.kind == CellKind::Const0 || c.kind == CellKind::Const1) continue;
    int l = 0;
    for (NetId x : c.inputs) l = std::max(l, level[x]);
    level[c.output] = l + 1;
  }
  int worst = 0;
  for (NetId o : scan_ports(n).output_nets) worst = std::max(worst, level[o]);
  return worst;
}

double power_proxy(const Netlist& n, std::size_t vectors, std::uint64_t seed) {
  if (vectors == 0) throw Error("power_proxy: need at least one vector pair");
  const std::size_t lanes = vectors + 1;
  const std::size_t words = (lanes + 63) / 64;
  BitSimulator sim(n, words);
  std::mt19937_64 rng(seed);
  std::vector<NetId> sources(n.inputs().begin(), n.inputs().end());
  for (CellId d : n.dffs()) sources.push_back(n.cell(d).output);
  for (NetId s : sources)
    for (auto& w : sim.net(s)) w = rng();
  sim.run();
  std::uint64_t toggles = 0;
  for (NetId net = 0; net < n.num_nets(); ++net) {
    const auto x = sim.net(net);
    for (std::size_t w = 0; w < words; ++w) {
      // Bit i compares lane i with lane i+1.
      const simd::Word next = (x[w] >> 1) | (w + 1 < words ? x[w + 1] << 63 : 0);
      simd::Word t = x[w] ^ next;
      const std::size_t first = w * 64;
      if (first + 64 > vectors) t &= first >= vectors ? 0 : (simd::Word{1} << (vectors - first)) - 1;
      toggles += static_cast<std::uint64_t>(std::popcount(t));
    }
  }
  return static_cast<double>(toggles) / static_cast<double>(vectors);
}

PpaProxy ppa_proxy(const Netlist& n, std::size_t vectors, std::uint64_t seed, const AreaWeights& w) {
  return {area_proxy(n, w), delay_proxy(n), power_proxy(n, vectors, seed)};
}

PpaProxy redacted_ppa(const Netlist& keyed, const Netlist& programmed, std::size_t vectors, std::uint64_t seed,
                      const AreaWeights& w) {
  PpaProxy p;
  p.area_units = area_proxy(keyed, w) + w.dff * static_cast<double>(keyed.key_inputs().size());
  p.delay_levels = delay_proxy(programmed);
  p.power_units = power_proxy(programmed, vectors, seed);
  return p;
}

OverheadReport overhead_report(const PpaProxy& original, const PpaProxy& redacted, std::string ip, std::string fabric) {
  auto rel = [](double orig, double red, const char* what) {
    if (orig <= 0) throw Error(std::string("overhead_report: original ") + what + " is zero");
    return (red - orig) / orig;
  };
  OverheadReport r;
  r.ip = std::move(ip);
  r.fabric = std::move(fabric);
  r.area_overhead = rel(original.area_units, redacted.area_units, "area");
  r.power_overhead = rel(original.power_units, redacted.power_units, "power");
  r.delay_overhead = rel(original.delay_levels, redacted.delay_levels, "delay");
  return r;
}

OverheadReport overhead_report(const Netlist& original, const Netlist& redacted, std::size_t vectors,
                               std::uint64_t seed) {
  return overhead_report(ppa_proxy(original, vectors, seed), ppa_proxy(redacted, vectors, seed), original.name(),
                         redacted.name());
}

nlohmann::json to_json(const PpaProxy& p) {
  return {{"area_units", p.area_units}, {"delay_levels", p.delay_levels}, {"power_units", p.power_units}};
}

nlohmann::json to_json(const OverheadReport& r) {
  return {{"ip", r.ip},
          {"fabric", r.fabric},
          {"area_overhead", r.area_overhead},
          {"power_overhead", r.power_overhead},
          {"delay_overhead", r.delay_overhead}};
}

std::string overhead_csv_header() { return "ip,fabric,area_overhead,power_overhead,delay_overhead"; }

std::string overhead_csv_row(const OverheadReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << r.ip << ',' << r.fabric << ',' << r.area_overhead << ',' << r.power_overhead << ',' << r.delay_overhead;
  return os.str();
}

}  // namespace redactor

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "redactor/bench_io.hpp"
#include "redactor/cad.hpp"
#include "redactor/graph.hpp"
#include "redactor/verify.hpp"
#include "test_support.hpp"

using namespace redactor;
using redactor::testing::random_netlist;
using redactor::testing::RandomNetlistOptions;
using redactor::testing::kPedc;
using redactor::testing::reference_first_difference;

namespace {

ArchParams arch(int gw, int gh, int n, BleKind kind = BleKind::Lut, int w = 0, int io = 1) {
  ArchParams p;
  p.grid_w = gw;
  p.grid_h = gh;
  p.n = n;
  p.ble_kind = kind;
  p.w = w;
  p.io_per_tile = io;
  return p;
}

int count_kind(const Netlist& n, CellKind k) {
  return static_cast<int>(std::count_if(n.cells().begin(), n.cells().end(), [&](const Cell& c) { return c.kind == k; }));
}

// A LUT network built by hand: each entry is (output, inputs).
Netlist lut_network(int inputs, const std::vector<std::pair<std::string, std::vector<std::string>>>& luts,
                    const std::vector<std::string>& outputs) {
  Netlist n("hand");
  for (int i = 0; i < inputs; ++i) n.add_input("i" + std::to_string(i));
  for (const auto& [out, ins] : luts) {
    std::vector<NetId> ids;
    for (const auto& s : ins) ids.push_back(n.net(s));
    n.add_gate(CellKind::Lut, ids, out, 0x6996966996696996ull);
  }
  for (const auto& o : outputs) n.add_output(n.net(o));
  return n;
}


}  // namespace

TEST_SUITE("lut_map") {
  TEST_CASE("2-input AND maps to one LUT with table 0x8") {
    const Netlist d = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
    const Netlist m = lut_map(d, 4);
    REQUIRE(count_kind(m, CellKind::Lut) == 1);
    const Cell& c = m.cell(m.driver(m.net("y")));
    CHECK(c.inputs.size() == 2);
    CHECK(c.table == 0x8);
  }

  TEST_CASE("6-input AND at K=4 needs exactly the minimal cover") {
    const Netlist d = parse_bench(
        "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nINPUT(e)\nINPUT(f)\nOUTPUT(y)\n"
        "t1 = AND(a, b)\nt2 = AND(c, d)\nt3 = AND(e, f)\nt4 = AND(t1, t2)\ny = AND(t4, t3)\n");
    const Netlist m = lut_map(d, 4);
    // Each extra K-LUT adds at most K-1 new leaves: ceil((6-1)/(4-1)) = 2.
    const int lower_bound = (6 - 1 + (4 - 1) - 1) / (4 - 1);
    CHECK(count_kind(m, CellKind::Lut) == lower_bound);
    CHECK(reference_first_difference(d, m) == -1);
  }

  TEST_CASE("buffer chain collapses into one identity LUT") {
    const Netlist d = parse_bench("INPUT(a)\nOUTPUT(y)\nb1 = BUF(a)\nb2 = BUF(b1)\ny = BUF(b2)\n");
    const Netlist m = lut_map(d, 4);
    REQUIRE(count_kind(m, CellKind::Lut) == 1);
    const Cell& c = m.cell(m.driver(m.net("y")));
    CHECK(c.inputs.size() == 1);
    CHECK(c.table == 0x2);
  }

  TEST_CASE("mapped networks are equivalent, K-bounded and flop-isolated") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 60; ++t) {
      RandomNetlistOptions o;
      o.inputs = 2 + static_cast<int>(rng() % 5);
      o.cells = 5 + static_cast<int>(rng() % 30);
      o.outputs = 1 + static_cast<int>(rng() % 4);
      o.dffs = static_cast<int>(rng() % 3);
      const Netlist d = random_netlist(rng, o);
      for (int k : {3, 4, 6}) {
        const Netlist m = lut_map(d, k);
        const auto fo = m.fanouts();
        for (const Cell& c : m.cells()) {
          CHECK((c.kind == CellKind::Lut || c.kind == CellKind::Dff));
          if (c.kind == CellKind::Lut) CHECK(c.lut_size() <= k);
        }
        for (CellId ff : m.dffs()) {
          const NetId dnet = m.cell(ff).inputs[0];
          REQUIRE(m.driver(dnet) != kNoCell);
          CHECK(m.cell(m.driver(dnet)).kind == CellKind::Lut);
          CHECK(fo[dnet].size() == 1);
        }
        CHECK(reference_first_difference(d, m) == -1);
      }
    }
  }

  TEST_CASE("mapping is deterministic") {
    std::mt19937_64 rng(5);
    const Netlist d = random_netlist(rng, {6, 40, 4, 2, true, true});
    CHECK(write_bench(lut_map(d, 4)) == write_bench(lut_map(d, 4)));
  }
}

TEST_SUITE("pack") {
  TEST_CASE("1 LUT with N=1 uses one CLB") {
    const Netlist n = lut_network(2, {{"y", {"i0", "i1"}}}, {"y"});
    CHECK(pack(n, arch(1, 1, 1)).clusters.size() == 1);
  }

  TEST_CASE("3 LUTs with N=2 use two CLBs") {
    const Netlist n = lut_network(3, {{"a", {"i0"}}, {"b", {"i1"}}, {"c", {"i2"}}}, {"a", "b", "c"});
    CHECK(pack(n, arch(2, 1, 2)).clusters.size() == 2);
  }

  TEST_CASE("2 LUTs sharing 4 inputs fit one CLB with N=2, I=6") {
    const Netlist n =
        lut_network(4, {{"a", {"i0", "i1", "i2", "i3"}}, {"b", {"i3", "i2", "i1", "i0"}}}, {"a", "b"});
    const ArchParams p = arch(1, 1, 2);
    REQUIRE(p.clb_inputs() == 6);
    const Packing pk = pack(n, p);
    CHECK(pk.clusters.size() == 1);
    CHECK(cluster_inputs(n, pk, 0).size() == 4);
  }

  TEST_CASE("a unit with more inputs than I is reported") {
    const Netlist n = lut_network(4, {{"a", {"i0", "i1", "i2", "i3"}}}, {"a"});
    ArchParams p = arch(1, 1, 1);
    p.k = 4;
    CHECK(p.clb_inputs() == 4);
    CHECK_NOTHROW(pack(n, p));
    p.k = 2;
    CHECK_THROWS_AS(pack(n, p), Error);
  }

  TEST_CASE("packing legality over random networks") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 40; ++t) {
      const Netlist d = random_netlist(rng, {5, 25, 3, static_cast<int>(rng() % 3), true, true});
      for (BleKind kind : {BleKind::Lut, BleKind::Flut}) {
        for (int n : {1, 2, 4}) {
          const ArchParams p = arch(4, 4, n, kind);
          const Netlist m = lut_map(d, p.k);
          const Packing pk = pack(m, p);
          std::map<CellId, int> seen;
          for (std::size_t u = 0; u < pk.units.size(); ++u)
            for (CellId l : pk.units[u].luts) ++seen[l];
          CHECK(seen.size() == static_cast<std::size_t>(count_kind(m, CellKind::Lut)));
          for (const auto& [l, c] : seen) CHECK(c == 1);
          for (std::size_t c = 0; c < pk.clusters.size(); ++c) {
            CHECK(pk.clusters[c].size() <= static_cast<std::size_t>(n));
            CHECK(cluster_inputs(m, pk, static_cast<int>(c)).size() <= static_cast<std::size_t>(p.clb_inputs()));
          }
          for (const BleUnit& u : pk.units) {
            if (!u.fractured()) continue;
            std::set<NetId> uni;
            for (CellId l : u.luts)
              for (NetId x : m.cell(l).inputs) uni.insert(x);
            CHECK(uni.size() <= static_cast<std::size_t>(p.k - 1));
          }
        }
      }
    }
  }
}

TEST_SUITE("place") {
  TEST_CASE("single CLB lands on the only tile") {
    const Netlist n = lut_network(2, {{"y", {"i0", "i1"}}}, {"y"});
    const ArchParams p = arch(1, 1, 1);
    const Placement pl = place(n, pack(n, p), p, 1);
    CHECK(pl.clb_site == std::vector<int>{0});
  }

  TEST_CASE("2x2 exhaustive placement is optimal over all cluster permutations") {
    const Netlist n = lut_network(4,
                                  {{"a", {"i0", "i1"}}, {"b", {"a", "i2"}}, {"c", {"b", "i3"}}, {"d", {"c", "a"}}},
                                  {"d", "b"});
    const ArchParams p = arch(2, 2, 1);
    const Packing pk = pack(n, p);
    REQUIRE(pk.clusters.size() == 4);
    const Placement pl = place(n, pk, p, 7);
    std::vector<int> perm = {0, 1, 2, 3};
    int better = 0;
    do {
      Placement alt = pl;
      alt.clb_site = perm;
      if (placement_cost(n, pk, p, alt) < pl.cost - 1e-9) ++better;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(better == 0);
    CHECK(placement_cost(n, pk, p, pl) == doctest::Approx(pl.cost));
  }

  TEST_CASE("annealing is legal and deterministic") {
    std::mt19937_64 rng(9);
    const Netlist d = random_netlist(rng, {6, 40, 4, 0, true, true});
    const ArchParams p = arch(4, 4, 1, BleKind::Lut, 0, 2);
    const Netlist m = lut_map(d, 4);
    const Packing pk = pack(m, p);
    REQUIRE(pk.clusters.size() > 4);
    const Placement a = place(m, pk, p, 42);
    const Placement b = place(m, pk, p, 42);
    CHECK(a.clb_site == b.clb_site);
    CHECK(a.input_pad == b.input_pad);
    CHECK(a.output_pad == b.output_pad);
    std::set<int> sites(a.clb_site.begin(), a.clb_site.end());
    CHECK(sites.size() == a.clb_site.size());
    std::set<int> pads;
    int used = 0;
    for (int x : a.input_pad)
      if (x >= 0) pads.insert(x), ++used;
    for (int x : a.output_pad) pads.insert(x), ++used;
    CHECK(static_cast<int>(pads.size()) == used);
  }

  TEST_CASE("capacity overflow is an error") {
    const Netlist n = lut_network(3, {{"a", {"i0"}}, {"b", {"i1"}}}, {"a", "b"});
    const ArchParams p = arch(1, 1, 1);
    CHECK_THROWS_AS(place(n, pack(n, p), p, 1), Error);
  }
}

namespace {

void check_routing_legal(const Routing& r, const Fabric& f) {
  std::vector<int> occ(f.nodes.size(), 0);
  for (const RouteTree& t : r.nets) {
    std::set<std::int32_t> in_tree;
    for (const auto& [node, parent] : t.nodes) {
      ++occ[node];
      if (parent < 0) {
        CHECK(node == t.source);
      } else {
        REQUIRE(in_tree.count(parent));
        const auto& out = f.nodes[parent].out;
        CHECK(std::any_of(out.begin(), out.end(), [&](const RrEdge& e) { return static_cast<std::int32_t>(e.to) == node; }));
      }
      in_tree.insert(node);
    }
    for (auto s : t.sinks) CHECK(in_tree.count(s));
  }
  for (std::size_t v = 0; v < f.nodes.size(); ++v) CHECK(occ[v] <= f.nodes[v].capacity);
}

}  // namespace

TEST_SUITE("route") {
  TEST_CASE("auto width is minimal: linear scan over even widths agrees") {
    const Netlist d = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n");
    const Netlist m = lut_map(d, 4);
    ArchParams p = arch(1, 1, 1);
    const Packing pk = pack(m, p);
    const Placement pl = place(m, pk, p, 1);
    const AutoRouteResult a = route_auto(m, pk, pl, p);
    REQUIRE(a.routing.success);
    check_routing_legal(a.routing, a.fabric);
    int first = 0;
    for (int w = 2; w <= 128 && first == 0; w += 2) {
      p.w = w;
      if (route(m, pk, pl, build_fabric(p)).success) first = w;
    }
    CHECK(a.routing.width == first);
    if (first > 2) {
      const auto it = std::find(a.trials.begin(), a.trials.end(), std::make_pair(first - 2, false));
      CHECK(it != a.trials.end());
    }
  }

  TEST_CASE("zero-net design routes at the minimal width") {
    const Netlist d = parse_bench("INPUT(a)\n");
    const Netlist m = lut_map(d, 4);
    const ArchParams p = arch(1, 1, 1);
    const Packing pk = pack(m, p);
    const Placement pl = place(m, pk, p, 1);
    const AutoRouteResult a = route_auto(m, pk, pl, p);
    CHECK(a.routing.success);
    CHECK(a.routing.width == 2);
    CHECK(a.routing.nets.empty());
  }

  TEST_CASE("random designs route legally, minimal W, deterministic paths") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 6; ++t) {
      const Netlist d = random_netlist(rng, {5, 20, 3, static_cast<int>(rng() % 2), true, true});
      ArchParams p = arch(2, 2, 2, t % 2 ? BleKind::Flut : BleKind::Lut, 0, 2);
      const Netlist m = lut_map(d, p.k);
      const Packing pk = pack(m, p);
      if (pk.clusters.size() > 4) continue;
      const Placement pl = place(m, pk, p, 3);
      const AutoRouteResult a = route_auto(m, pk, pl, p);
      REQUIRE(a.routing.success);
      check_routing_legal(a.routing, a.fabric);
      if (a.routing.width > 2) {
        p.w = a.routing.width - 2;
        CHECK_FALSE(route(m, pk, pl, build_fabric(p)).success);
      }
      const AutoRouteResult b = route_auto(m, pk, pl, arch(2, 2, 2, p.ble_kind, 0, 2));
      REQUIRE(b.routing.nets.size() == a.routing.nets.size());
      for (std::size_t i = 0; i < a.routing.nets.size(); ++i) CHECK(a.routing.nets[i].nodes == b.routing.nets[i].nodes);
    }
  }
}

TEST_SUITE("bitgen and program") {
  TEST_CASE("empty design gives an all-zero bitstream of full length") {
    const Netlist d = parse_bench("INPUT(a)\n");
    const FlowResult r = run_flow(d, arch(1, 1, 1));
    CHECK(r.bitstream.size() == r.fabric.config_size());
    CHECK(std::all_of(r.bitstream.begin(), r.bitstream.end(), [](auto b) { return b == 0; }));
  }

  TEST_CASE("bitstream file round trip") {
    const Bitstream b = {1, 0, 0, 1, 1};
    CHECK(write_bitstream(b) == "1\n0\n0\n1\n1\n");
    CHECK(parse_bitstream(write_bitstream(b)) == b);
    CHECK_THROWS_AS(parse_bitstream("1\n2\n"), Error);
  }

  TEST_CASE("programmed fabric equals the design (PEDC-like, LUT and FLUT)") {
    const Netlist d = parse_bench(kPedc, "pedc");
    for (BleKind kind : {BleKind::Lut, BleKind::Flut}) {
      const FlowResult r = run_flow(d, arch(1, 1, 1, kind));
      CHECK(reference_first_difference(d, r.programmed) == -1);
      CHECK(exhaustive_equiv(d, r.programmed).equivalent);
      CHECK(output_cone_acyclic(r.programmed));
      CHECK(is_acyclic(r.programmed));
      const FabricStats s = fabric_stats(r);
      CHECK(s.block_utilization == 1.0);
      CHECK(s.io_utilization == 1.0);
      CHECK(s.bitstream_size == r.fabric.config_size());
    }
  }

  TEST_CASE("round trip on random designs across architectures") {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 12; ++t) {
      const Netlist d = random_netlist(rng, {4, 14, 3, static_cast<int>(rng() % 3), true, true});
      const BleKind kind = t % 2 ? BleKind::Flut : BleKind::Lut;
      const FlowResult r = run_flow(d, arch(3, 3, 2, kind, 0, 2));
      CHECK(reference_first_difference(d, r.programmed) == -1);
      CHECK(output_cone_acyclic(r.programmed));
    }
  }

  TEST_CASE("flipping any used LUT table bit breaks equivalence") {
    const Netlist d = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nOUTPUT(z)\ny = XOR(a, b)\nz = AND(b, c)\n");
    const FlowResult r = run_flow(d, arch(1, 1, 2, BleKind::Lut, 0, 2));
    int flipped = 0;
    for (std::size_t c = 0; c < r.packing.clusters.size(); ++c) {
      const ClbSite& clb = r.fabric.clbs[r.placement.clb_site[c]];
      for (std::size_t b = 0; b < r.packing.clusters[c].size(); ++b) {
        const BleUnit& u = r.packing.units[r.packing.clusters[c][b]];
        const int k = r.luts.cell(u.luts[0]).lut_size();
        for (int idx = 0; idx < (1 << k); ++idx) {
          Bitstream bad = r.bitstream;
          bad[clb.bles[b].table_bit + idx] ^= 1;
          CHECK(reference_first_difference(d, program(r.keyed, bad)) >= 0);
          ++flipped;
        }
      }
    }
    CHECK(flipped == 8);
  }

  TEST_CASE("all-zero bitstream programs without error") {
    const Netlist d = parse_bench(kPedc, "pedc");
    const FlowResult r = run_flow(d, arch(1, 1, 1));
    const Netlist z = program(r.keyed, Bitstream(r.fabric.config_size(), 0));
    CHECK(z.key_inputs().empty());
    CHECK_THROWS_AS(program(r.keyed, Bitstream(3, 0)), Error);
  }

  TEST_CASE("program is referentially transparent") {
    const Netlist d = parse_bench(kPedc, "pedc");
    const FlowResult r = run_flow(d, arch(1, 1, 1));
    CHECK(write_bench(program(r.keyed, r.bitstream)) == write_bench(program(r.keyed, r.bitstream)));
  }

  TEST_CASE("whole flow is deterministic") {
    std::mt19937_64 rng(8);
    const Netlist d = random_netlist(rng, {5, 20, 3, 1, true, true});
    const FlowResult a = run_flow(d, arch(3, 3, 2, BleKind::Lut, 0, 2));
    const FlowResult b = run_flow(d, arch(3, 3, 2, BleKind::Lut, 0, 2));
    CHECK(a.bitstream == b.bitstream);
    CHECK(a.routing.width == b.routing.width);
  }
}

TEST_SUITE("binding") {
  TEST_CASE("bound fabric exposes design names and labels") {
    const Netlist d = parse_bench(kPedc, "pedc");
    const FlowResult r = run_flow(d, arch(1, 1, 1));
    std::vector<std::string> ins;
    for (NetId i : r.keyed.data_inputs()) ins.push_back(r.keyed.net_name(i));
    CHECK(ins == std::vector<std::string>{"clk", "rst", "set", "en"});
    REQUIRE(r.keyed.outputs().size() == 1);
    CHECK(r.keyed.net_name(r.keyed.outputs()[0]) == "q");
    REQUIRE(r.keyed.dffs().size() == 1);
    CHECK(r.keyed.state_label(r.keyed.dffs()[0]) == "q");
    CHECK(r.keyed.key_inputs().size() == r.fabric.config_size());
  }

  TEST_CASE("an output that is directly an input is rejected") {
    const Netlist d = parse_bench("INPUT(a)\nOUTPUT(a)\n");
    CHECK_THROWS_AS(run_flow(d, arch(1, 1, 1)), Error);
  }
}

TEST_SUITE("size_search") {
  TEST_CASE("single AND cannot reach 90% I/O use without relaxation") {
    const Netlist d = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
    SizeSearchOptions o;
    o.max_grid = 2;
    o.max_n = 2;
    o.max_io_per_tile = 2;
    CHECK_THROWS_AS(size_search(d, ArchParams{}, o), Error);
    o.relax_io = true;
    const SizeSearchResult r = size_search(d, ArchParams{}, o);
    CHECK(r.params.grid_w == 1);
    CHECK(r.params.grid_h == 1);
    CHECK(r.params.n == 1);
    CHECK(r.params.io_per_tile == 1);
    CHECK(r.stats.used_pads == 3);
    CHECK(r.stats.io_utilization == doctest::Approx(0.75));
  }

  TEST_CASE("PEDC-like profile admits 1x1 N=1") {
    const Netlist d = parse_bench(kPedc, "pedc");
    SizeSearchOptions o;
    o.max_grid = 2;
    o.max_n = 2;
    o.max_io_per_tile = 2;
    const SizeSearchResult r = size_search(d, ArchParams{}, o);
    CHECK(r.params.grid_w * r.params.grid_h == 1);
    CHECK(r.params.n == 1);
    CHECK(r.stats.block_utilization == 1.0);
    CHECK(r.stats.io_utilization == 1.0);
  }

  TEST_CASE("utilization arithmetic") {
    CHECK(20.0 / 21.0 >= 0.90);
    CHECK(18.0 / 19.0 == doctest::Approx(0.947).epsilon(0.001));
  }
}

#include <doctest.h>

#include <random>

#include "redactor/bench_io.hpp"
#include "redactor/cnf.hpp"
#include "redactor/graph.hpp"
#include "redactor/sat.hpp"
#include "redactor/simulate.hpp"
#include "redactor/verify.hpp"
#include "test_support.hpp"

using namespace redactor;
using redactor::testing::random_netlist;
using redactor::testing::reference_first_difference;

namespace {

// Brute force over all 2^n assignments.
bool truth_table_sat(int n, const std::vector<std::vector<Lit>>& clauses) {
  std::vector<std::uint8_t> a(n + 1);
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    for (int v = 1; v <= n; ++v) a[v] = (m >> (v - 1)) & 1;
    if (satisfies(clauses, a)) return true;
  }
  return false;
}

std::vector<std::vector<Lit>> random_formula(std::mt19937_64& rng, int n) {
  const int m = 1 + static_cast<int>(rng() % (5 * n));
  std::vector<std::vector<Lit>> f(m);
  for (auto& c : f) {
    const int len = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < len; ++i) {
      const Lit v = 1 + static_cast<Lit>(rng() % n);
      c.push_back(rng() & 1 ? v : -v);
    }
  }
  return f;
}

std::size_t cnf_clauses(const char* bench, int copies = 1) { return to_cnf(parse_bench(bench), copies).cnf.clauses.size(); }

}  // namespace

TEST_SUITE("sat solver") {
  TEST_CASE("x and not x is unsat") {
    Solver s;
    const int x = s.new_var();
    s.add({x});
    s.add({-x});
    CHECK(s.solve() == SatResult::Unsat);
  }

  TEST_CASE("x or y with not x forces y") {
    Solver s;
    const int x = s.new_var(), y = s.new_var();
    s.add({x, y});
    s.add({-x});
    REQUIRE(s.solve() == SatResult::Sat);
    CHECK(s.model_value(y));
    CHECK_FALSE(s.model_value(x));
  }

  TEST_CASE("agrees with truth-table enumeration on 500 random formulas") {
    std::mt19937_64 rng(12);
    int sat = 0;
    for (int t = 0; t < 500; ++t) {
      const int n = 1 + static_cast<int>(rng() % 12);
      const auto f = random_formula(rng, n);
      Solver s(t);
      for (int v = 0; v < n; ++v) s.new_var();
      for (const auto& c : f) s.add_clause(c);
      const SatResult r = s.solve();
      REQUIRE(r != SatResult::Unknown);
      CHECK((r == SatResult::Sat) == truth_table_sat(n, f));
      if (r == SatResult::Sat) {
        CHECK(satisfies(f, s.model()));
        ++sat;
      }
    }
    // Both outcomes must be exercised.
    CHECK(sat > 50);
    CHECK(sat < 450);
  }

  TEST_CASE("pigeonhole 6 into 5 is unsat") {
    Solver s;
    const int p = 6, h = 5;
    auto v = [&](int i, int j) { return 1 + i * h + j; };
    for (int i = 0; i < p * h; ++i) s.new_var();
    for (int i = 0; i < p; ++i) {
      std::vector<Lit> c;
      for (int j = 0; j < h; ++j) c.push_back(v(i, j));
      s.add_clause(c);
    }
    for (int j = 0; j < h; ++j)
      for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b) s.add({-v(a, j), -v(b, j)});
    CHECK(s.solve() == SatResult::Unsat);
    CHECK(s.stats().conflicts > 0);
  }

  TEST_CASE("assumptions and incremental clauses") {
    Solver s;
    const int x = s.new_var(), y = s.new_var();
    s.add({x, y});
    const Lit not_x[] = {-x};
    REQUIRE(s.solve(not_x) == SatResult::Sat);
    CHECK(s.model_value(y));
    s.add({-y});
    CHECK(s.solve(not_x) == SatResult::Unsat);
    REQUIRE(s.solve() == SatResult::Sat);
    CHECK(s.model_value(x));
  }

  TEST_CASE("same seed gives the same model") {
    std::mt19937_64 rng(5);
    const auto f = random_formula(rng, 40);
    auto run = [&](std::uint64_t seed) {
      Solver s(seed);
      for (int v = 0; v < 40; ++v) s.new_var();
      for (const auto& c : f) s.add_clause(c);
      s.solve();
      return s.model();
    };
    CHECK(run(3) == run(3));
  }

  TEST_CASE("cancel flag stops the search") {
    Solver s;
    const int p = 11, h = 10;
    auto v = [&](int i, int j) { return 1 + i * h + j; };
    for (int i = 0; i < p * h; ++i) s.new_var();
    for (int i = 0; i < p; ++i) {
      std::vector<Lit> c;
      for (int j = 0; j < h; ++j) c.push_back(v(i, j));
      s.add_clause(c);
    }
    for (int j = 0; j < h; ++j)
      for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b) s.add({-v(a, j), -v(b, j)});
    std::atomic<bool> cancel{true};
    s.set_cancel_flag(&cancel);
    CHECK(s.solve() == SatResult::Unknown);
  }
}

TEST_SUITE("cnf") {
  TEST_CASE("single AND gate gives 3 clauses") {
    CHECK(cnf_clauses("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n") == 3);
  }

  TEST_CASE("XOR gate gives 4 clauses") {
    CHECK(cnf_clauses("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XOR(a, b)\n") == 4);
  }

  TEST_CASE("clause count grows linearly in copies") {
    const char* d = "INPUT(a)\nINPUT(b)\nINPUT(keyinput0)\nOUTPUT(y)\nt = AND(a, b)\ny = XOR(t, keyinput0)\n";
    const std::size_t one = cnf_clauses(d, 1);
    for (int c : {2, 4, 8}) CHECK(cnf_clauses(d, c) == one * c);
    const CnfInstance inst = to_cnf(parse_bench(d), 4);
    CHECK(inst.key_vars.size() == 1);
    for (const auto& copy : inst.vars) CHECK(copy[parse_bench(d).key_inputs()[0]] == inst.key_vars[0]);
  }

  TEST_CASE("encoding agrees with simulation on random netlists") {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 40; ++t) {
      const Netlist n = random_netlist(rng, {5, 20, 3, 0, true, true});
      const auto ports = scan_ports(n);
      for (std::uint32_t m = 0; m < 32; ++m) {
        Solver s;
        const auto vars = encode_netlist(s, n);
        std::vector<Logic> in;
        for (std::size_t i = 0; i < ports.input_nets.size(); ++i) {
          const bool b = (m >> i) & 1;
          in.push_back(to_logic(b));
          s.add({b ? vars[ports.input_nets[i]] : -vars[ports.input_nets[i]]});
        }
        REQUIRE(s.solve() == SatResult::Sat);
        const auto out = simulate_scan(n, in);
        for (std::size_t o = 0; o < ports.output_nets.size(); ++o)
          CHECK(to_logic(s.model_value(vars[ports.output_nets[o]])) == out[o]);
      }
    }
  }
}

TEST_SUITE("verify") {
  constexpr const char* kAnd = "INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n";
  constexpr const char* kOr = "INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = OR(a, b)\n";

  TEST_CASE("identical netlists are equivalent over 2^n vectors") {
    const Netlist n = parse_bench(redactor::testing::kPedc);
    const auto v = exhaustive_equiv(n, n);
    CHECK(v.equivalent);
    CHECK(v.vectors_checked == 32);
    CHECK(sat_equiv(n, n).equivalent);
  }

  TEST_CASE("an inverted output is caught and replays") {
    const Netlist a = parse_bench(kAnd);
    const Netlist b = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND(a, b)\n");
    for (const auto& v : {exhaustive_equiv(a, b), sat_equiv(a, b), random_equiv(a, b, 64, 1)}) {
      CHECK_FALSE(v.equivalent);
      REQUIRE(v.counterexample);
      CHECK(replay_differs(a, b, *v.counterexample));
    }
  }

  TEST_CASE("AND vs OR counterexample is 01 or 10") {
    const auto v = sat_equiv(parse_bench(kAnd), parse_bench(kOr));
    REQUIRE(v.counterexample);
    CHECK((*v.counterexample)[0] != (*v.counterexample)[1]);
    CHECK(exhaustive_equiv(parse_bench(kAnd), parse_bench(kOr)).vectors_checked == 2);
  }

  TEST_CASE("exhaustive and sat agree on 100 random pairs") {
    std::mt19937_64 rng(31);
    int differing = 0;
    for (int t = 0; t < 100; ++t) {
      const int inputs = 2 + static_cast<int>(rng() % 9);
      const Netlist a = random_netlist(rng, {inputs, 8, 2, 0, true, true});
      Netlist b = a;
      if (t % 2) {
        // Complement one cell; it may or may not be observable.
        const CellId c = static_cast<CellId>(rng() % b.num_cells());
        const Cell cell = b.cell(c);
        b.rewrite_cell(c, cell.kind == CellKind::Lut ? CellKind::Lut : CellKind::Xor,
                       cell.kind == CellKind::Lut ? cell.inputs : std::vector<NetId>{cell.inputs.empty() ? b.inputs()[0] : cell.inputs[0], b.inputs()[0]},
                       ~cell.table);
      }
      const auto e = exhaustive_equiv(a, b);
      const auto s = sat_equiv(a, b);
      CHECK(e.equivalent == s.equivalent);
      CHECK(e.equivalent == (reference_first_difference(a, b) == -1));
      if (!s.equivalent) {
        ++differing;
        CHECK(replay_differs(a, b, *s.counterexample));
      }
    }
    CHECK(differing > 10);
  }

  TEST_CASE("random_equiv is deterministic and never refutes equal netlists") {
    std::mt19937_64 rng(2);
    const Netlist n = random_netlist(rng, {20, 60, 4, 0, true, true});
    const auto v = random_equiv(n, n, 5000, 9);
    CHECK(v.equivalent);
    CHECK(v.vectors_checked == 5000);
    const Netlist b = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XNOR(a, b)\n");
    const Netlist c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XOR(a, b)\n");
    CHECK(*random_equiv(b, c, 100, 4).counterexample == *random_equiv(b, c, 100, 4).counterexample);
  }

  TEST_CASE("interface mismatch and keys are errors") {
    CHECK_THROWS_AS(exhaustive_equiv(parse_bench(kAnd), parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n")), Error);
    CHECK_THROWS_AS(sat_equiv(parse_bench(kAnd), parse_bench("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = AND(a, keyinput0)\n")),
                    Error);
  }

  TEST_CASE("sat_equiv rejects cyclic netlists, exhaustive handles them") {
    const Netlist ring = parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, z)\nz = BUF(y)\n");
    CHECK_THROWS_AS(sat_equiv(ring, ring), Error);
    // An undefined output never counts as equal.
    CHECK_FALSE(exhaustive_equiv(ring, ring).equivalent);
  }
}

TEST_SUITE("loop_report") {
  TEST_CASE("acyclic netlist has no loops") {
    CHECK(loop_report(parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n")).empty());
  }

  TEST_CASE("ring of 3 gives one loop with one break edge") {
    const Netlist n = parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, z)\nw = NOT(y)\nz = BUF(w)\n");
    const auto loops = loop_report(n);
    REQUIRE(loops.size() == 1);
    CHECK(loops[0].cells.size() == 3);
    CHECK(loops[0].break_edges.size() == 1);
    CHECK(loops[0].key_muxes.empty());
    CHECK(loops[0].path.find("->") != std::string::npos);
    CHECK(to_json(n, loops).size() == 1);
  }
}

#include <doctest.h>

#include <random>

#include "redactor/attack.hpp"
#include "redactor/bench_io.hpp"
#include "redactor/cad.hpp"
#include "redactor/simulate.hpp"
#include "redactor/verify.hpp"
#include "test_support.hpp"

using namespace redactor;
using redactor::testing::kPedc;

namespace {

ArchParams arch1x1(BleKind kind) {
  ArchParams p;
  p.grid_w = p.grid_h = 1;
  p.n = 1;
  p.ble_kind = kind;
  return p;
}

int count_cells(const Netlist& n) { return static_cast<int>(n.num_cells()); }

}  // namespace

TEST_SUITE("break_phase and unroll") {
  // Ring through one key mux: sel=1 selects the ring, so the clause is (not sel).
  constexpr const char* kKeyRing = R"(
INPUT(a)
INPUT(keyinput0)
OUTPUT(y)
m = MUX(keyinput0, a, z)
y = NOT(m)
w = BUF(y)
z = BUF(w)
)";

  TEST_CASE("acyclic keyed netlist gives no clauses") {
    CHECK(break_phase(parse_bench("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = XOR(a, keyinput0)\n")).empty());
  }

  TEST_CASE("ring through one key mux gives the unit clause not-sel") {
    const auto clauses = break_phase(parse_bench(kKeyRing));
    REQUIRE(clauses.size() == 1);
    CHECK(clauses[0] == KeyClause{-1});
  }

  TEST_CASE("cycle without a key mux is an internal error") {
    CHECK_THROWS_AS(break_phase(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, z)\nz = BUF(y)\n")), Error);
  }

  TEST_CASE("acyclic netlist is unchanged by unroll") {
    const Netlist n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n");
    CHECK(write_bench(unroll(n, 3)) == write_bench(n));
  }

  TEST_CASE("3-cell ring at U=2 gives 9 ring-cell instances") {
    const Netlist n = parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, z)\nw = NOT(y)\nz = BUF(w)\n");
    const Netlist u = unroll(n, 2);
    CHECK(count_cells(u) == 9);
    CHECK(is_acyclic(u));
    CHECK(u.inputs().size() == 2);
    CHECK(u.net_name(u.inputs()[1]).rfind(kUnrollFreePrefix, 0) == 0);
  }

  TEST_CASE("unrolled outputs match the programmed netlist once deep enough") {
    const Netlist keyed = parse_bench(kKeyRing);
    const Netlist prog = program(keyed, Bitstream{0});
    const Netlist u = unroll(keyed, 3);
    for (bool a : {false, true})
      for (bool fb : {false, true}) {
        const Logic in[] = {to_logic(a), to_logic(fb)};
        const Logic key[] = {Logic::Zero};
        const Logic pin[] = {to_logic(a)};
        CHECK(simulate_scan(u, in, key) == simulate_scan(prog, pin));
      }
  }
}

TEST_SUITE("attack") {
  TEST_CASE("XOR-locked toy recovers k0=0 in at most two DIPs") {
    const Netlist keyed = parse_bench("INPUT(x)\nINPUT(keyinput0)\nOUTPUT(y)\ny = XOR(x, keyinput0)\n");
    const Netlist oracle = parse_bench("INPUT(x)\nOUTPUT(y)\ny = BUF(x)\n");
    const AttackReport r = attack(keyed, oracle, {});
    REQUIRE(r.key_reported);
    CHECK(r.verified);
    CHECK(r.status == "recovered");
    CHECK(*r.recovered_key == Bitstream{0});
    CHECK(r.iterations <= 2);
    CHECK(key_satisfies_report(keyed, r, Bitstream{0}));
  }

  TEST_CASE("2-bit MUX lock recovers a key from the correct class") {
    const Netlist keyed = parse_bench(R"(
INPUT(a)
INPUT(b)
INPUT(keyinput0)
INPUT(keyinput1)
OUTPUT(y)
p = AND(a, b)
q = OR(a, b)
r = XOR(a, b)
s = NAND(a, b)
m0 = MUX(keyinput0, p, q)
m1 = MUX(keyinput0, r, s)
y = MUX(keyinput1, m0, m1)
)");
    const Netlist oracle = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XOR(a, b)\n");
    // Ground truth by brute force over all four keys.
    std::vector<Bitstream> good;
    for (std::uint8_t k = 0; k < 4; ++k) {
      const Bitstream key{static_cast<std::uint8_t>(k & 1), static_cast<std::uint8_t>(k >> 1)};
      if (exhaustive_equiv(oracle, program(keyed, key)).equivalent) good.push_back(key);
    }
    REQUIRE(good.size() == 1);
    const AttackReport r = attack(keyed, oracle, {});
    REQUIRE(r.key_reported);
    CHECK(*r.recovered_key == good[0]);
    CHECK(key_satisfies_report(keyed, r, good[0]));
  }

  TEST_CASE("oracle interface mismatch is an error") {
    const Netlist keyed = parse_bench("INPUT(x)\nINPUT(keyinput0)\nOUTPUT(y)\ny = XOR(x, keyinput0)\n");
    CHECK_THROWS_AS(attack(keyed, parse_bench("INPUT(z)\nOUTPUT(y)\ny = BUF(z)\n"), {}), Error);
  }

  TEST_CASE("keyed ring needs the cycle constraint") {
    const Netlist keyed = parse_bench(R"(
INPUT(a)
INPUT(keyinput0)
OUTPUT(y)
m = MUX(keyinput0, a, z)
y = NOT(m)
z = BUF(y)
)");
    const Netlist oracle = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n");
    for (AttackStrategy s : {AttackStrategy::BreakThenUnroll, AttackStrategy::UnrollOnly}) {
      AttackConfig cfg;
      cfg.strategy = s;
      const AttackReport r = attack(keyed, oracle, cfg);
      REQUIRE(r.key_reported);
      CHECK(*r.recovered_key == Bitstream{0});
      CHECK(key_satisfies_report(keyed, r, Bitstream{0}));
    }
  }

  TEST_CASE("PEDC on 1x1 fabrics: recovered, sound, correct key preserved") {
    const Netlist d = parse_bench(kPedc, "pedc");
    for (BleKind kind : {BleKind::Lut, BleKind::Flut}) {
      const FlowResult f = run_flow(d, arch1x1(kind));
      CHECK(key_expose(f.fabric).key_inputs().size() == f.fabric.config_size());
      CHECK_FALSE(find_active_cycle(f.keyed, f.bitstream));
      AttackConfig cfg;
      cfg.timeout_s = 60;
      const AttackReport r = attack(f.keyed, d, cfg, "1x1");
      MESSAGE("unroll=" << r.unroll << " clauses=" << r.clauses << " iterations=" << r.iterations
                        << " time=" << r.time_s << " status=" << r.status);
      REQUIRE(r.key_reported);
      CHECK(r.verified);
      CHECK(exhaustive_equiv(d, program(f.keyed, *r.recovered_key)).equivalent);
      CHECK(key_satisfies_report(f.keyed, r, f.bitstream));
      const auto j = to_json(r);
      CHECK(j["key_reported"] == true);
    }
  }
}

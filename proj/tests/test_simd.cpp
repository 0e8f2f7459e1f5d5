#include <doctest.h>

#include <random>

#include "redactor/bitsim.hpp"
#include "redactor/simd/kernels.hpp"
#include "redactor/simulate.hpp"
#include "test_support.hpp"

using namespace redactor;
using simd::Word;

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const simd::KernelTable* avx = simd::avx2_kernels();
  if (!avx) {
    MESSAGE("AVX2 unavailable; only the scalar table is exercised");
    return;
  }
  const auto& ref = simd::scalar_kernels();
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 131u}) {
    std::vector<Word> a(n), b(n), s(n), r1(n), r2(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = rng(), b[i] = rng(), s[i] = rng();
    ref.and2(r1.data(), a.data(), b.data(), n);
    avx->and2(r2.data(), a.data(), b.data(), n);
    CHECK(r1 == r2);
    ref.or2(r1.data(), a.data(), b.data(), n);
    avx->or2(r2.data(), a.data(), b.data(), n);
    CHECK(r1 == r2);
    ref.xor2(r1.data(), a.data(), b.data(), n);
    avx->xor2(r2.data(), a.data(), b.data(), n);
    CHECK(r1 == r2);
    ref.not1(r1.data(), a.data(), n);
    avx->not1(r2.data(), a.data(), n);
    CHECK(r1 == r2);
    ref.mux2(r1.data(), s.data(), a.data(), b.data(), n);
    avx->mux2(r2.data(), s.data(), a.data(), b.data(), n);
    CHECK(r1 == r2);
    CHECK(ref.popcount_xor(a.data(), b.data(), n) == avx->popcount_xor(a.data(), b.data(), n));
    auto c = a;
    CHECK(avx->first_diff(a.data(), c.data(), n) == n);
    if (n > 2) {
      c[n - 2] ^= 4;
      CHECK(ref.first_diff(a.data(), c.data(), n) == n - 2);
      CHECK(avx->first_diff(a.data(), c.data(), n) == n - 2);
    }
  }
}

TEST_CASE("bit-parallel simulation equals scalar three-valued simulation") {
  std::mt19937_64 rng(21);
  const simd::KernelTable* tables[] = {&simd::scalar_kernels(), simd::avx2_kernels()};
  for (int t = 0; t < 30; ++t) {
    testing::RandomNetlistOptions opt;
    opt.cells = 40;
    opt.dffs = 1;
    const auto n = testing::random_netlist(rng, opt);
    const auto ports = scan_ports(n);
    const std::size_t words = 5;
    std::vector<std::vector<Word>> results;
    for (const auto* k : tables) {
      if (!k) continue;
      BitSimulator sim(n, words, *k);
      std::mt19937_64 fill(t);
      for (NetId in : ports.input_nets)
        for (auto& w : sim.net(in)) w = fill();
      sim.run();
      std::vector<Word> out;
      for (NetId o : ports.output_nets) out.insert(out.end(), sim.net(o).begin(), sim.net(o).end());
      results.push_back(out);

      // Spot-check a few lanes against the scalar simulator.
      for (int lane : {0, 63, 64 * 3 + 7}) {
        std::vector<Logic> in;
        for (NetId i : ports.input_nets) in.push_back(to_logic((sim.net(i)[lane / 64] >> (lane % 64)) & 1));
        const auto want = simulate_scan(n, in);
        for (std::size_t o = 0; o < ports.output_nets.size(); ++o)
          CHECK(want[o] == to_logic((sim.net(ports.output_nets[o])[lane / 64] >> (lane % 64)) & 1));
      }
    }
    if (results.size() == 2) CHECK(results[0] == results[1]);
  }
}

TEST_CASE("counter pattern enumerates vector indices") {
  std::vector<Word> w(3);
  for (unsigned bit = 0; bit < 8; ++bit) {
    fill_counter_pattern(w, bit, 128);
    for (unsigned lane = 0; lane < 192; ++lane) {
      const std::uint64_t index = 128 + lane;
      CHECK(((w[lane / 64] >> (lane % 64)) & 1) == ((index >> bit) & 1));
    }
  }
}

// Tseitin encoding of netlists into clauses.
#pragma once

#include <vector>

#include "redactor/netlist.hpp"
#include "redactor/sat.hpp"

namespace redactor {

/// Encodes every cell of `n` as gate-consistency clauses. `preset[net]`, when
/// non-zero, is the variable to use for that net (shared keys, fixed inputs);
/// every other net gets a fresh variable. Returns the variable of each net.
/// DFF cells add no clauses: their outputs are free scan sources.
std::vector<int> encode_netlist(ClauseSink& sink, const Netlist& n, const std::vector<int>& preset = {});

struct CnfInstance {
  Cnf cnf;
  std::vector<std::vector<int>> vars;  // per copy, per net of the encoded netlist
  std::vector<int> key_vars;           // shared across copies, key_inputs() order
};

/// `copies` encodings sharing the key variables. Cyclic netlists are unrolled
/// first (see unroll in attack.hpp) with U = copies, and that single acyclic
/// netlist is encoded.
CnfInstance to_cnf(const Netlist& n, int copies);

}  // namespace redactor

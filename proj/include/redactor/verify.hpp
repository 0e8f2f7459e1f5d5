// Equivalence checking between an original module and a programmed fabric,
// plus combinational-loop reporting.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "redactor/graph.hpp"
#include "redactor/netlist.hpp"

namespace redactor {

enum class EquivMethod : std::uint8_t { Exhaustive, Random, Sat };
std::string_view method_name(EquivMethod m);

/// Both netlists are compared at the scan level: data inputs and flip-flop
/// states in, primary outputs and next states out, matched by label.
struct EquivalenceVerdict {
  EquivMethod method = EquivMethod::Exhaustive;
  bool equivalent = true;
  std::vector<std::string> input_labels;            // order of counterexample bits (a's scan inputs)
  std::optional<std::vector<bool>> counterexample;  // present iff not equivalent
  std::uint64_t vectors_checked = 0;
};

nlohmann::json to_json(const EquivalenceVerdict& v);

/// All 2^n scan vectors, bit-parallel. Throws Error on interface mismatch,
/// unprogrammed key inputs or more than max_inputs scan inputs. An X output
/// (cyclic netlists fall back to three-valued simulation) counts as a mismatch.
EquivalenceVerdict exhaustive_equiv(const Netlist& a, const Netlist& b, int max_inputs = 16);

/// Uniform random vectors from a seeded generator. Only "not equivalent" is
/// conclusive.
EquivalenceVerdict random_equiv(const Netlist& a, const Netlist& b, std::uint64_t n_vectors, std::uint64_t seed);

/// Miter of the two netlists solved with the in-repo CDCL solver. Both must be
/// acyclic.
EquivalenceVerdict sat_equiv(const Netlist& a, const Netlist& b);

/// exhaustive_equiv up to max_inputs scan inputs, sat_equiv above.
EquivalenceVerdict check_equiv(const Netlist& a, const Netlist& b, int max_inputs = 16);

/// Simulates both netlists on a counterexample (in a's scan input order) and
/// reports whether any matched output differs or is X.
bool replay_differs(const Netlist& a, const Netlist& b, const std::vector<bool>& vector);

struct LoopEntry {
  std::vector<CellId> cells;          // members of the strongly connected component
  std::vector<PinEdge> break_edges;   // feedback edges inside the component
  std::vector<CellId> key_muxes;      // MUX2 members whose select is a key input
  std::string path;                   // one cycle, "a -> b -> a" over net names
};

/// One entry per combinational loop (non-singleton or self-looping SCC).
std::vector<LoopEntry> loop_report(const Netlist& n);

nlohmann::json to_json(const Netlist& n, const std::vector<LoopEntry>& loops);

}  // namespace redactor

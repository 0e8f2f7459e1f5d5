// Oracle-guided bitstream recovery on key-exposed fabrics: cycle-breaking key
// constraints, unrolling of cyclic logic and the DIP loop.
#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "redactor/fabric.hpp"
#include "redactor/graph.hpp"
#include "redactor/netlist.hpp"
#include "redactor/sat.hpp"

namespace redactor {

/// The fabric netlist with every configuration bit as a key input, bit i being
/// config_chain[i]. Throws Error if that correspondence does not hold.
const Netlist& key_expose(const Fabric& f);

/// Clause over key bits: variable i+1 is key input i (key_inputs() order).
using KeyClause = std::vector<Lit>;

/// Clause saying at least one key mux on `cycle` deselects its in-cycle input.
/// Throws Error when the cycle has no key-controlled mux.
KeyClause cycle_clause(const Netlist& keyed, const std::vector<PinEdge>& cycle);

/// One clause per distinct shortest cycle through each feedback edge.
std::vector<KeyClause> break_phase(const Netlist& keyed);

/// Inputs created by unroll for the copy-0 side of feedback edges start with this.
inline constexpr std::string_view kUnrollFreePrefix = "unroll.fb.";

/// Replicates the nets of every combinational loop U+1 times. Copy t reads copy
/// t-1 across feedback edges; copy 0 reads fresh inputs. Outputs and all logic
/// outside loops read copy U. The result is acyclic.
Netlist unroll(const Netlist& keyed, int u);

enum class AttackStrategy : std::uint8_t { BreakThenUnroll, UnrollOnly };

struct AttackConfig {
  double timeout_s = 600;
  int max_unroll = 256;
  int initial_unroll = 0;  // 0 = feedback edge count + 1
  AttackStrategy strategy = AttackStrategy::BreakThenUnroll;
  std::uint64_t seed = 1;
  int exhaustive_limit = 16;
  const std::atomic<bool>* cancel = nullptr;
};

/// An oracle query and its answer, both in the keyed netlist's scan order.
struct OracleQuery {
  std::vector<bool> inputs;
  std::vector<bool> outputs;
  int unroll = 0;  // unroll factor the constraint was encoded at
};

struct AttackReport {
  std::string fabric;
  int unroll = 0;
  std::size_t clauses = 0;
  double time_s = 0;
  bool key_reported = false;
  int iterations = 0;
  std::optional<Bitstream> recovered_key;
  bool verified = false;
  std::string status;  // "recovered", "timeout", "unroll-limit", ...
  // Every constraint the attack added, for correct-key checks.
  std::vector<KeyClause> key_clauses;
  std::vector<OracleQuery> queries;
};

nlohmann::json to_json(const AttackReport& r);

/// `keyed` is the bound, key-exposed fabric; `oracle` the original module.
AttackReport attack(const Netlist& keyed, const Netlist& oracle, const AttackConfig& cfg, std::string fabric_name = "");

/// True when `key` satisfies every key clause and every oracle constraint of
/// the report (each checked with the solver on the unrolled netlist).
bool key_satisfies_report(const Netlist& keyed, const AttackReport& r, const Bitstream& key);

}  // namespace redactor

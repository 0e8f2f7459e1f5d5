// Conflict-driven clause-learning SAT solver: two watched literals, first-UIP
// learning, VSIDS with phase saving, Luby restarts, learnt-clause reduction,
// assumptions and incremental clause addition. Literals use the DIMACS
// convention: variable v >= 1, literal +v or -v.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace redactor {

using Lit = int;

/// Anything clauses can be written into (a CNF container or a live solver).
class ClauseSink {
 public:
  virtual ~ClauseSink() = default;
  virtual int new_var() = 0;
  virtual void add_clause(std::span<const Lit> clause) = 0;
  void add(std::initializer_list<Lit> clause) { add_clause(std::span<const Lit>(clause.begin(), clause.size())); }
};

struct Cnf : ClauseSink {
  int num_vars = 0;
  std::vector<std::vector<Lit>> clauses;
  int new_var() override { return ++num_vars; }
  void add_clause(std::span<const Lit> clause) override { clauses.emplace_back(clause.begin(), clause.end()); }
};

/// Truth of a clause set under a full assignment (index v holds variable v).
bool satisfies(const std::vector<std::vector<Lit>>& clauses, const std::vector<std::uint8_t>& assignment);

enum class SatResult : std::uint8_t { Sat, Unsat, Unknown };

struct SolverStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learnts = 0;
};

class Solver : public ClauseSink {
 public:
  explicit Solver(std::uint64_t seed = 0);

  int new_var() override;
  [[nodiscard]] int num_vars() const { return static_cast<int>(assigns_.size()) - 1; }
  /// Adds a clause at decision level 0. An empty (or falsified) clause makes
  /// the instance permanently unsatisfiable.
  void add_clause(std::span<const Lit> clause) override;
  [[nodiscard]] std::size_t num_clauses() const { return original_count_; }

  /// Unknown when the cancel flag is raised or the deadline passes; checked at
  /// conflict boundaries.
  SatResult solve(std::span<const Lit> assumptions = {});
  /// Value of `var` in the last satisfying model.
  [[nodiscard]] bool model_value(int var) const { return model_.at(var) != 0; }
  [[nodiscard]] const std::vector<std::uint8_t>& model() const { return model_; }

  void set_cancel_flag(const std::atomic<bool>* flag) { cancel_ = flag; }
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) { deadline_ = deadline; }
  [[nodiscard]] const SolverStats& stats() const { return stats_; }

 private:
  struct Clause {
    std::uint32_t start = 0;  // literals live in pool_[start, start + size)
    std::uint32_t size = 0;
    bool learnt = false;
    bool removed = false;
    double activity = 0;
    std::uint32_t lbd = 0;
  };
  struct Watch {
    std::uint32_t clause;
    std::uint32_t blocker;
  };

  static std::uint32_t encode(Lit l) { return l > 0 ? 2u * static_cast<std::uint32_t>(l) : 2u * static_cast<std::uint32_t>(-l) + 1; }
  static std::uint32_t var_of(std::uint32_t l) { return l >> 1; }
  // 0 = false, 1 = true, 2 = unassigned
  std::uint32_t* lits(const Clause& c) { return pool_.data() + c.start; }
  std::uint8_t lit_value(std::uint32_t l) const {
    const std::uint8_t a = assigns_[l >> 1];
    return a == 2 ? 2 : static_cast<std::uint8_t>(a ^ (l & 1));
  }

  std::uint32_t attach(const std::vector<std::uint32_t>& lits, bool learnt);
  void enqueue(std::uint32_t lit, std::int32_t reason);
  std::int32_t propagate();
  void analyze(std::int32_t conflict, std::vector<std::uint32_t>& learnt, int& backtrack_level, std::uint32_t& lbd);
  void backtrack(int level);
  std::uint32_t pick_branch();
  void bump_var(std::uint32_t v);
  void bump_clause(Clause& c);
  void reduce_learnts();
  bool interrupted() const;

  // heap over variables ordered by activity
  void heap_insert(std::uint32_t v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  std::uint32_t heap_pop();

  std::vector<Clause> clauses_;
  std::vector<std::uint32_t> pool_;  // internal literals: 2*var + sign
  std::size_t garbage_ = 0;          // pool_ entries of removed clauses
  std::vector<std::vector<Watch>> watches_;  // per internal literal: clauses watching its negation
  std::vector<std::uint8_t> assigns_;
  std::vector<std::uint8_t> phase_;
  std::vector<int> level_;
  std::vector<std::int32_t> reason_;
  std::vector<double> activity_;
  std::vector<std::uint32_t> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<std::uint32_t> heap_;
  std::vector<std::int32_t> heap_pos_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::uint8_t> model_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  bool unsat_ = false;
  std::size_t original_count_ = 0;
  std::size_t learnt_count_ = 0;
  std::uint64_t rng_state_;
  SolverStats stats_;
  const std::atomic<bool>* cancel_ = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
};

}  // namespace redactor

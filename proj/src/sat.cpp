#include "redactor/sat.hpp"

#include <algorithm>
#include <cstdlib>

#include "redactor/netlist.hpp"

namespace redactor {

bool satisfies(const std::vector<std::vector<Lit>>& clauses, const std::vector<std::uint8_t>& assignment) {
  for (const auto& c : clauses) {
    bool sat = false;
    for (Lit l : c) {
      const int v = std::abs(l);
      if (v >= static_cast<int>(assignment.size())) throw Error("satisfies: assignment too short");
      if ((assignment[v] != 0) == (l > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

namespace {

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x %= size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

}  // namespace

Solver::Solver(std::uint64_t seed) : rng_state_(seed * 0x9E3779B97F4A7C15ull + 1) {
  assigns_.push_back(2);
  phase_.push_back(0);
  level_.push_back(0);
  reason_.push_back(-1);
  activity_.push_back(0);
  heap_pos_.push_back(-1);
  seen_.push_back(0);
  watches_.resize(2);
}

int Solver::new_var() {
  const auto v = static_cast<std::uint32_t>(assigns_.size());
  assigns_.push_back(2);
  phase_.push_back(0);
  level_.push_back(0);
  reason_.push_back(-1);
  // Tiny seeded perturbation so equal-activity ties depend only on the seed.
  rng_state_ ^= rng_state_ << 13;
  rng_state_ ^= rng_state_ >> 7;
  rng_state_ ^= rng_state_ << 17;
  activity_.push_back(static_cast<double>(rng_state_ % 1000) * 1e-9);
  heap_pos_.push_back(-1);
  seen_.push_back(0);
  watches_.resize(2 * (v + 1));
  heap_insert(v);
  return static_cast<int>(v);
}

void Solver::add_clause(std::span<const Lit> clause) {
  ++original_count_;
  if (unsat_) return;
  std::vector<std::uint32_t> lits;
  lits.reserve(clause.size());
  for (Lit l : clause) {
    if (l == 0 || std::abs(l) > num_vars()) throw Error("solver: literal references an unallocated variable");
    lits.push_back(encode(l));
  }
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  std::vector<std::uint32_t> kept;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (i + 1 < lits.size() && (lits[i] ^ 1) == lits[i + 1]) return;  // tautology
    const std::uint8_t v = lit_value(lits[i]);
    if (v == 1 && level_[var_of(lits[i])] == 0) return;
    if (v == 0 && level_[var_of(lits[i])] == 0) continue;
    kept.push_back(lits[i]);
  }
  if (kept.empty()) {
    unsat_ = true;
    return;
  }
  if (kept.size() == 1) {
    enqueue(kept[0], -1);
    if (propagate() >= 0) unsat_ = true;
    return;
  }
  attach(std::move(kept), false);
}

std::uint32_t Solver::attach(const std::vector<std::uint32_t>& lits, bool learnt) {
  const auto ci = static_cast<std::uint32_t>(clauses_.size());
  watches_[lits[0] ^ 1].push_back({ci, lits[1]});
  watches_[lits[1] ^ 1].push_back({ci, lits[0]});
  Clause c;
  c.start = static_cast<std::uint32_t>(pool_.size());
  c.size = static_cast<std::uint32_t>(lits.size());
  pool_.insert(pool_.end(), lits.begin(), lits.end());
  c.learnt = learnt;
  clauses_.push_back(std::move(c));
  if (learnt) ++learnt_count_;
  return ci;
}

void Solver::enqueue(std::uint32_t lit, std::int32_t reason) {
  const std::uint32_t v = var_of(lit);
  assigns_[v] = static_cast<std::uint8_t>((lit & 1) ^ 1);
  level_[v] = static_cast<int>(trail_lim_.size());
  reason_[v] = reason;
  trail_.push_back(lit);
}

std::int32_t Solver::propagate() {
  while (qhead_ < trail_.size()) {
    const std::uint32_t p = trail_[qhead_++];
    const std::uint32_t false_lit = p ^ 1;
    auto& ws = watches_[p];
    ++stats_.propagations;
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const Watch w = ws[i++];
      if (lit_value(w.blocker) == 1) {
        ws[j++] = w;
        continue;
      }
      const Clause& c = clauses_[w.clause];
      if (c.removed) continue;
      std::uint32_t* cl = lits(c);
      if (cl[0] == false_lit) std::swap(cl[0], cl[1]);
      const std::uint32_t first = cl[0];
      if (first != w.blocker && lit_value(first) == 1) {
        ws[j++] = {w.clause, first};
        continue;
      }
      bool moved = false;
      for (std::uint32_t k = 2; k < c.size; ++k)
        if (lit_value(cl[k]) != 0) {
          std::swap(cl[1], cl[k]);
          watches_[cl[1] ^ 1].push_back({w.clause, first});
          moved = true;
          break;
        }
      if (moved) continue;
      ws[j++] = {w.clause, first};
      if (lit_value(first) == 0) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return static_cast<std::int32_t>(w.clause);
      }
      enqueue(first, static_cast<std::int32_t>(w.clause));
    }
    ws.resize(j);
  }
  return -1;
}

void Solver::bump_var(std::uint32_t v) {
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos_[v]));
}

void Solver::bump_clause(Clause& c) {
  c.activity += clause_inc_;
  if (c.activity > 1e20) {
    for (Clause& d : clauses_)
      if (d.learnt) d.activity *= 1e-20;
    clause_inc_ *= 1e-20;
  }
}

void Solver::analyze(std::int32_t conflict, std::vector<std::uint32_t>& learnt, int& backtrack_level,
                     std::uint32_t& lbd) {
  learnt.assign(1, 0);
  const int current = static_cast<int>(trail_lim_.size());
  int path = 0;
  std::uint32_t p = 0;
  bool have_p = false;
  std::size_t idx = trail_.size();
  std::int32_t confl = conflict;
  do {
    Clause& c = clauses_[confl];
    if (c.learnt) bump_clause(c);
    const std::uint32_t* cl = lits(c);
    for (std::uint32_t k = have_p ? 1 : 0; k < c.size; ++k) {
      const std::uint32_t q = cl[k];
      const std::uint32_t v = var_of(q);
      if (seen_[v] || level_[v] == 0) continue;
      bump_var(v);
      seen_[v] = 1;
      if (level_[v] >= current) ++path;
      else learnt.push_back(q);
    }
    do {
      --idx;
    } while (!seen_[var_of(trail_[idx])]);
    p = trail_[idx];
    have_p = true;
    confl = reason_[var_of(p)];
    seen_[var_of(p)] = 0;
    --path;
  } while (path > 0);
  learnt[0] = p ^ 1;

  // Drop literals implied by the rest of the clause through their reasons.
  std::vector<std::uint32_t> kept{learnt[0]};
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    const std::uint32_t v = var_of(learnt[k]);
    const std::int32_t r = reason_[v];
    bool redundant = r >= 0;
    if (redundant)
      for (std::uint32_t m = 1; m < clauses_[r].size; ++m) {
        const std::uint32_t u = var_of(lits(clauses_[r])[m]);
        if (!seen_[u] && level_[u] > 0) {
          redundant = false;
          break;
        }
      }
    if (!redundant) kept.push_back(learnt[k]);
  }
  for (std::size_t k = 1; k < learnt.size(); ++k) seen_[var_of(learnt[k])] = 0;
  learnt = std::move(kept);

  backtrack_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k)
      if (level_[var_of(learnt[k])] > level_[var_of(learnt[max_i])]) max_i = k;
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level_[var_of(learnt[1])];
  }
  std::vector<int> levels;
  for (std::uint32_t l : learnt) levels.push_back(level_[var_of(l)]);
  std::sort(levels.begin(), levels.end());
  lbd = static_cast<std::uint32_t>(std::unique(levels.begin(), levels.end()) - levels.begin());
}

void Solver::backtrack(int level) {
  if (static_cast<int>(trail_lim_.size()) <= level) return;
  for (std::size_t i = trail_.size(); i > trail_lim_[level]; --i) {
    const std::uint32_t v = var_of(trail_[i - 1]);
    phase_[v] = assigns_[v];
    assigns_[v] = 2;
    reason_[v] = -1;
    heap_insert(v);
  }
  trail_.resize(trail_lim_[level]);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
}

void Solver::heap_insert(std::uint32_t v) {
  if (heap_pos_[v] >= 0) return;
  heap_pos_[v] = static_cast<std::int32_t>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void Solver::heap_up(std::size_t i) {
  const std::uint32_t v = heap_[i];
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (activity_[heap_[parent]] >= activity_[v]) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = static_cast<std::int32_t>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<std::int32_t>(i);
}

void Solver::heap_down(std::size_t i) {
  const std::uint32_t v = heap_[i];
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() && activity_[heap_[child + 1]] > activity_[heap_[child]]) ++child;
    if (activity_[heap_[child]] <= activity_[v]) break;
    heap_[i] = heap_[child];
    heap_pos_[heap_[i]] = static_cast<std::int32_t>(i);
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<std::int32_t>(i);
}

std::uint32_t Solver::heap_pop() {
  const std::uint32_t top = heap_[0];
  heap_pos_[top] = -1;
  heap_[0] = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_pos_[heap_[0]] = 0;
    heap_down(0);
  }
  return top;
}

std::uint32_t Solver::pick_branch() {
  while (!heap_.empty()) {
    const std::uint32_t v = heap_pop();
    if (assigns_[v] == 2) return v;
  }
  return 0;
}

void Solver::reduce_learnts() {
  std::vector<std::uint32_t> cand;
  for (std::uint32_t ci = 0; ci < clauses_.size(); ++ci) {
    const Clause& c = clauses_[ci];
    if (!c.learnt || c.removed || c.lbd <= 2) continue;
    const std::uint32_t v = var_of(lits(c)[0]);
    if (assigns_[v] != 2 && reason_[v] == static_cast<std::int32_t>(ci)) continue;  // locked
    cand.push_back(ci);
  }
  std::sort(cand.begin(), cand.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (clauses_[a].lbd != clauses_[b].lbd) return clauses_[a].lbd > clauses_[b].lbd;
    if (clauses_[a].activity != clauses_[b].activity) return clauses_[a].activity < clauses_[b].activity;
    return a < b;
  });
  for (std::size_t i = 0; i < cand.size() / 2; ++i) {
    Clause& c = clauses_[cand[i]];
    c.removed = true;
    garbage_ += c.size;
    --learnt_count_;
  }
  if (garbage_ * 2 > pool_.size()) {
    std::vector<std::uint32_t> fresh;
    fresh.reserve(pool_.size() - garbage_);
    for (Clause& c : clauses_) {
      const std::uint32_t start = static_cast<std::uint32_t>(fresh.size());
      if (!c.removed) fresh.insert(fresh.end(), pool_.begin() + c.start, pool_.begin() + c.start + c.size);
      c.start = start;
      if (c.removed) c.size = 0;
    }
    pool_ = std::move(fresh);
    garbage_ = 0;
  }
}

bool Solver::interrupted() const {
  if (cancel_ && cancel_->load(std::memory_order_relaxed)) return true;
  return deadline_ && std::chrono::steady_clock::now() >= *deadline_;
}

SatResult Solver::solve(std::span<const Lit> assumptions) {
  if (unsat_) return SatResult::Unsat;
  backtrack(0);
  if (propagate() >= 0) {
    unsat_ = true;
    return SatResult::Unsat;
  }
  std::vector<std::uint32_t> assume;
  for (Lit l : assumptions) {
    if (l == 0 || std::abs(l) > num_vars()) throw Error("solver: assumption references an unallocated variable");
    assume.push_back(encode(l));
  }
  std::vector<std::uint32_t> learnt;
  int restart_index = 0;
  std::uint64_t restart_limit = static_cast<std::uint64_t>(100 * luby(2, restart_index));
  std::uint64_t since_restart = 0;
  double max_learnts = std::max<double>(static_cast<double>(original_count_) / 3.0, 5000.0);

  for (;;) {
    const std::int32_t confl = propagate();
    if (confl >= 0) {
      ++stats_.conflicts;
      ++since_restart;
      if (trail_lim_.empty()) {
        unsat_ = true;
        return SatResult::Unsat;
      }
      if (interrupted()) {
        backtrack(0);
        return SatResult::Unknown;
      }
      int bt = 0;
      std::uint32_t lbd = 0;
      analyze(confl, learnt, bt, lbd);
      backtrack(bt);
      if (learnt.size() == 1) {
        enqueue(learnt[0], -1);
      } else {
        const std::uint32_t ci = attach(learnt, true);
        clauses_[ci].lbd = lbd;
        bump_clause(clauses_[ci]);
        enqueue(learnt[0], static_cast<std::int32_t>(ci));
      }
      ++stats_.learnts;
      var_inc_ /= 0.95;
      clause_inc_ /= 0.999;
      continue;
    }
    if (since_restart >= restart_limit) {
      backtrack(0);
      ++stats_.restarts;
      since_restart = 0;
      restart_limit = static_cast<std::uint64_t>(100 * luby(2, ++restart_index));
      continue;
    }
    if (static_cast<double>(learnt_count_) > max_learnts + static_cast<double>(trail_.size())) {
      reduce_learnts();
      max_learnts *= 1.1;
    }
    const std::size_t d = trail_lim_.size();
    if (d < assume.size()) {
      const std::uint32_t a = assume[d];
      const std::uint8_t v = lit_value(a);
      if (v == 0) {
        backtrack(0);
        return SatResult::Unsat;  // unsatisfiable under these assumptions only
      }
      trail_lim_.push_back(trail_.size());
      if (v == 2) enqueue(a, -1);
      continue;
    }
    const std::uint32_t v = pick_branch();
    if (v == 0) {
      model_.assign(assigns_.size(), 0);
      for (std::size_t i = 1; i < assigns_.size(); ++i) model_[i] = assigns_[i] == 1;
      backtrack(0);
      return SatResult::Sat;
    }
    ++stats_.decisions;
    trail_lim_.push_back(trail_.size());
    enqueue(2 * v + (phase_[v] == 1 ? 0u : 1u), -1);
  }
}

}  // namespace redactor

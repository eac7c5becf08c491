#include "atlforge/sat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace atlforge::sat {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Sat: return "sat";
    case Status::Unsat: return "unsat";
    case Status::Unknown: return "unknown";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// DIMACS

std::string Cnf::to_dimacs() const {
  std::ostringstream os;
  os << "p cnf " << num_vars << ' ' << clauses.size() << '\n';
  for (const auto& c : clauses) {
    for (Lit l : c) os << (l.negative() ? -(l.var() + 1) : l.var() + 1) << ' ';
    os << "0\n";
  }
  return os.str();
}

Cnf Cnf::from_dimacs(std::string_view text) {
  Cnf cnf;
  std::istringstream is{std::string(text)};
  std::string line;
  bool header = false;
  long declared_clauses = 0;
  Clause current;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "c" || first[0] == 'c' || first[0] == '%') continue;
    if (first == "p") {
      std::string fmt;
      long v = 0;
      if (!(ls >> fmt >> v >> declared_clauses) || fmt != "cnf" || v < 0 || declared_clauses < 0)
        throw std::invalid_argument("malformed DIMACS header: " + line);
      cnf.num_vars = static_cast<int>(v);
      header = true;
      continue;
    }
    if (!header) throw std::invalid_argument("DIMACS clause before 'p cnf' header");
    std::istringstream cs(line);
    long x = 0;
    while (cs >> x) {
      if (x == 0) {
        cnf.clauses.push_back(std::move(current));
        current.clear();
        continue;
      }
      long v = std::labs(x);
      if (v > cnf.num_vars) throw std::invalid_argument("DIMACS literal " + std::to_string(x) + " exceeds declared variables");
      current.push_back(Lit(static_cast<Var>(v - 1), x < 0));
    }
    if (!cs.eof()) throw std::invalid_argument("malformed DIMACS clause line: " + line);
  }
  if (!current.empty()) throw std::invalid_argument("DIMACS clause not terminated by 0");
  if (!header) throw std::invalid_argument("missing 'p cnf' header");
  if (static_cast<long>(cnf.clauses.size()) != declared_clauses)
    throw std::invalid_argument("DIMACS header declares " + std::to_string(declared_clauses) + " clauses, found " +
                                std::to_string(cnf.clauses.size()));
  return cnf;
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& model) {
  if (model.size() < static_cast<std::size_t>(cnf.num_vars)) return false;
  for (const auto& c : cnf.clauses) {
    bool sat = false;
    for (Lit l : c) {
      if (model[static_cast<std::size_t>(l.var())] != l.negative()) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// solver

namespace {

double luby(double y, std::uint64_t x) {
  std::uint64_t size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

Solver::Solver(SolverOptions options) : opts_(options) {}

Var Solver::new_var() {
  Var v = num_vars();
  assigns_.push_back(Value::Undef);
  level_.push_back(0);
  reason_.push_back(-1);
  polarity_.push_back(1);  // 1 = prefer false
  seen_.push_back(0);
  activity_.push_back(0.0);
  heap_pos_.push_back(-1);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

void Solver::add_cnf(const Cnf& cnf) {
  while (num_vars() < cnf.num_vars) new_var();
  for (const auto& c : cnf.clauses) add_clause(c);
}

void Solver::set_theory(TheoryHook* hook, std::vector<bool> visible) {
  theory_ = hook;
  visible_ = std::move(visible);
  visible_.resize(static_cast<std::size_t>(num_vars()), false);
}

void Solver::add_clause(std::span<const Lit> clause) {
  for (Lit l : clause)
    if (l.var() < 0 || l.var() >= num_vars())
      throw std::out_of_range("literal on undeclared variable " + std::to_string(l.var()));
  if (!ok_) return;
  cancel_until(0);

  Clause c(clause.begin(), clause.end());
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  Clause kept;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i + 1 < c.size() && c[i + 1] == ~c[i]) return;  // tautology
    Value v = value(c[i]);
    if (v == Value::True) return;
    if (v == Value::Undef) kept.push_back(c[i]);
  }
  if (kept.empty()) {
    ok_ = false;
    return;
  }
  if (kept.size() == 1) {
    enqueue(kept[0], -1);
    if (propagate() >= 0) ok_ = false;
    return;
  }
  attach(std::move(kept), false);
}

int Solver::attach(Clause lits, bool learnt) {
  int cref = static_cast<int>(clauses_.size());
  watches_[static_cast<std::size_t>(lits[0].code())].push_back({cref, lits[1]});
  watches_[static_cast<std::size_t>(lits[1].code())].push_back({cref, lits[0]});
  clauses_.push_back({std::move(lits), learnt});
  return cref;
}

void Solver::enqueue(Lit l, int reason) {
  auto v = static_cast<std::size_t>(l.var());
  assigns_[v] = l.negative() ? Value::False : Value::True;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

int Solver::propagate() {
  int confl = -1;
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    Lit false_lit = ~p;
    auto& ws = watches_[static_cast<std::size_t>(false_lit.code())];
    ++stats_.propagations;
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      Watcher w = ws[i++];
      if (value(w.blocker) == Value::True) {
        ws[j++] = w;
        continue;
      }
      auto& c = clauses_[static_cast<std::size_t>(w.cref)].lits;
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      Lit first = c[0];
      Watcher nw{w.cref, first};
      if (first != w.blocker && value(first) == Value::True) {
        ws[j++] = nw;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != Value::False) {
          std::swap(c[1], c[k]);
          watches_[static_cast<std::size_t>(c[1].code())].push_back(nw);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = nw;
      if (value(first) == Value::False) {
        confl = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (confl >= 0) break;
  }
  return confl;
}

void Solver::cancel_until(int level) {
  if (decision_level() <= level) return;
  const auto stop = static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(level)]);
  for (std::size_t k = trail_.size(); k-- > stop;) {
    auto v = static_cast<std::size_t>(trail_[k].var());
    polarity_[v] = trail_[k].negative() ? 1 : 0;
    assigns_[v] = Value::Undef;
    reason_[v] = -1;
    heap_insert(static_cast<Var>(v));
  }
  trail_.resize(stop);
  trail_lim_.resize(static_cast<std::size_t>(level));
  qhead_ = trail_.size();
  theory_mark_ = std::min(theory_mark_, trail_.size());
}

// True when l is implied by the other marked literals through reason
// chains; levels is an abstraction of the decision levels in the clause.
bool Solver::lit_redundant(Lit l, std::uint32_t levels) {
  analyze_stack_.clear();
  analyze_stack_.push_back(l);
  const std::size_t top = analyze_toclear_.size();
  while (!analyze_stack_.empty()) {
    Lit q = analyze_stack_.back();
    analyze_stack_.pop_back();
    const auto& c = clauses_[static_cast<std::size_t>(reason_[static_cast<std::size_t>(q.var())])].lits;
    for (std::size_t k = 1; k < c.size(); ++k) {
      Var v = c[k].var();
      auto uv = static_cast<std::size_t>(v);
      if (seen_[uv] || level_[uv] == 0) continue;
      if (reason_[uv] >= 0 && (levels >> (level_[uv] & 31) & 1U)) {
        seen_[uv] = 1;
        analyze_stack_.push_back(c[k]);
        analyze_toclear_.push_back(v);
      } else {
        for (std::size_t t = top; t < analyze_toclear_.size(); ++t)
          seen_[static_cast<std::size_t>(analyze_toclear_[t])] = 0;
        analyze_toclear_.resize(top);
        return false;
      }
    }
  }
  return true;
}

void Solver::analyze(int confl, Clause& out, int& bt_level) {
  out.clear();
  out.push_back(Lit());
  int path = 0;
  Lit p;
  bool have_p = false;
  std::size_t index = trail_.size();

  do {
    const auto& c = clauses_[static_cast<std::size_t>(confl)].lits;
    for (std::size_t k = have_p ? 1 : 0; k < c.size(); ++k) {
      Lit q = c[k];
      auto v = static_cast<std::size_t>(q.var());
      if (seen_[v] || level_[v] == 0) continue;
      bump(q.var());
      seen_[v] = 1;
      if (level_[v] >= decision_level())
        ++path;
      else
        out.push_back(q);
    }
    while (!seen_[static_cast<std::size_t>(trail_[--index].var())]) {
    }
    p = trail_[index];
    have_p = true;
    confl = reason_[static_cast<std::size_t>(p.var())];
    seen_[static_cast<std::size_t>(p.var())] = 0;
    --path;
  } while (path > 0);
  out[0] = ~p;

  std::uint32_t levels = 0;
  for (std::size_t i = 1; i < out.size(); ++i) levels |= 1U << (level_of(out[i].var()) & 31);
  analyze_toclear_.clear();
  for (std::size_t i = 1; i < out.size(); ++i) analyze_toclear_.push_back(out[i].var());
  std::size_t j = 1;
  for (std::size_t i = 1; i < out.size(); ++i)
    if (reason_[static_cast<std::size_t>(out[i].var())] < 0 || !lit_redundant(out[i], levels)) out[j++] = out[i];
  out.resize(j);
  for (Var v : analyze_toclear_) seen_[static_cast<std::size_t>(v)] = 0;

  bt_level = 0;
  if (out.size() > 1) {
    std::size_t best = 1;
    for (std::size_t i = 2; i < out.size(); ++i)
      if (level_of(out[i].var()) > level_of(out[best].var())) best = i;
    std::swap(out[1], out[best]);
    bt_level = level_of(out[1].var());
  }
}

void Solver::resolve_conflict(int confl) {
  Clause learnt;
  int bt = 0;
  analyze(confl, learnt, bt);
  cancel_until(bt);
  ++stats_.learned;
  if (learnt.size() == 1) {
    enqueue(learnt[0], -1);
  } else {
    Lit first = learnt[0];
    int cref = attach(std::move(learnt), true);
    enqueue(first, cref);
  }
  var_inc_ /= opts_.var_decay;
}

bool Solver::theory_conflict(Clause clause) {
  ++stats_.theory_conflicts;
  for (Lit l : clause) {
    if (l.var() < 0 || l.var() >= num_vars() || value(l) != Value::False)
      throw std::logic_error("theory conflict clause is not falsified by the current assignment");
  }
  std::sort(clause.begin(), clause.end());
  clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
  std::erase_if(clause, [&](Lit l) { return level_of(l.var()) == 0; });
  if (clause.empty()) {
    ok_ = false;
    return false;
  }
  std::stable_sort(clause.begin(), clause.end(), [&](Lit a, Lit b) { return level_of(a.var()) > level_of(b.var()); });
  cancel_until(level_of(clause[0].var()));
  if (clause.size() == 1) {
    cancel_until(0);
    enqueue(clause[0], -1);
    return true;
  }
  int cref = attach(std::move(clause), true);
  resolve_conflict(cref);
  return true;
}

bool Solver::theory_check_due() const {
  if (decisions_since_check_ < opts_.partial_check_every) return false;
  for (std::size_t k = theory_mark_; k < trail_.size(); ++k)
    if (visible_[static_cast<std::size_t>(trail_[k].var())]) return true;
  return false;
}

Lit Solver::pick_branch() {
  while (!heap_.empty()) {
    Var v = heap_pop();
    if (assigns_[static_cast<std::size_t>(v)] == Value::Undef) return Lit(v, polarity_[static_cast<std::size_t>(v)] != 0);
  }
  return Lit();
}

Status Solver::solve(const Limits& limits) {
  model_.clear();
  if (!ok_) return Status::Unsat;
  cancel_until(0);
  visible_.resize(static_cast<std::size_t>(num_vars()), false);
  theory_mark_ = 0;
  decisions_since_check_ = opts_.partial_check_every;

  const std::uint64_t start_conflicts = stats_.conflicts;
  std::uint64_t restart_count = 0;
  std::uint64_t since_restart = 0;
  double restart_limit = luby(2.0, 0) * opts_.restart_base;

  auto out_of_budget = [&] {
    if (limits.max_conflicts && stats_.conflicts - start_conflicts >= limits.max_conflicts) return true;
    if (limits.deadline && std::chrono::steady_clock::now() >= *limits.deadline) return true;
    return false;
  };

  for (;;) {
    int confl = propagate();
    if (confl >= 0) {
      ++stats_.conflicts;
      ++since_restart;
      if (decision_level() == 0) {
        ok_ = false;
        return Status::Unsat;
      }
      resolve_conflict(confl);
      continue;
    }

    if (out_of_budget()) {
      cancel_until(0);
      return Status::Unknown;
    }
    if (since_restart >= restart_limit) {
      ++stats_.restarts;
      since_restart = 0;
      restart_limit = luby(2.0, ++restart_count) * opts_.restart_base;
      cancel_until(0);
      continue;
    }

    if (theory_ && theory_check_due()) {
      ++stats_.theory_partial_calls;
      theory_mark_ = trail_.size();
      decisions_since_check_ = 0;
      auto verdict = theory_->on_partial(assigns_);
      if (verdict.conflict) {
        ++stats_.conflicts;
        ++since_restart;
        if (!theory_conflict(std::move(verdict.clause))) return Status::Unsat;
        continue;
      }
    }

    Lit next = pick_branch();
    if (next == Lit()) {
      if (theory_) {
        ++stats_.theory_complete_calls;
        auto verdict = theory_->on_complete(assigns_);
        if (verdict.conflict) {
          ++stats_.conflicts;
          ++since_restart;
          if (!theory_conflict(std::move(verdict.clause))) return Status::Unsat;
          continue;
        }
      }
      model_.resize(assigns_.size());
      for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == Value::True;
      cancel_until(0);
      return Status::Sat;
    }
    ++stats_.decisions;
    ++decisions_since_check_;
    trail_lim_.push_back(static_cast<int>(trail_.size()));
    enqueue(next, -1);
  }
}

// ---------------------------------------------------------------------------
// activity heap (max-activity first, ties to the lower variable)

bool Solver::heap_less(Var a, Var b) const {
  double x = activity_[static_cast<std::size_t>(a)], y = activity_[static_cast<std::size_t>(b)];
  return x > y || (x == y && a < b);
}

void Solver::bump(Var v) {
  auto& a = activity_[static_cast<std::size_t>(v)];
  a += var_inc_;
  if (a > 1e100) {
    for (auto& x : activity_) x *= 1e-100;
    var_inc_ *= 1e-100;
  }
  int pos = heap_pos_[static_cast<std::size_t>(v)];
  if (pos >= 0) heap_up(static_cast<std::size_t>(pos));
}

void Solver::heap_insert(Var v) {
  if (heap_pos_[static_cast<std::size_t>(v)] >= 0) return;
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void Solver::heap_up(std::size_t i) {
  Var v = heap_[i];
  while (i > 0) {
    std::size_t parent = (i - 1) / 2;
    if (!heap_less(v, heap_[parent])) break;
    heap_[i] = heap_[parent];
    heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
}

void Solver::heap_down(std::size_t i) {
  Var v = heap_[i];
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() && heap_less(heap_[child + 1], heap_[child])) ++child;
    if (!heap_less(heap_[child], v)) break;
    heap_[i] = heap_[child];
    heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
    i = child;
  }
  heap_[i] = v;
  heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
}

Var Solver::heap_pop() {
  Var top = heap_.front();
  heap_pos_[static_cast<std::size_t>(top)] = -1;
  Var last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[static_cast<std::size_t>(last)] = 0;
    heap_down(0);
  }
  return top;
}

}  // namespace atlforge::sat

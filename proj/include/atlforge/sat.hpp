#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/// Conflict-driven clause learning with a theory callback.
namespace atlforge::sat {

using Var = int;

class Lit {
 public:
  constexpr Lit() = default;
  constexpr explicit Lit(Var v, bool negative = false) : code_(2 * v + (negative ? 1 : 0)) {}

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool negative() const { return code_ & 1; }
  constexpr int code() const { return code_; }
  constexpr Lit operator~() const { return from_code(code_ ^ 1); }
  static constexpr Lit from_code(int c) {
    Lit l;
    l.code_ = c;
    return l;
  }

  friend constexpr bool operator==(Lit, Lit) = default;
  friend constexpr auto operator<=>(Lit, Lit) = default;

 private:
  int code_ = -2;
};

inline constexpr Lit pos(Var v) { return Lit(v, false); }
inline constexpr Lit neg(Var v) { return Lit(v, true); }

enum class Value : std::uint8_t { False = 0, True = 1, Undef = 2 };

inline Value value_of(std::span<const Value> assignment, Lit l) {
  Value v = assignment[static_cast<std::size_t>(l.var())];
  if (v == Value::Undef) return v;
  return static_cast<Value>(static_cast<std::uint8_t>(v) ^ (l.negative() ? 1U : 0U));
}

using Clause = std::vector<Lit>;

struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;

  Var new_var() { return num_vars++; }
  void add(Clause c) { clauses.push_back(std::move(c)); }

  std::string to_dimacs() const;
  /// Throws std::invalid_argument on malformed input.
  static Cnf from_dimacs(std::string_view text);
};

/// Independent check that a total assignment satisfies every clause.
bool satisfies(const Cnf& cnf, const std::vector<bool>& model);

struct TheoryVerdict {
  bool conflict = false;
  /// Every literal must be false under the assignment the hook was shown.
  Clause clause;

  static TheoryVerdict ok() { return {}; }
  static TheoryVerdict reject(Clause c) { return {true, std::move(c)}; }
};

class TheoryHook {
 public:
  virtual ~TheoryHook() = default;
  /// Called after propagation settles without conflict.
  virtual TheoryVerdict on_partial(std::span<const Value> assignment) = 0;
  /// Called once every variable is assigned.
  virtual TheoryVerdict on_complete(std::span<const Value> assignment) = 0;
};

enum class Status { Sat, Unsat, Unknown };
std::string_view to_string(Status s);

struct SolverOptions {
  /// on_partial runs once every this many decisions that assigned a
  /// theory-visible variable.
  int partial_check_every = 1;
  double var_decay = 0.95;
  int restart_base = 100;
};

struct Limits {
  std::uint64_t max_conflicts = 0;  // 0 = unlimited
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct SolverStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learned = 0;
  std::uint64_t theory_partial_calls = 0;
  std::uint64_t theory_complete_calls = 0;
  std::uint64_t theory_conflicts = 0;
};

class Solver {
 public:
  explicit Solver(SolverOptions options = {});

  Var new_var();
  int num_vars() const { return static_cast<int>(assigns_.size()); }

  /// Throws std::out_of_range for undeclared variables. Usable between solves.
  void add_clause(std::span<const Lit> clause);
  void add_clause(std::initializer_list<Lit> clause) { add_clause(std::span<const Lit>(clause.begin(), clause.size())); }
  /// Declares missing variables, then adds every clause.
  void add_cnf(const Cnf& cnf);

  /// visible[v] marks variables whose assignment the theory reads.
  void set_theory(TheoryHook* hook, std::vector<bool> visible);

  Status solve(const Limits& limits = {});

  /// Model of the last Sat answer.
  const std::vector<bool>& model() const { return model_; }
  const SolverStats& stats() const { return stats_; }

 private:
  struct ClauseRec {
    Clause lits;
    bool learnt;
  };
  struct Watcher {
    int cref;
    Lit blocker;
  };

  Value value(Lit l) const { return value_of(assigns_, l); }
  int level_of(Var v) const { return level_[static_cast<std::size_t>(v)]; }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(Lit l, int reason);
  int propagate();
  void cancel_until(int level);
  int attach(Clause lits, bool learnt);
  void analyze(int confl, Clause& out, int& bt_level);
  bool lit_redundant(Lit l, std::uint32_t levels);
  void resolve_conflict(int confl);
  bool theory_conflict(Clause clause);
  Lit pick_branch();
  bool theory_check_due() const;

  void bump(Var v);
  void heap_insert(Var v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  Var heap_pop();
  bool heap_less(Var a, Var b) const;

  SolverOptions opts_;
  bool ok_ = true;
  std::vector<ClauseRec> clauses_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<Value> assigns_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<char> polarity_;
  std::vector<char> seen_;
  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<Lit> analyze_stack_;
  std::vector<Var> analyze_toclear_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<Var> heap_;
  std::vector<int> heap_pos_;

  TheoryHook* theory_ = nullptr;
  std::vector<bool> visible_;
  std::size_t theory_mark_ = 0;
  int decisions_since_check_ = 0;

  std::vector<bool> model_;
  SolverStats stats_;
};

}  // namespace atlforge::sat

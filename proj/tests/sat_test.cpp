#include <gtest/gtest.h>

#include <random>

#include "atlforge/sat.hpp"
#include "oracles.hpp"

using namespace atlforge::sat;
using atlforge::testing::brute_force_sat;

namespace {

Cnf pigeonhole(int pigeons, int holes) {
  Cnf cnf;
  auto x = [&](int p, int h) { return p * holes + h; };
  cnf.num_vars = pigeons * holes;
  for (int p = 0; p < pigeons; ++p) {
    Clause c;
    for (int h = 0; h < holes; ++h) c.push_back(pos(x(p, h)));
    cnf.add(c);
  }
  for (int h = 0; h < holes; ++h)
    for (int p = 0; p < pigeons; ++p)
      for (int q = p + 1; q < pigeons; ++q) cnf.add({neg(x(p, h)), neg(x(q, h))});
  return cnf;
}

Cnf random_3cnf(std::mt19937_64& rng, int vars, int clauses) {
  Cnf cnf;
  cnf.num_vars = vars;
  for (int k = 0; k < clauses; ++k) {
    Clause c;
    while (c.size() < 3) {
      const Lit l(static_cast<Var>(rng() % static_cast<std::uint64_t>(vars)), rng() & 1U);
      bool dup = false;
      for (auto m : c) dup = dup || m.var() == l.var();
      if (!dup) c.push_back(l);
    }
    cnf.add(c);
  }
  return cnf;
}

// Rejects any assignment where both literals hold, once both are assigned.
class ForbidPair : public TheoryHook {
 public:
  ForbidPair(Lit a, Lit b) : a_(a), b_(b) {}
  TheoryVerdict on_partial(std::span<const Value> asg) override { return check(asg); }
  TheoryVerdict on_complete(std::span<const Value> asg) override { return check(asg); }
  int calls = 0;

 private:
  TheoryVerdict check(std::span<const Value> asg) {
    ++calls;
    if (value_of(asg, a_) == Value::True && value_of(asg, b_) == Value::True) return TheoryVerdict::reject({~a_, ~b_});
    return TheoryVerdict::ok();
  }
  Lit a_, b_;
};

// Returns a clause the assignment does not falsify.
class BrokenHook : public TheoryHook {
 public:
  TheoryVerdict on_partial(std::span<const Value>) override { return TheoryVerdict::ok(); }
  TheoryVerdict on_complete(std::span<const Value> asg) override {
    return TheoryVerdict::reject({Lit(0, asg[0] == Value::False)});
  }
};

}  // namespace

TEST(Solve, UnitClause) {
  Solver s;
  const Var x = s.new_var();
  s.add_clause({pos(x)});
  ASSERT_EQ(s.solve(), Status::Sat);
  EXPECT_TRUE(s.model()[0]);
}

TEST(Solve, ComplementaryUnits) {
  Solver s;
  const Var x = s.new_var();
  s.add_clause({pos(x)});
  s.add_clause({neg(x)});
  EXPECT_EQ(s.solve(), Status::Unsat);
}

TEST(Solve, PigeonholeFourIntoThree) {
  const Cnf php = pigeonhole(4, 3);
  ASSERT_EQ(php.num_vars, 12);
  EXPECT_FALSE(brute_force_sat(php));
  Solver s;
  s.add_cnf(php);
  EXPECT_EQ(s.solve(), Status::Unsat);
  EXPECT_GT(s.stats().conflicts, 0U);
}

TEST(Solve, PigeonholeThreeIntoThreeIsSat) {
  const Cnf php = pigeonhole(3, 3);
  Solver s;
  s.add_cnf(php);
  ASSERT_EQ(s.solve(), Status::Sat);
  EXPECT_TRUE(satisfies(php, s.model()));
}

TEST(Solve, RandomThreeCnfAgreesWithEnumeration) {
  std::mt19937_64 rng(1);
  int sat = 0, unsat = 0;
  for (int round = 0; round < 500; ++round) {
    const int vars = 3 + static_cast<int>(rng() % 18);
    // Around the phase transition ratio so both answers occur.
    const int clauses = static_cast<int>(vars * (3.0 + static_cast<double>(rng() % 30) / 10.0));
    const Cnf cnf = random_3cnf(rng, vars, clauses);
    Solver s;
    s.add_cnf(cnf);
    const Status st = s.solve();
    ASSERT_EQ(st == Status::Sat, brute_force_sat(cnf)) << cnf.to_dimacs();
    if (st == Status::Sat) {
      ASSERT_TRUE(satisfies(cnf, s.model()));
      ++sat;
    } else {
      ++unsat;
    }
  }
  EXPECT_GT(sat, 50);
  EXPECT_GT(unsat, 50);
}

TEST(Incremental, AddedClauseIsRespected) {
  Solver s;
  const Var x = s.new_var(), y = s.new_var();
  s.add_clause({pos(x), pos(y)});
  ASSERT_EQ(s.solve(), Status::Sat);
  EXPECT_TRUE(s.model()[0] || s.model()[1]);
}

TEST(Incremental, EmptyClauseMakesUnsat) {
  Solver s;
  s.new_var();
  ASSERT_EQ(s.solve(), Status::Sat);
  s.add_clause(std::span<const Lit>{});
  EXPECT_EQ(s.solve(), Status::Unsat);
}

TEST(Incremental, UnitAfterSat) {
  Solver s;
  const Var x = s.new_var(), y = s.new_var();
  s.add_clause({pos(x), pos(y)});
  s.add_clause({pos(x)});
  ASSERT_EQ(s.solve(), Status::Sat);
  ASSERT_TRUE(s.model()[0]);
  s.add_clause({neg(x)});
  EXPECT_EQ(s.solve(), Status::Unsat);

  Solver t;
  const Var a = t.new_var(), b = t.new_var();
  t.add_clause({pos(a), pos(b)});
  ASSERT_EQ(t.solve(), Status::Sat);
  t.add_clause({Lit(a, t.model()[0])});
  ASSERT_EQ(t.solve(), Status::Sat);
  EXPECT_TRUE(t.model()[1]);
}

TEST(Incremental, RandomClauseStreamsAgreeWithEnumeration) {
  std::mt19937_64 rng(2);
  for (int round = 0; round < 100; ++round) {
    const int vars = 4 + static_cast<int>(rng() % 10);
    const Cnf all = random_3cnf(rng, vars, vars * 6);
    Solver s;
    for (int v = 0; v < vars; ++v) s.new_var();
    Cnf prefix;
    prefix.num_vars = vars;
    for (std::size_t k = 0; k < all.clauses.size(); ++k) {
      s.add_clause(all.clauses[k]);
      prefix.add(all.clauses[k]);
      if (k % 5 != 4) continue;
      const Status st = s.solve();
      ASSERT_EQ(st == Status::Sat, brute_force_sat(prefix));
      if (st == Status::Sat) {
        ASSERT_TRUE(satisfies(prefix, s.model()));
      }
      if (st == Status::Unsat) break;
    }
  }
}

TEST(Incremental, UndeclaredVariableRejected) {
  Solver s;
  s.new_var();
  EXPECT_THROW(s.add_clause({pos(3)}), std::out_of_range);
}

TEST(Theory, HookEquivalentToClause) {
  std::mt19937_64 rng(3);
  int rejected = 0;
  for (int round = 0; round < 300; ++round) {
    const int vars = 3 + static_cast<int>(rng() % 10);
    const Cnf cnf = random_3cnf(rng, vars, vars * 4);
    const Lit a(static_cast<Var>(rng() % static_cast<std::uint64_t>(vars)), rng() & 1U);
    Lit b = a;
    while (b.var() == a.var()) b = Lit(static_cast<Var>(rng() % static_cast<std::uint64_t>(vars)), rng() & 1U);

    Cnf with_clause = cnf;
    with_clause.add({~a, ~b});
    Solver plain;
    plain.add_cnf(with_clause);

    ForbidPair hook(a, b);
    Solver hooked;
    hooked.add_cnf(cnf);
    hooked.set_theory(&hook, std::vector<bool>(static_cast<std::size_t>(vars), true));

    const Status expected = plain.solve();
    ASSERT_EQ(hooked.solve(), expected);
    ASSERT_EQ(expected == Status::Sat, brute_force_sat(with_clause));
    if (expected == Status::Sat) {
      EXPECT_TRUE(satisfies(with_clause, hooked.model()));
    }
    rejected += hooked.stats().theory_conflicts > 0;
  }
  EXPECT_GT(rejected, 0);
}

TEST(Theory, HookSeesCompleteAssignments) {
  Solver s;
  const Var x = s.new_var(), y = s.new_var();
  s.add_clause({pos(x), pos(y)});
  ForbidPair hook(pos(x), pos(y));
  s.set_theory(&hook, {true, true});
  ASSERT_EQ(s.solve(), Status::Sat);
  EXPECT_NE(s.model()[0], s.model()[1]);
  EXPECT_GT(s.stats().theory_complete_calls, 0U);
}

TEST(Theory, NonFalsifiedConflictClauseIsReported) {
  Solver s;
  s.new_var();
  BrokenHook hook;
  s.set_theory(&hook, {true});
  EXPECT_THROW(s.solve(), std::logic_error);
}

TEST(Limits, ConflictBudgetGivesUnknown) {
  Solver s;
  s.add_cnf(pigeonhole(9, 8));
  EXPECT_EQ(s.solve({.max_conflicts = 10, .deadline = std::nullopt}), Status::Unknown);
  EXPECT_LE(s.stats().conflicts, 11U);
}

TEST(Limits, ExpiredDeadlineGivesUnknown) {
  Solver s;
  s.add_cnf(pigeonhole(9, 8));
  EXPECT_EQ(s.solve({.max_conflicts = 0, .deadline = std::chrono::steady_clock::now()}), Status::Unknown);
}

TEST(Determinism, SameInputSameModel) {
  std::mt19937_64 rng(4);
  for (int round = 0; round < 50; ++round) {
    const Cnf cnf = random_3cnf(rng, 40, 160);
    Solver a, b;
    a.add_cnf(cnf);
    b.add_cnf(cnf);
    const Status sa = a.solve();
    ASSERT_EQ(sa, b.solve());
    if (sa == Status::Sat) {
      EXPECT_EQ(a.model(), b.model());
    }
    EXPECT_EQ(a.stats().conflicts, b.stats().conflicts);
  }
}

TEST(Dimacs, RoundTrip) {
  const Cnf php = pigeonhole(3, 2);
  const std::string text = php.to_dimacs();
  EXPECT_EQ(text.rfind("p cnf 6 ", 0), 0U);
  const Cnf back = Cnf::from_dimacs(text);
  EXPECT_EQ(back.num_vars, php.num_vars);
  EXPECT_EQ(back.clauses, php.clauses);
}

TEST(Dimacs, CommentsAndMultilineClauses) {
  const Cnf cnf = Cnf::from_dimacs("c hello\np cnf 3 2\n1 -2\n0 3 0\n");
  ASSERT_EQ(cnf.clauses.size(), 2U);
  EXPECT_EQ(cnf.clauses[0], (Clause{pos(0), neg(1)}));
  EXPECT_EQ(cnf.clauses[1], (Clause{pos(2)}));
}

TEST(Dimacs, MalformedInputs) {
  for (const char* bad : {"1 2 0\n", "p cnf 2 1\n1 3 0\n", "p cnf 2 1\n1 2\n", "p cnf 2 2\n1 0\n", "p dnf 1 1\n1 0\n"})
    EXPECT_THROW(Cnf::from_dimacs(bad), std::invalid_argument) << bad;
}

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "atlforge/checker_imperfect.hpp"
#include "atlforge/checker_perfect.hpp"
#include "atlforge/theory.hpp"
#include "corpus.hpp"

using namespace atlforge;
using atlforge::sat::Value;
using atlforge::testing::random_model;

namespace {

Signature tiny(std::mt19937_64& rng, Semantics sem) {
  // (local states, actions) per agent; at most 18 catalogue variables, so
  // completions can be enumerated.
  static const std::vector<std::vector<std::pair<int, int>>> shapes = {
      {{2, 2}}, {{1, 2}, {1, 2}}, {{2, 1}, {1, 2}}, {{2, 1}, {2, 1}}, {{3, 1}}};
  const auto& shape = shapes[rng() % shapes.size()];
  const int props = shape.size() == 1 || shape[0].first * shape[1].first <= 2 ? 2 : 1;
  Signature sig = generator_signature(static_cast<int>(shape.size()), props, sem);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    sig.agents[i].local_states = shape[i].first;
    sig.agents[i].actions = shape[i].second;
    if (sem == Semantics::Imperfect)
      for (int p = 0; p < props; ++p)
        if (rng() & 1U) sig.agents[i].observable.push_back(p);
  }
  return sig;
}

Formula random_formula(std::mt19937_64& rng, const Signature& sig, int max_k, int max_c) {
  const int agents = static_cast<int>(sig.agents.size());
  const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_k));
  GeneratorParams gp;
  gp.agents = agents;
  gp.propositions = static_cast<int>(sig.propositions.size());
  gp.target_k = k;
  gp.target_c = static_cast<int>(rng() % static_cast<std::uint64_t>(max_c + 1));
  gp.groups = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(k, 1 << agents)));
  gp.seed = rng();
  return generate(gp);
}

std::vector<Value> to_values(const std::vector<bool>& bits) {
  std::vector<Value> out;
  for (bool b : bits) out.push_back(b ? Value::True : Value::False);
  return out;
}

StateSet exact(const ModelSpec& spec, const Formula& f) {
  const auto gm = expand(spec);
  return spec.signature.semantics == Semantics::Perfect ? perfect::extension(gm, f) : imperfect::extension(gm, f);
}

// Calls visit(total assignment) for every valid completion of a partial one.
template <class Visit>
void for_each_completion(const Encoding& enc, const std::vector<Value>& partial, Visit&& visit) {
  std::vector<std::size_t> unknown;
  for (std::size_t v = 0; v < partial.size(); ++v)
    if (partial[v] == Value::Undef) unknown.push_back(v);
  ASSERT_LE(unknown.size(), 20U);
  std::vector<bool> bits(partial.size());
  for (std::size_t v = 0; v < partial.size(); ++v) bits[v] = partial[v] == Value::True;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << unknown.size()); ++m) {
    for (std::size_t k = 0; k < unknown.size(); ++k) bits[unknown[k]] = (m >> k) & 1U;
    if (sat::satisfies(enc.cnf, bits)) visit(bits);
  }
}

std::vector<Value> hide(const std::vector<Value>& total, double keep, std::mt19937_64& rng) {
  std::vector<Value> out = total;
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& v : out)
    if (u(rng) >= keep) v = Value::Undef;
  return out;
}

}  // namespace

TEST(Interval, TotalAssignmentIsExact) {
  std::mt19937_64 rng(1);
  for (int round = 0; round < 200; ++round) {
    const Signature sig = tiny(rng, round % 2 ? Semantics::Imperfect : Semantics::Perfect);
    const auto enc = build_encoding(sig);
    const ModelSpec spec = random_model(sig, rng);
    const auto values = to_values(characteristic_assignment(enc, spec));
    const theory::PartialModel pm(enc.catalogue, values);
    ASSERT_TRUE(pm.total());
    const Formula f = random_formula(rng, sig, 3, 3);
    for (const auto& [sub, iv] : theory::interval_eval(pm, f).nodes) {
      ASSERT_EQ(iv.lo, iv.hi) << print(sub, sig);
      ASSERT_EQ(iv.lo, exact(spec, sub)) << print(sub, sig) << " on " << sig.shape();
    }
  }
}

TEST(Interval, AllUnknownAtom) {
  std::mt19937_64 rng(2);
  const Signature sig = tiny(rng, Semantics::Perfect);
  const auto enc = build_encoding(sig);
  const std::vector<Value> none(enc.catalogue.size(), Value::Undef);
  const theory::PartialModel pm(enc.catalogue, none);
  const auto iv = theory::interval_eval(pm, Formula::atom(0)).root();
  EXPECT_TRUE(iv.lo.empty());
  EXPECT_EQ(iv.hi, StateSet::full(sig.global_state_count()));
}

TEST(Interval, SoundOverEveryCompletion) {
  std::mt19937_64 rng(3);
  std::size_t completions = 0, strict = 0;
  for (int round = 0; round < 100; ++round) {
    const Signature sig = tiny(rng, round % 2 ? Semantics::Imperfect : Semantics::Perfect);
    const auto enc = build_encoding(sig);
    const auto total = to_values(characteristic_assignment(enc, random_model(sig, rng)));
    const auto partial = hide(total, 0.4, rng);
    const theory::PartialModel pm(enc.catalogue, partial);
    const Formula f = random_formula(rng, sig, 3, 3);
    const auto nodes = theory::interval_eval(pm, f).nodes;
    std::size_t seen = 0;
    for_each_completion(enc, partial, [&](const std::vector<bool>& bits) {
      const ModelSpec spec = decode(enc.catalogue, bits);
      for (const auto& [sub, iv] : nodes) {
        const StateSet ext = exact(spec, sub);
        ASSERT_TRUE(iv.lo.subset_of(ext)) << print(sub, sig) << " on " << sig.shape();
        ASSERT_TRUE(ext.subset_of(iv.hi)) << print(sub, sig) << " on " << sig.shape();
      }
      ++seen;
    });
    ASSERT_GT(seen, 0U);
    completions += seen;
    strict += nodes.back().second.lo != nodes.back().second.hi;
  }
  EXPECT_GT(completions, 1000U);
  EXPECT_GT(strict, 10U);
}

TEST(Interval, MonotoneAlongRevealChains) {
  std::mt19937_64 rng(4);
  for (int round = 0; round < 100; ++round) {
    const Signature sig = tiny(rng, round % 2 ? Semantics::Imperfect : Semantics::Perfect);
    const auto enc = build_encoding(sig);
    const auto total = to_values(characteristic_assignment(enc, random_model(sig, rng)));
    const Formula f = random_formula(rng, sig, 3, 3);
    std::vector<std::size_t> order(total.size());
    for (std::size_t v = 0; v < order.size(); ++v) order[v] = v;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Value> partial(total.size(), Value::Undef);
    auto prev = theory::interval_eval(theory::PartialModel(enc.catalogue, partial), f).nodes;
    for (auto v : order) {
      partial[v] = total[v];
      auto next = theory::interval_eval(theory::PartialModel(enc.catalogue, partial), f).nodes;
      for (std::size_t k = 0; k < next.size(); ++k) {
        ASSERT_TRUE(prev[k].second.lo.subset_of(next[k].second.lo)) << print(next[k].first, sig);
        ASSERT_TRUE(next[k].second.hi.subset_of(prev[k].second.hi)) << print(next[k].first, sig);
        ASSERT_TRUE(next[k].second.lo.subset_of(next[k].second.hi));
      }
      prev = std::move(next);
    }
  }
}

TEST(Hook, ContradictionConflictsImmediately) {
  std::mt19937_64 rng(5);
  const Signature sig = tiny(rng, Semantics::Perfect);
  const auto enc = build_encoding(sig);
  theory::AtlTheory th(enc.catalogue, Formula::conjunction(Formula::atom(0), Formula::negation(Formula::atom(0))));
  const std::vector<Value> none(enc.catalogue.size(), Value::Undef);
  EXPECT_TRUE(th.refutes(none));
  const auto verdict = th.on_partial(none);
  EXPECT_TRUE(verdict.conflict);
  EXPECT_TRUE(verdict.clause.empty());
}

TEST(Hook, SingleAssignedLiteral) {
  Signature sig = generator_signature(1, 1);
  const auto enc = build_encoding(sig);
  theory::AtlTheory th(enc.catalogue, Formula::atom(0));
  std::vector<Value> values(enc.catalogue.size(), Value::Undef);
  const auto p = enc.catalogue.val_var(0, 0);
  values[static_cast<std::size_t>(p)] = Value::False;
  const auto verdict = th.on_partial(values);
  ASSERT_TRUE(verdict.conflict);
  EXPECT_EQ(verdict.clause, (sat::Clause{sat::pos(p)}));
}

TEST(Hook, OnCompleteAgreesWithCheckers) {
  std::mt19937_64 rng(6);
  int held = 0;
  for (int round = 0; round < 300; ++round) {
    const Signature sig = tiny(rng, round % 2 ? Semantics::Imperfect : Semantics::Perfect);
    const auto enc = build_encoding(sig);
    const ModelSpec spec = random_model(sig, rng);
    const auto values = to_values(characteristic_assignment(enc, spec));
    const Formula f = random_formula(rng, sig, 3, 3);
    theory::AtlTheory th(enc.catalogue, f);
    const auto gm = expand(spec);
    const bool expected = sig.semantics == Semantics::Perfect ? perfect::check(gm, f, 0) : imperfect::check_ir(gm, f, 0);
    const auto verdict = th.on_complete(values);
    ASSERT_EQ(!verdict.conflict, expected) << print(f, sig);
    held += expected;
    if (verdict.conflict) {
      for (auto l : verdict.clause) ASSERT_EQ(sat::value_of(values, l), Value::False);
    }
  }
  EXPECT_GT(held, 30);
  EXPECT_LT(held, 270);
}

TEST(Hook, ImperfectFailureCaughtOnlyByExactCheck) {
  // Agent a has one local state and actions {0,1}; b walks 0 -> 1 on a = 0
  // and 1 -> 2 on a = 1, falling back to 0 otherwise. Reaching q at b = 2
  // needs a to play differently at states it cannot tell apart.
  Signature sig = generator_signature(2, 1, Semantics::Imperfect);
  sig.agents[0].actions = 2;
  sig.agents[1].local_states = 3;
  ModelSpec spec;
  spec.signature = sig;
  spec.templates = {AgentTemplate{{{0, 1}}, {{0, 0}}},
                    AgentTemplate{{{0}, {0}, {0}}, {{1, 0}, {0, 2}, {2, 2}}}};
  spec.valuation = {{false, false, true}};
  ASSERT_TRUE(validate(spec).empty());
  const Formula f = Formula::eventually(0b01, Formula::atom(0));
  const auto gm = expand(spec);
  ASSERT_TRUE(perfect::check(gm, f, 0));
  ASSERT_FALSE(imperfect::check_ir(gm, f, 0));

  const auto enc = build_encoding(sig);
  const auto values = to_values(characteristic_assignment(enc, spec));
  const theory::PartialModel pm(enc.catalogue, values);
  EXPECT_TRUE(theory::interval_eval(pm, f, Semantics::Perfect).root().hi.contains(0));
  theory::AtlTheory th(enc.catalogue, f);
  const auto verdict = th.on_complete(values);
  EXPECT_TRUE(verdict.conflict);
  EXPECT_FALSE(verdict.clause.empty());
  for (auto l : verdict.clause) EXPECT_EQ(sat::value_of(values, l), Value::False);
}

TEST(Hook, SharedLeavesRefuteDualStrategicPair) {
  std::mt19937_64 rng(11);
  const Signature sig = tiny(rng, Semantics::Perfect);
  const auto enc = build_encoding(sig);
  const Formula g = Formula::eventually(1, Formula::atom(0));
  theory::AtlTheory th(enc.catalogue, Formula::conjunction(g, Formula::negation(g)));
  EXPECT_TRUE(th.refutes(std::vector<Value>(enc.catalogue.size(), Value::Undef)));
}

TEST(Explanation, MinimizedClauseStillRefutes) {
  std::mt19937_64 rng(8);
  int conflicts = 0;
  for (int round = 0; round < 400; ++round) {
    const Signature sig = tiny(rng, round % 2 ? Semantics::Imperfect : Semantics::Perfect);
    const auto enc = build_encoding(sig);
    const auto total = to_values(characteristic_assignment(enc, random_model(sig, rng)));
    const auto partial = hide(total, 0.6, rng);
    const Formula f = random_formula(rng, sig, 2, 3);
    theory::AtlTheory th(enc.catalogue, f);
    if (!th.refutes(partial)) continue;
    ++conflicts;
    const sat::Clause clause = th.conflict_clause(partial);
    std::vector<Value> only(partial.size(), Value::Undef);
    for (auto l : clause) {
      ASSERT_EQ(sat::value_of(partial, l), Value::False);
      only[static_cast<std::size_t>(l.var())] = l.negative() ? Value::True : Value::False;
    }
    ASSERT_TRUE(th.refutes(only));
    std::size_t assigned = 0;
    for (auto v : partial) assigned += v != Value::Undef;
    EXPECT_LE(clause.size(), assigned);
    // No completion of the kept literals satisfies the formula at the
    // initial state.
    for_each_completion(enc, only, [&](const std::vector<bool>& bits) {
      ASSERT_FALSE(exact(decode(enc.catalogue, bits), f).contains(0)) << print(f, sig);
    });
  }
  EXPECT_GT(conflicts, 20);
}

TEST(Explanation, NeverEmptyForSatisfiableFormula) {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 200; ++round) {
    const Signature sig = tiny(rng, Semantics::Perfect);
    const auto enc = build_encoding(sig);
    const ModelSpec spec = random_model(sig, rng);
    const Formula f = random_formula(rng, sig, 2, 3);
    if (!perfect::check(expand(spec), f, 0)) continue;
    // f has a model, so refuting any partial assignment needs some literal.
    const auto partial = hide(to_values(characteristic_assignment(enc, random_model(sig, rng))), 0.7, rng);
    theory::AtlTheory th(enc.catalogue, f);
    if (th.refutes(partial)) {
      EXPECT_FALSE(th.conflict_clause(partial).empty());
    }
  }
}

TEST(Explanation, UnminimizedClauseNegatesEveryAssignedLiteral) {
  std::mt19937_64 rng(10);
  const Signature sig = tiny(rng, Semantics::Perfect);
  const auto enc = build_encoding(sig);
  const auto partial = hide(to_values(characteristic_assignment(enc, random_model(sig, rng))), 0.5, rng);
  theory::AtlTheory th(enc.catalogue, Formula::conjunction(Formula::atom(0), Formula::negation(Formula::atom(0))),
                       {.minimize = false, .minimize_budget = 200});
  std::size_t assigned = 0;
  for (auto v : partial) assigned += v != Value::Undef;
  EXPECT_EQ(th.conflict_clause(partial).size(), assigned);
}

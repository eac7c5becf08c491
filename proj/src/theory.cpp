#include "atlforge/theory.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "atlforge/checker_imperfect.hpp"
#include "atlforge/checker_perfect.hpp"

namespace atlforge::theory {

using sat::Value;
using sat::Var;

// ---------------------------------------------------------------------------
// PartialModel

PartialModel::PartialModel(const VarCatalogue& cat, std::span<const Value> values) : cat_(&cat) {
  if (values.size() < cat.size()) throw std::invalid_argument("partial assignment does not cover the catalogue");
  values_.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(cat.size()));

  const auto& sig = cat.signature();
  const std::size_t n = sig.agents.size();
  const std::size_t joints = cat.joint_actions().size();
  const std::size_t states = cat.states().size();

  sure_.resize(n);
  possible_.resize(n);
  // Candidate local successors per (agent, local state, joint action),
  // flattened: cand[off[i] + l * joints + ja] indexes into pool.
  std::vector<std::size_t> off(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) off[i + 1] = off[i] + static_cast<std::size_t>(sig.agents[i].local_states) * joints;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cand(off[n]);
  std::vector<int> pool;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = sig.agents[i];
    const int ai = static_cast<int>(i);
    sure_[i].resize(static_cast<std::size_t>(a.local_states));
    possible_[i].resize(static_cast<std::size_t>(a.local_states));
    for (int l = 0; l < a.local_states; ++l) {
      for (int act = 0; act < a.actions; ++act) {
        Value v = value(cat.enable_var(ai, l, act));
        if (v == Value::True) sure_[i][static_cast<std::size_t>(l)].push_back(act);
        if (v != Value::False) possible_[i][static_cast<std::size_t>(l)].push_back(act);
      }
      for (std::size_t ja = 0; ja < joints; ++ja) {
        const auto begin = static_cast<std::uint32_t>(pool.size());
        int decided = -1;
        for (int t = 0; t < a.local_states; ++t) {
          Value v = value(cat.trans_var(ai, l, ja, t));
          if (v == Value::True) decided = t;
          if (v != Value::False) pool.push_back(t);
        }
        if (decided >= 0) {
          pool.resize(begin);
          pool.push_back(decided);
        }
        cand[off[i] + static_cast<std::size_t>(l) * joints + ja] = {begin, static_cast<std::uint32_t>(pool.size())};
      }
    }
  }

  const auto& idx = cat.states();
  succ_.assign(states * joints, StateSet(states));
  std::vector<std::size_t> acc, next;
  for (std::size_t g = 0; g < states; ++g) {
    for (std::size_t ja = 0; ja < joints; ++ja) {
      acc.assign(1, 0);
      for (std::size_t i = 0; i < n && !acc.empty(); ++i) {
        auto [b, e] = cand[off[i] + static_cast<std::size_t>(idx.component(g, i)) * joints + ja];
        next.clear();
        for (auto base : acc)
          for (auto k = b; k < e; ++k) next.push_back(base + static_cast<std::size_t>(pool[k]) * idx.stride(i));
        acc.swap(next);
      }
      auto& s = succ_[g * joints + ja];
      for (auto h : acc) s.insert(h);
    }
  }

  for (std::size_t p = 0; p < sig.propositions.size(); ++p) {
    StateSet lo(states), hi(states);
    for (std::size_t g = 0; g < states; ++g) {
      Value v = value(cat.val_var(static_cast<int>(p), g));
      if (v == Value::True) lo.insert(g);
      if (v != Value::False) hi.insert(g);
    }
    atom_lo_.push_back(std::move(lo));
    atom_hi_.push_back(std::move(hi));
  }
}

bool PartialModel::total() const {
  return std::none_of(values_.begin(), values_.end(), [](Value v) { return v == Value::Undef; });
}

// ---------------------------------------------------------------------------
// interval evaluation

namespace {

enum class Bound { Lo, Hi };

/// One-step operators over a partial model.
///
/// Hi: the coalition picks among possible actions; an opponent with sure
/// actions must be beaten on all of them, otherwise the completion may
/// leave it a single possible action of our choosing; some candidate
/// successor must land in Z.
/// Lo: the coalition picks among sure actions; every possible opponent
/// action and every candidate successor must land in Z.
class Stepper {
 public:
  explicit Stepper(const PartialModel& pm)
      : pm_(pm),
        sig_(pm.catalogue().signature()),
        n_(sig_.agents.size()),
        lists_(n_),
        universal_(n_),
        singles_(n_, std::vector<int>(1)),
        order_(n_) {}

  /// sigma == nullptr: memoryless per-state choice; otherwise sigma[i][l]
  /// fixes coalition member i's action at local state l.
  StateSet step(Bound b, Coalition c, const std::vector<std::vector<int>>* sigma, const StateSet& z) {
    const auto& states = pm_.catalogue().states();
    StateSet out(states.size());
    z_ = &z;
    bound_ = b;
    for (std::size_t g = 0; g < states.size(); ++g) {
      std::size_t front = 0, back = n_;
      bool dead = false;
      for (std::size_t i = 0; i < n_; ++i) {
        const int l = states.component(g, i);
        const bool member = c >> i & 1U;
        const std::vector<int>* list;
        bool forall;
        if (member) {
          if (sigma) {
            singles_[i][0] = (*sigma)[i][static_cast<std::size_t>(l)];
            list = &singles_[i];
          } else {
            list = b == Bound::Hi ? &pm_.possible_actions(i, l) : &pm_.sure_actions(i, l);
          }
          forall = false;
        } else if (b == Bound::Hi) {
          const auto& sure = pm_.sure_actions(i, l);
          forall = !sure.empty();
          list = forall ? &sure : &pm_.possible_actions(i, l);
        } else {
          list = &pm_.possible_actions(i, l);
          forall = true;
        }
        if (!forall && list->empty()) dead = true;
        lists_[i] = list;
        universal_[i] = forall;
        if (forall)
          order_[--back] = i;
        else
          order_[front++] = i;
      }
      g_ = g;
      if (!dead && eval(0, 0)) out.insert(g);
    }
    return out;
  }

 private:
  bool eval(std::size_t depth, std::size_t ja) const {
    if (depth == n_) {
      const auto& s = pm_.successors(g_, ja);
      return bound_ == Bound::Hi ? s.intersects(*z_) : s.subset_of(*z_);
    }
    const std::size_t i = order_[depth];
    const std::size_t stride = pm_.catalogue().joint_actions().stride(i);
    if (universal_[i]) {
      for (int a : *lists_[i])
        if (!eval(depth + 1, ja + static_cast<std::size_t>(a) * stride)) return false;
      return true;
    }
    for (int a : *lists_[i])
      if (eval(depth + 1, ja + static_cast<std::size_t>(a) * stride)) return true;
    return false;
  }

  const PartialModel& pm_;
  const Signature& sig_;
  std::size_t n_;
  std::vector<const std::vector<int>*> lists_;
  std::vector<char> universal_;
  std::vector<std::vector<int>> singles_;
  std::vector<std::size_t> order_;
  std::size_t g_ = 0;
  const StateSet* z_ = nullptr;
  Bound bound_ = Bound::Hi;
};

class IntervalEngine {
 public:
  IntervalEngine(const PartialModel& pm, Semantics sem) : pm_(pm), sem_(sem), stepper_(pm) {}

  Interval strategic(const Formula& g, const Interval& left, const Interval* right) {
    Interval perf{fix(Bound::Lo, g, left.lo, right ? &right->lo : nullptr, nullptr),
                  fix(Bound::Hi, g, left.hi, right ? &right->hi : nullptr, nullptr)};
    if (sem_ == Semantics::Perfect || g.coalition() == 0) return perf;
    return {uniform(Bound::Lo, g, left.lo, right ? &right->lo : nullptr, perf.lo),
            uniform(Bound::Hi, g, left.hi, right ? &right->hi : nullptr, perf.hi)};
  }

 private:
  StateSet fix(Bound b, const Formula& g, const StateSet& left, const StateSet* right,
               const std::vector<std::vector<int>>* sigma) {
    const Coalition c = g.coalition();
    const std::size_t n = pm_.state_count();
    switch (g.temporal()) {
      case TemporalOp::Next:
        return stepper_.step(b, c, sigma, left);
      case TemporalOp::Always: {
        StateSet z = left;
        for (;;) {
          StateSet next = left & stepper_.step(b, c, sigma, z);
          if (next == z) return z;
          z = std::move(next);
        }
      }
      case TemporalOp::Until:
      case TemporalOp::Eventually: {
        const StateSet full = StateSet::full(n);
        const StateSet& hold = g.temporal() == TemporalOp::Until ? left : full;
        const StateSet& goal = g.temporal() == TemporalOp::Until ? *right : left;
        StateSet z(n);
        for (;;) {
          StateSet next = goal | (hold & stepper_.step(b, c, sigma, z));
          if (next == z) return z;
          z = std::move(next);
        }
      }
    }
    return StateSet(n);
  }

  /// Union over uniform strategies drawn from the sure (Lo) or possible
  /// (Hi) actions; `cap` is the per-state bound, which contains the union.
  StateSet uniform(Bound b, const Formula& g, const StateSet& left, const StateSet* right, const StateSet& cap) {
    const auto& sig = pm_.catalogue().signature();
    const std::size_t n = sig.agents.size();
    StateSet result(pm_.state_count());
    if (cap.empty()) return result;

    std::vector<std::vector<const std::vector<int>*>> choices(n);
    std::vector<std::vector<int>> sigma(n);
    std::vector<std::pair<std::size_t, std::size_t>> positions;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(g.coalition() >> i & 1U)) continue;
      for (int l = 0; l < sig.agents[i].local_states; ++l) {
        const auto& list = b == Bound::Hi ? pm_.possible_actions(i, l) : pm_.sure_actions(i, l);
        if (list.empty()) return result;
        choices[i].push_back(&list);
        sigma[i].push_back(list.front());
        positions.emplace_back(i, static_cast<std::size_t>(l));
      }
    }
    std::vector<std::size_t> cursor(positions.size(), 0);
    for (;;) {
      result |= fix(b, g, left, right, &sigma);
      if (result == cap) return result;
      std::size_t k = positions.size();
      for (;;) {
        if (k == 0) return result;
        --k;
        auto [i, l] = positions[k];
        const auto& list = *choices[i][l];
        if (++cursor[k] < list.size()) {
          sigma[i][l] = list[cursor[k]];
          break;
        }
        cursor[k] = 0;
        sigma[i][l] = list.front();
      }
    }
  }

  const PartialModel& pm_;
  Semantics sem_;
  Stepper stepper_;
};

// Boolean nodes whose subtree repeats a leaf (atom or strategic subformula,
// up to structural equality) are evaluated exactly over the leaves' joint
// values at each state: repeated leaves share one value in every completion,
// which the compositional rules forget (p & !p would keep hi = all states).
class SharedLeaves {
 public:
  static constexpr std::size_t kMaxLeaves = 10;

  // Empty leaves() means the compositional rules are already exact.
  explicit SharedLeaves(const Formula& g) {
    std::size_t occurrences = 0;
    collect(g, occurrences);
    if (occurrences == leaves_.size() || leaves_.size() > kMaxLeaves) leaves_.clear();
  }

  const std::vector<Formula>& leaves() const { return leaves_; }

  bool eval(const Formula& g, std::uint32_t values) const {
    switch (g.kind()) {
      case FormulaKind::True:
        return true;
      case FormulaKind::Not:
        return !eval(g.left(), values);
      case FormulaKind::And:
        return eval(g.left(), values) && eval(g.right(), values);
      case FormulaKind::Or:
        return eval(g.left(), values) || eval(g.right(), values);
      case FormulaKind::Implies:
        return !eval(g.left(), values) || eval(g.right(), values);
      case FormulaKind::Atom:
      case FormulaKind::Enforce:
        break;
    }
    return (values >> index(g)) & 1U;
  }

 private:
  void collect(const Formula& g, std::size_t& occurrences) {
    switch (g.kind()) {
      case FormulaKind::True:
        return;
      case FormulaKind::Not:
        collect(g.left(), occurrences);
        return;
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies:
        collect(g.left(), occurrences);
        collect(g.right(), occurrences);
        return;
      case FormulaKind::Atom:
      case FormulaKind::Enforce:
        break;
    }
    ++occurrences;
    if (std::find(leaves_.begin(), leaves_.end(), g) == leaves_.end()) leaves_.push_back(g);
  }

  std::size_t index(const Formula& g) const {
    return static_cast<std::size_t>(std::find(leaves_.begin(), leaves_.end(), g) - leaves_.begin());
  }

  std::vector<Formula> leaves_;
};

// lo/hi of a Boolean node by enumerating the undecided leaves at each state.
Interval exact_boolean(const Formula& g, const SharedLeaves& shared, const std::vector<const Interval*>& leaf,
                       std::size_t n) {
  Interval iv{StateSet(n), StateSet(n)};
  const std::size_t k = shared.leaves().size();
  for (std::size_t s = 0; s < n; ++s) {
    std::uint32_t fixed = 0;
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < k; ++j) {
      if (leaf[j]->lo.contains(s))
        fixed |= 1U << j;
      else if (leaf[j]->hi.contains(s))
        open.push_back(j);
    }
    bool some = false, all = true;
    for (std::uint32_t m = 0; m < (1U << open.size()) && (all || !some); ++m) {
      std::uint32_t values = fixed;
      for (std::size_t b = 0; b < open.size(); ++b)
        if (m >> b & 1U) values |= 1U << open[b];
      const bool v = shared.eval(g, values);
      some = some || v;
      all = all && v;
    }
    if (all) iv.lo.insert(s);
    if (some) iv.hi.insert(s);
  }
  return iv;
}

}  // namespace

IntervalResult interval_eval(const PartialModel& pm, const Formula& f, Semantics semantics) {
  const std::size_t n = pm.state_count();
  IntervalEngine engine(pm, semantics);
  IntervalResult r;
  std::unordered_map<const Formula::Node*, std::size_t> slot;
  auto get = [&](const Formula& g) -> const Interval& { return r.nodes[slot.at(g.id())].second; };

  for (const auto& g : postorder(f)) {
    Interval iv;
    switch (g.kind()) {
      case FormulaKind::True:
        iv = {StateSet::full(n), StateSet::full(n)};
        break;
      case FormulaKind::Atom:
        iv = {pm.atom_lo(g.prop()), pm.atom_hi(g.prop())};
        break;
      case FormulaKind::Not: {
        const auto& c = get(g.left());
        iv = {c.hi.complement(), c.lo.complement()};
        break;
      }
      case FormulaKind::And: {
        const auto &a = get(g.left()), &b = get(g.right());
        iv = {a.lo & b.lo, a.hi & b.hi};
        break;
      }
      case FormulaKind::Or: {
        const auto &a = get(g.left()), &b = get(g.right());
        iv = {a.lo | b.lo, a.hi | b.hi};
        break;
      }
      case FormulaKind::Implies: {
        const auto &a = get(g.left()), &b = get(g.right());
        iv = {a.hi.complement() | b.lo, a.lo.complement() | b.hi};
        break;
      }
      case FormulaKind::Enforce:
        iv = engine.strategic(g, get(g.left()), g.has_right() ? &get(g.right()) : nullptr);
        break;
    }
    if (g.kind() == FormulaKind::Not || g.kind() == FormulaKind::And || g.kind() == FormulaKind::Or ||
        g.kind() == FormulaKind::Implies) {
      const SharedLeaves shared(g);
      if (!shared.leaves().empty()) {
        std::vector<const Interval*> leaf;
        for (const auto& l : shared.leaves()) leaf.push_back(&get(l));
        iv = exact_boolean(g, shared, leaf, n);
      }
    }
    slot.emplace(g.id(), r.nodes.size());
    r.nodes.emplace_back(g, std::move(iv));
  }
  return r;
}

// ---------------------------------------------------------------------------
// theory hook

TheoryStats& TheoryStats::operator+=(const TheoryStats& o) {
  partial_checks += o.partial_checks;
  partial_conflicts += o.partial_conflicts;
  exact_checks += o.exact_checks;
  exact_conflicts += o.exact_conflicts;
  literals_before += o.literals_before;
  literals_after += o.literals_after;
  return *this;
}

AtlTheory::AtlTheory(const VarCatalogue& cat, Formula f, TheoryOptions options)
    : cat_(cat), formula_(std::move(f)), options_(options) {}

bool AtlTheory::refutes(std::span<const Value> assignment) const {
  PartialModel pm(cat_, assignment);
  return !interval_eval(pm, formula_).root().hi.contains(0);
}

bool AtlTheory::holds_exactly(std::span<const Value> assignment) const {
  std::vector<bool> bits(cat_.size());
  for (std::size_t v = 0; v < cat_.size(); ++v) {
    if (assignment[v] == Value::Undef) throw std::logic_error("exact check needs a total assignment");
    bits[v] = assignment[v] == Value::True;
  }
  GlobalModel gm = expand(decode(cat_, bits));
  if (cat_.signature().semantics == Semantics::Imperfect) return imperfect::check_ir(gm, formula_, gm.initial_state());
  return perfect::check(gm, formula_, gm.initial_state());
}

sat::Clause AtlTheory::conflict_clause(std::span<const Value> assignment) {
  std::vector<Var> keep;
  for (std::size_t v = 0; v < cat_.size(); ++v)
    if (assignment[v] != Value::Undef) keep.push_back(static_cast<Var>(v));
  const std::size_t before = keep.size();

  std::vector<Value> trial(cat_.size(), Value::Undef);
  auto refuted_by = [&](const std::vector<Var>& subset, std::size_t skip_from, std::size_t skip_to) {
    std::fill(trial.begin(), trial.end(), Value::Undef);
    for (std::size_t k = 0; k < subset.size(); ++k)
      if (k < skip_from || k >= skip_to) trial[static_cast<std::size_t>(subset[k])] = assignment[static_cast<std::size_t>(subset[k])];
    return refutes(trial);
  };

  if (options_.minimize && options_.minimize_budget > 0 && refuted_by(keep, 0, 0)) {
    // Deletion in shrinking chunks; every accepted deletion is re-verified.
    std::size_t evals = 1;
    std::size_t chunk = std::max<std::size_t>(1, keep.size() / 2);
    std::size_t i = 0;
    while (i < keep.size() && evals < options_.minimize_budget) {
      const std::size_t end = std::min(keep.size(), i + chunk);
      ++evals;
      if (refuted_by(keep, i, end)) {
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(i), keep.begin() + static_cast<std::ptrdiff_t>(end));
      } else if (chunk > 1) {
        chunk = std::max<std::size_t>(1, chunk / 2);
      } else {
        ++i;
      }
    }
  }

  stats_.literals_before += before;
  stats_.literals_after += keep.size();
  sat::Clause clause;
  clause.reserve(keep.size());
  for (Var v : keep) clause.push_back(assignment[static_cast<std::size_t>(v)] == Value::True ? sat::neg(v) : sat::pos(v));
  return clause;
}

sat::TheoryVerdict AtlTheory::on_partial(std::span<const Value> assignment) {
  ++stats_.partial_checks;
  if (!refutes(assignment)) return sat::TheoryVerdict::ok();
  ++stats_.partial_conflicts;
  return sat::TheoryVerdict::reject(conflict_clause(assignment));
}

sat::TheoryVerdict AtlTheory::on_complete(std::span<const Value> assignment) {
  ++stats_.exact_checks;
  if (holds_exactly(assignment)) return sat::TheoryVerdict::ok();
  ++stats_.exact_conflicts;
  return sat::TheoryVerdict::reject(conflict_clause(assignment));
}

}  // namespace atlforge::theory

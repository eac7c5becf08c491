#include "atlforge/lemmas.hpp"

#include <map>
#include <optional>
#include <string>

namespace atlforge {

namespace {

using sat::Clause;
using sat::Lit;

class LemmaBuilder {
 public:
  LemmaBuilder(const VarCatalogue& cat, sat::Cnf& cnf)
      : cat_(cat), sig_(cat.signature()), cnf_(cnf), states_(cat.states().size()) {}

  /// Per-state literals for g, with the requested directions constrained.
  std::vector<Lit> encode(const Formula& g, bool pos, bool neg) {
    Entry& e = memo_[print(g, sig_)];
    const bool need_pos = pos && !e.pos;
    const bool need_neg = neg && !e.neg;
    e.pos = e.pos || pos;
    e.neg = e.neg || neg;
    if (!e.lits.empty() && !need_pos && !need_neg) return e.lits;

    switch (g.kind()) {
      case FormulaKind::True:
        if (e.lits.empty()) e.lits.assign(states_, truth());
        return e.lits;
      case FormulaKind::Atom:
        if (e.lits.empty())
          for (std::size_t s = 0; s < states_; ++s) e.lits.push_back(sat::pos(cat_.val_var(g.prop(), s)));
        return e.lits;
      case FormulaKind::Not: {
        auto c = encode(g.left(), need_neg, need_pos);
        e.lits.clear();
        for (Lit l : c) e.lits.push_back(~l);
        return e.lits;
      }
      default:
        break;
    }
    if (e.lits.empty()) e.lits = layer();
    const auto s = e.lits;

    if (g.kind() != FormulaKind::Enforce) {
      const bool flip = g.kind() == FormulaKind::Implies;
      auto a = flip ? encode(g.left(), need_neg, need_pos) : encode(g.left(), need_pos, need_neg);
      auto b = encode(g.right(), need_pos, need_neg);
      if (flip)
        for (auto& l : a) l = ~l;
      const bool conj = g.kind() == FormulaKind::And;
      for (std::size_t x = 0; x < states_; ++x) {
        if (conj) {
          if (need_pos) {
            add({~s[x], a[x]});
            add({~s[x], b[x]});
          }
          if (need_neg) add({s[x], ~a[x], ~b[x]});
        } else {
          if (need_pos) add({~s[x], a[x], b[x]});
          if (need_neg) {
            add({s[x], ~a[x]});
            add({s[x], ~b[x]});
          }
        }
      }
      return s;
    }

    const Coalition coal = g.coalition();
    switch (g.temporal()) {
      case TemporalOp::Next: {
        auto c = encode(g.left(), need_pos, need_neg);
        std::vector<Lit> not_c;
        for (Lit l : c) not_c.push_back(~l);
        for (std::size_t x = 0; x < states_; ++x) {
          if (need_pos) force_pre({s[x]}, x, coal, c);
          if (need_neg) force_cpre({~s[x]}, x, coal, not_c);
        }
        break;
      }
      case TemporalOp::Always: {
        auto c = encode(g.left(), need_pos, need_neg);
        if (need_pos) {
          for (std::size_t x = 0; x < states_; ++x) {
            add({~s[x], c[x]});
            force_pre({s[x]}, x, coal, s);
          }
          if (coal == 0) regions_.push_back({0, true, s});
        }
        if (need_neg) {
          // d_k: the opponents can force leaving c within k steps.
          std::vector<std::vector<Lit>> d{layer()};
          for (std::size_t x = 0; x < states_; ++x) add({~d[0][x], ~c[x]});
          for (std::size_t k = 1; k < states_; ++k) {
            d.push_back(layer());
            for (std::size_t x = 0; x < states_; ++x) force_cpre({d[k][x], c[x]}, x, coal, d[k - 1]);
          }
          for (std::size_t x = 0; x < states_; ++x) add({s[x], d.back()[x]});
        }
        break;
      }
      case TemporalOp::Until:
      case TemporalOp::Eventually: {
        const bool until = g.temporal() == TemporalOp::Until;
        std::vector<Lit> hold;
        if (until) hold = encode(g.left(), need_pos, need_neg);
        auto goal = encode(until ? g.right() : g.left(), need_pos, need_neg);
        if (need_pos) {
          // r_k: the coalition can force goal within k steps.
          std::vector<std::vector<Lit>> r{layer()};
          for (std::size_t x = 0; x < states_; ++x) add({~r[0][x], goal[x]});
          for (std::size_t k = 1; k < states_; ++k) {
            r.push_back(layer());
            for (std::size_t x = 0; x < states_; ++x) {
              if (until) add({~r[k][x], goal[x], hold[x]});
              force_pre({r[k][x], ~goal[x]}, x, coal, r[k - 1]);
            }
          }
          for (std::size_t x = 0; x < states_; ++x) add({~s[x], r.back()[x]});
          ranks_.push_back({coal, r, goal});
        }
        if (need_neg) {
          std::vector<Lit> not_s;
          for (Lit l : s) not_s.push_back(~l);
          for (std::size_t x = 0; x < states_; ++x) {
            add({s[x], ~goal[x]});
            if (until)
              force_cpre({~s[x], hold[x]}, x, coal, not_s);
            else
              force_cpre({~s[x]}, x, coal, not_s);
          }
          if (!until) regions_.push_back({coal, false, not_s});
        }
        break;
      }
    }
    return s;
  }

  void assert_initial(Lit l) { add({l}); }

  /// Induction cuts. A region that the opponents of coalition A can never
  /// be driven out of (the complement of a negative <<B>>F with B
  /// containing A, or a positive <<>>G) meets every play consistent with A's
  /// strategy. So if A can force the goal within k steps from a region
  /// state, some goal state lies in the region.
  void add_induction_cuts() {
    for (const auto& fam : ranks_) {
      std::vector<const std::vector<Lit>*> inside;
      for (const auto& reg : regions_)
        if (reg.all_successors || (reg.coalition & fam.coalition) == fam.coalition) inside.push_back(&reg.lits);
      if (inside.empty()) continue;
      const Lit any = fresh();
      Clause some{~any};
      for (std::size_t z = 0; z < states_; ++z) {
        const Lit e = fresh();
        some.push_back(e);
        add({~e, fam.goal[z]});
        for (const auto* lits : inside) add({~e, (*lits)[z]});
      }
      add(std::move(some));
      for (const auto& layer : fam.layers) {
        for (std::size_t y = 0; y < states_; ++y) {
          Clause c{~layer[y], any};
          for (const auto* lits : inside) c.push_back(~(*lits)[y]);
          add(std::move(c));
        }
      }
    }
  }

  LemmaStats stats;

 private:
  struct RankFamily {
    Coalition coalition;
    std::vector<std::vector<Lit>> layers;
    std::vector<Lit> goal;
  };
  struct Region {
    Coalition coalition;
    bool all_successors;
    std::vector<Lit> lits;
  };

  struct Entry {
    std::vector<Lit> lits;
    bool pos = false;
    bool neg = false;
  };

  void add(Clause c) {
    cnf_.add(std::move(c));
    ++stats.clauses;
  }
  Lit fresh() {
    ++stats.variables;
    return sat::pos(cnf_.new_var());
  }
  std::vector<Lit> layer() {
    std::vector<Lit> out;
    for (std::size_t x = 0; x < states_; ++x) out.push_back(fresh());
    return out;
  }
  Lit truth() {
    if (!true_) {
      true_ = fresh();
      add({*true_});
    }
    return *true_;
  }

  /// Coalition or opponent action profiles at a state: the joint-action
  /// offset and the enable literals each profile requires.
  struct Profile {
    std::size_t offset = 0;
    std::vector<Lit> enables;
  };

  std::vector<Profile> profiles(std::size_t x, Coalition coal, bool members) const {
    std::vector<Profile> out{Profile{}};
    const auto& joints = cat_.joint_actions();
    for (std::size_t i = 0; i < sig_.agents.size(); ++i) {
      if (static_cast<bool>(coal >> i & 1U) != members) continue;
      const int l = cat_.states().component(x, i);
      std::vector<Profile> next;
      for (const auto& p : out) {
        for (int a = 0; a < sig_.agents[i].actions; ++a) {
          Profile q = p;
          q.offset += static_cast<std::size_t>(a) * joints.stride(i);
          q.enables.push_back(sat::pos(cat_.enable_var(static_cast<int>(i), l, a)));
          next.push_back(std::move(q));
        }
      }
      out = std::move(next);
    }
    return out;
  }

  /// Clause body "succ(x, ja) != y".
  void append_not_successor(Clause& c, std::size_t x, std::size_t ja, std::size_t y) const {
    for (std::size_t i = 0; i < sig_.agents.size(); ++i)
      c.push_back(sat::neg(cat_.trans_var(static_cast<int>(i), cat_.states().component(x, i), ja, cat_.states().component(y, i))));
  }

  /// /\ante -> exists enabled coalition move, forall enabled opponent
  /// moves: target(successor).
  void force_pre(const std::vector<Lit>& ante, std::size_t x, Coalition coal, const std::vector<Lit>& target) {
    Clause head;
    for (Lit l : ante) head.push_back(~l);
    const auto opp = profiles(x, coal, false);
    for (const auto& alpha : profiles(x, coal, true)) {
      const Lit w = fresh();
      head.push_back(w);
      for (Lit e : alpha.enables) add({~w, e});
      for (const auto& beta : opp) {
        for (std::size_t y = 0; y < states_; ++y) {
          Clause c{~w};
          for (Lit e : beta.enables) c.push_back(~e);
          append_not_successor(c, x, alpha.offset + beta.offset, y);
          c.push_back(target[y]);
          add(std::move(c));
        }
      }
    }
    add(std::move(head));
  }

  /// /\ante -> forall enabled coalition moves, exists enabled opponent
  /// move: target(successor).
  void force_cpre(const std::vector<Lit>& ante, std::size_t x, Coalition coal, const std::vector<Lit>& target) {
    const auto opp = profiles(x, coal, false);
    for (const auto& alpha : profiles(x, coal, true)) {
      Clause head;
      for (Lit l : ante) head.push_back(~l);
      for (Lit e : alpha.enables) head.push_back(~e);
      for (const auto& beta : opp) {
        const Lit v = fresh();
        head.push_back(v);
        for (Lit e : beta.enables) add({~v, e});
        for (std::size_t y = 0; y < states_; ++y) {
          Clause c{~v};
          append_not_successor(c, x, alpha.offset + beta.offset, y);
          c.push_back(target[y]);
          add(std::move(c));
        }
      }
      add(std::move(head));
    }
  }

  const VarCatalogue& cat_;
  const Signature& sig_;
  sat::Cnf& cnf_;
  std::size_t states_;
  std::map<std::string, Entry> memo_;
  std::optional<Lit> true_;
  std::vector<RankFamily> ranks_;
  std::vector<Region> regions_;
};

}  // namespace

LemmaStats add_fixpoint_lemmas(const VarCatalogue& cat, const Formula& f, sat::Cnf& cnf) {
  LemmaBuilder b(cat, cnf);
  auto root = b.encode(f, true, false);
  b.assert_initial(root[0]);
  b.add_induction_cuts();
  return b.stats;
}

}  // namespace atlforge

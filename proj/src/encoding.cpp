#include "atlforge/encoding.hpp"

#include <sstream>

namespace atlforge {

using sat::Lit;
using sat::Var;

VarCatalogue::VarCatalogue(Signature sig, std::size_t budget) : sig_(std::move(sig)) {
  sig_.check();
  states_ = state_index(sig_);
  joints_ = joint_action_index(sig_);

  // Counted in floating point first so oversized signatures are refused
  // before any size_t arithmetic can wrap.
  double estimate = 0;
  double states = 1, joints = 1;
  for (const auto& a : sig_.agents) {
    states *= a.local_states;
    joints *= a.actions;
  }
  for (const auto& a : sig_.agents)
    estimate += static_cast<double>(a.local_states) * a.actions + static_cast<double>(a.local_states) * joints * a.local_states;
  estimate += states * static_cast<double>(sig_.propositions.size());
  if (estimate > static_cast<double>(budget)) {
    std::ostringstream os;
    os << "signature " << sig_.shape() << " needs about " << estimate << " variables, over the budget of " << budget;
    throw EncodingError(os.str());
  }

  std::size_t next = 0;
  for (const auto& a : sig_.agents) {
    enable_base_.push_back(next);
    next += static_cast<std::size_t>(a.local_states) * static_cast<std::size_t>(a.actions);
  }
  for (const auto& a : sig_.agents) {
    trans_base_.push_back(next);
    auto ls = static_cast<std::size_t>(a.local_states);
    next += ls * joints_.size() * ls;
  }
  val_base_ = next;
  next += sig_.propositions.size() * states_.size();
  size_ = next;
}

Var VarCatalogue::enable_var(int agent, int local, int action) const {
  const auto& a = sig_.agents[static_cast<std::size_t>(agent)];
  return static_cast<Var>(enable_base_[static_cast<std::size_t>(agent)] +
                          static_cast<std::size_t>(local) * static_cast<std::size_t>(a.actions) + static_cast<std::size_t>(action));
}

Var VarCatalogue::trans_var(int agent, int local, std::size_t joint, int target) const {
  auto ls = static_cast<std::size_t>(sig_.agents[static_cast<std::size_t>(agent)].local_states);
  return static_cast<Var>(trans_base_[static_cast<std::size_t>(agent)] +
                          (static_cast<std::size_t>(local) * joints_.size() + joint) * ls + static_cast<std::size_t>(target));
}

Var VarCatalogue::val_var(int prop, std::size_t state) const {
  return static_cast<Var>(val_base_ + static_cast<std::size_t>(prop) * states_.size() + state);
}

VarRole VarCatalogue::role(Var v) const {
  auto x = static_cast<std::size_t>(v);
  if (x >= size_) return {VarFamily::Auxiliary};
  if (x >= val_base_) {
    VarRole r{VarFamily::Valuation};
    r.prop = static_cast<int>((x - val_base_) / states_.size());
    r.state = (x - val_base_) % states_.size();
    return r;
  }
  const std::size_t n = sig_.agents.size();
  if (x >= trans_base_[0]) {
    std::size_t i = n - 1;
    while (x < trans_base_[i]) --i;
    auto ls = static_cast<std::size_t>(sig_.agents[i].local_states);
    std::size_t off = x - trans_base_[i];
    VarRole r{VarFamily::Transition};
    r.agent = static_cast<int>(i);
    r.target = static_cast<int>(off % ls);
    off /= ls;
    r.action = static_cast<int>(off % joints_.size());
    r.local = static_cast<int>(off / joints_.size());
    return r;
  }
  std::size_t i = n - 1;
  while (x < enable_base_[i]) --i;
  auto acts = static_cast<std::size_t>(sig_.agents[i].actions);
  std::size_t off = x - enable_base_[i];
  VarRole r{VarFamily::Enable};
  r.agent = static_cast<int>(i);
  r.local = static_cast<int>(off / acts);
  r.action = static_cast<int>(off % acts);
  return r;
}

std::string VarCatalogue::describe(Var v) const {
  auto r = role(v);
  auto agent = [&] { return sig_.agents[static_cast<std::size_t>(r.agent)].name; };
  switch (r.family) {
    case VarFamily::Enable:
      return "enable(" + agent() + "," + std::to_string(r.local) + "," + std::to_string(r.action) + ")";
    case VarFamily::Transition:
      return "trans(" + agent() + "," + std::to_string(r.local) + "," + std::to_string(r.action) + "," + std::to_string(r.target) + ")";
    case VarFamily::Valuation:
      return "val(" + sig_.propositions[static_cast<std::size_t>(r.prop)] + "," + std::to_string(r.state) + ")";
    case VarFamily::Auxiliary:
      return "aux";
  }
  return "aux";
}

std::string VarCatalogue::dump() const {
  std::ostringstream os;
  for (std::size_t v = 0; v < size_; ++v) os << v << '\t' << describe(static_cast<Var>(v)) << '\n';
  return os.str();
}

namespace {

template <class Fn>
void for_each_successor_group(const VarCatalogue& cat, Fn&& fn) {
  const auto& sig = cat.signature();
  for (std::size_t i = 0; i < sig.agents.size(); ++i) {
    const int ls = sig.agents[i].local_states;
    for (int l = 0; l < ls; ++l) {
      for (std::size_t ja = 0; ja < cat.joint_actions().size(); ++ja) {
        std::vector<Var> group;
        for (int t = 0; t < ls; ++t) group.push_back(cat.trans_var(static_cast<int>(i), l, ja, t));
        fn(group);
      }
    }
  }
}

}  // namespace

Encoding build_encoding(const Signature& sig, std::size_t var_budget) {
  Encoding enc{VarCatalogue(sig, var_budget), {}};
  const auto& cat = enc.catalogue;
  auto& cnf = enc.cnf;
  cnf.num_vars = static_cast<int>(cat.size());

  for (std::size_t i = 0; i < sig.agents.size(); ++i) {
    const auto& a = sig.agents[i];
    for (int l = 0; l < a.local_states; ++l) {
      sat::Clause c;
      for (int act = 0; act < a.actions; ++act) c.push_back(sat::pos(cat.enable_var(static_cast<int>(i), l, act)));
      cnf.add(std::move(c));
    }
  }

  for_each_successor_group(cat, [&](const std::vector<Var>& x) {
    sat::Clause least;
    for (Var v : x) least.push_back(sat::pos(v));
    cnf.add(std::move(least));
    const std::size_t n = x.size();
    if (n <= static_cast<std::size_t>(Encoding::kPairwiseMaxWidth)) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) cnf.add({sat::neg(x[a]), sat::neg(x[b])});
      return;
    }
    // Sequential counter: s[k] <=> some x[0..k] is true.
    std::vector<Var> s;
    for (std::size_t k = 0; k + 1 < n; ++k) s.push_back(cnf.new_var());
    cnf.add({sat::neg(x[0]), sat::pos(s[0])});
    for (std::size_t k = 1; k + 1 < n; ++k) {
      cnf.add({sat::neg(x[k]), sat::pos(s[k])});
      cnf.add({sat::neg(s[k - 1]), sat::pos(s[k])});
      cnf.add({sat::neg(x[k]), sat::neg(s[k - 1])});
    }
    cnf.add({sat::neg(x[n - 1]), sat::neg(s[n - 2])});
  });

  if (sig.semantics == Semantics::Imperfect) {
    const auto& idx = cat.states();
    for (std::size_t i = 0; i < sig.agents.size(); ++i) {
      for (int p : sig.agents[i].observable) {
        for (std::size_t g = 0; g < idx.size(); ++g) {
          for (std::size_t h = g + 1; h < idx.size(); ++h) {
            if (idx.component(g, i) != idx.component(h, i)) continue;
            Var vg = cat.val_var(p, g), vh = cat.val_var(p, h);
            cnf.add({sat::neg(vg), sat::pos(vh)});
            cnf.add({sat::pos(vg), sat::neg(vh)});
          }
        }
      }
    }
  }
  return enc;
}

ModelSpec decode(const VarCatalogue& cat, const std::vector<bool>& assignment) {
  if (assignment.size() < cat.size()) throw EncodingError("assignment does not cover the catalogue");
  auto on = [&](Var v) { return static_cast<bool>(assignment[static_cast<std::size_t>(v)]); };
  const auto& sig = cat.signature();
  ModelSpec spec;
  spec.signature = sig;
  for (std::size_t i = 0; i < sig.agents.size(); ++i) {
    const auto& a = sig.agents[i];
    const int ai = static_cast<int>(i);
    AgentTemplate t;
    for (int l = 0; l < a.local_states; ++l) {
      std::vector<int> prot;
      for (int act = 0; act < a.actions; ++act)
        if (on(cat.enable_var(ai, l, act))) prot.push_back(act);
      t.protocol.push_back(std::move(prot));
      std::vector<int> row;
      for (std::size_t ja = 0; ja < cat.joint_actions().size(); ++ja) {
        int succ = -1;
        for (int target = 0; target < a.local_states; ++target) {
          if (!on(cat.trans_var(ai, l, ja, target))) continue;
          if (succ >= 0) throw EncodingError("two successors selected at " + cat.describe(cat.trans_var(ai, l, ja, target)));
          succ = target;
        }
        if (succ < 0) throw EncodingError("no successor selected for agent " + a.name + " at local state " + std::to_string(l));
        row.push_back(succ);
      }
      t.transition.push_back(std::move(row));
    }
    spec.templates.push_back(std::move(t));
  }
  for (std::size_t p = 0; p < sig.propositions.size(); ++p) {
    std::vector<bool> row;
    for (std::size_t g = 0; g < cat.states().size(); ++g) row.push_back(on(cat.val_var(static_cast<int>(p), g)));
    spec.valuation.push_back(std::move(row));
  }
  return spec;
}

std::vector<bool> characteristic_assignment(const Encoding& enc, const ModelSpec& spec) {
  const auto& cat = enc.catalogue;
  const auto& sig = cat.signature();
  std::vector<bool> a(static_cast<std::size_t>(enc.cnf.num_vars), false);
  auto set = [&](Var v) { a[static_cast<std::size_t>(v)] = true; };
  for (std::size_t i = 0; i < sig.agents.size(); ++i) {
    const int ai = static_cast<int>(i);
    const auto& t = spec.templates[i];
    for (int l = 0; l < sig.agents[i].local_states; ++l) {
      for (int act : t.protocol[static_cast<std::size_t>(l)]) set(cat.enable_var(ai, l, act));
      for (std::size_t ja = 0; ja < cat.joint_actions().size(); ++ja)
        set(cat.trans_var(ai, l, ja, t.transition[static_cast<std::size_t>(l)][ja]));
    }
  }
  for (std::size_t p = 0; p < sig.propositions.size(); ++p)
    for (std::size_t g = 0; g < cat.states().size(); ++g)
      if (spec.valuation[p][g]) set(cat.val_var(static_cast<int>(p), g));

  Var aux = static_cast<Var>(cat.size());
  for_each_successor_group(cat, [&](const std::vector<Var>& x) {
    if (x.size() <= static_cast<std::size_t>(Encoding::kPairwiseMaxWidth)) return;
    bool prefix = false;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      prefix = prefix || a[static_cast<std::size_t>(x[k])];
      a[static_cast<std::size_t>(aux++)] = prefix;
    }
  });
  return a;
}

}  // namespace atlforge

#include "atlforge/formula.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <random>
#include <unordered_set>

namespace atlforge {

// ---------------------------------------------------------------------------
// construction

Formula Formula::make(Node n) { return Formula(std::make_shared<const Node>(std::move(n))); }

Formula Formula::truth() { return make(Node{}); }

Formula Formula::atom(int prop) {
  Node n;
  n.kind = FormulaKind::Atom;
  n.prop = prop;
  return make(std::move(n));
}

Formula Formula::negation(Formula f) {
  Node n;
  n.kind = FormulaKind::Not;
  n.left = std::move(f.node_);
  return make(std::move(n));
}

Formula Formula::conjunction(Formula l, Formula r) {
  Node n;
  n.kind = FormulaKind::And;
  n.left = std::move(l.node_);
  n.right = std::move(r.node_);
  return make(std::move(n));
}

Formula Formula::disjunction(Formula l, Formula r) {
  Node n;
  n.kind = FormulaKind::Or;
  n.left = std::move(l.node_);
  n.right = std::move(r.node_);
  return make(std::move(n));
}

Formula Formula::implication(Formula l, Formula r) {
  Node n;
  n.kind = FormulaKind::Implies;
  n.left = std::move(l.node_);
  n.right = std::move(r.node_);
  return make(std::move(n));
}

Formula Formula::next(Coalition c, Formula f) {
  Node n;
  n.kind = FormulaKind::Enforce;
  n.temporal = TemporalOp::Next;
  n.coalition = c;
  n.left = std::move(f.node_);
  return make(std::move(n));
}

Formula Formula::always(Coalition c, Formula f) {
  Node n;
  n.kind = FormulaKind::Enforce;
  n.temporal = TemporalOp::Always;
  n.coalition = c;
  n.left = std::move(f.node_);
  return make(std::move(n));
}

Formula Formula::eventually(Coalition c, Formula f) {
  Node n;
  n.kind = FormulaKind::Enforce;
  n.temporal = TemporalOp::Eventually;
  n.coalition = c;
  n.left = std::move(f.node_);
  return make(std::move(n));
}

Formula Formula::until(Coalition c, Formula l, Formula r) {
  Node n;
  n.kind = FormulaKind::Enforce;
  n.temporal = TemporalOp::Until;
  n.coalition = c;
  n.left = std::move(l.node_);
  n.right = std::move(r.node_);
  return make(std::move(n));
}

namespace {

bool node_equal(const Formula::Node* a, const Formula::Node* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::Atom:
      return a->prop == b->prop;
    case FormulaKind::Enforce:
      if (a->coalition != b->coalition || a->temporal != b->temporal) return false;
      break;
    default:
      break;
  }
  return node_equal(a->left.get(), b->left.get()) && node_equal(a->right.get(), b->right.get());
}

}  // namespace

bool operator==(const Formula& a, const Formula& b) { return node_equal(a.id(), b.id()); }

std::vector<Formula> postorder(const Formula& f) {
  std::vector<Formula> out;
  std::unordered_set<const Formula::Node*> seen;
  // Explicit stack: generated benchmark formulas can be deep.
  struct Frame {
    Formula f;
    int stage;
  };
  std::vector<Frame> stack{{f, 0}};
  while (!stack.empty()) {
    auto& top = stack.back();
    if (seen.count(top.f.id())) {
      stack.pop_back();
      continue;
    }
    const auto* n = top.f.id();
    if (top.stage == 0) {
      top.stage = 1;
      if (n->left) stack.push_back({top.f.left(), 0});
      continue;
    }
    if (top.stage == 1) {
      top.stage = 2;
      if (n->right) stack.push_back({top.f.right(), 0});
      continue;
    }
    seen.insert(n);
    out.push_back(top.f);
    stack.pop_back();
  }
  return out;
}

FormulaMetrics metrics(const Formula& f) {
  // Counts occurrences in the tree, so shared subterms count every time.
  FormulaMetrics m;
  std::vector<const Formula::Node*> stack{f.id()};
  while (!stack.empty()) {
    const auto* n = stack.back();
    stack.pop_back();
    switch (n->kind) {
      case FormulaKind::Enforce:
        ++m.k;
        break;
      case FormulaKind::Not:
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies:
        ++m.c;
        break;
      default:
        break;
    }
    if (n->left) stack.push_back(n->left.get());
    if (n->right) stack.push_back(n->right.get());
  }
  return m;
}

int max_proposition(const Formula& f) {
  int m = -1;
  for (const auto& g : postorder(f))
    if (g.kind() == FormulaKind::Atom) m = std::max(m, g.prop());
  return m;
}

Coalition agents_used(const Formula& f) {
  Coalition c = 0;
  for (const auto& g : postorder(f))
    if (g.kind() == FormulaKind::Enforce) c |= g.coalition();
  return c;
}

// ---------------------------------------------------------------------------
// parsing

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("at position " + std::to_string(position) + ": " + message),
      position_(position) {}

namespace {

enum class Tok { Ident, Bang, Amp, Pipe, Arrow, LParen, RParen, Comma, Open, Close, End };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t pos;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + std::string(t.text) + "'";
}

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (i_ >= s_.size()) return {Tok::End, {}, i_};
    std::size_t start = i_;
    char c = s_[i_];
    auto two = [&](std::string_view t) { return s_.substr(i_, 2) == t; };
    if (two("<<")) return i_ += 2, Token{Tok::Open, s_.substr(start, 2), start};
    if (two(">>")) return i_ += 2, Token{Tok::Close, s_.substr(start, 2), start};
    if (two("->")) return i_ += 2, Token{Tok::Arrow, s_.substr(start, 2), start};
    switch (c) {
      case '!': return ++i_, Token{Tok::Bang, s_.substr(start, 1), start};
      case '&': return ++i_, Token{Tok::Amp, s_.substr(start, 1), start};
      case '|': return ++i_, Token{Tok::Pipe, s_.substr(start, 1), start};
      case '(': return ++i_, Token{Tok::LParen, s_.substr(start, 1), start};
      case ')': return ++i_, Token{Tok::RParen, s_.substr(start, 1), start};
      case ',': return ++i_, Token{Tok::Comma, s_.substr(start, 1), start};
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
        ++i_;
      return {Tok::Ident, s_.substr(start, i_ - start), start};
    }
    throw ParseError(start, std::string("unexpected character '") + c + "'");
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const Signature& sig) : lex_(text), sig_(sig) { advance(); }

  Formula parse_all() {
    Formula f = formula();
    if (cur_.kind != Tok::End) throw ParseError(cur_.pos, "trailing input " + describe(cur_));
    return f;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k) throw ParseError(cur_.pos, std::string("expected ") + what + ", found " + describe(cur_));
    advance();
  }

  Formula formula() {
    Token t = cur_;
    switch (t.kind) {
      case Tok::Ident: {
        advance();
        if (t.text == "true") return Formula::truth();
        auto p = sig_.proposition_index(t.text);
        if (!p) throw ParseError(t.pos, "unknown proposition " + std::string(t.text));
        return Formula::atom(*p);
      }
      case Tok::Bang:
        advance();
        return Formula::negation(formula());
      case Tok::LParen: {
        advance();
        Formula l = formula();
        Tok op = cur_.kind;
        if (op != Tok::Amp && op != Tok::Pipe && op != Tok::Arrow)
          throw ParseError(cur_.pos, "expected '&', '|' or '->', found " + describe(cur_));
        advance();
        Formula r = formula();
        expect(Tok::RParen, "')'");
        if (op == Tok::Amp) return Formula::conjunction(std::move(l), std::move(r));
        if (op == Tok::Pipe) return Formula::disjunction(std::move(l), std::move(r));
        return Formula::implication(std::move(l), std::move(r));
      }
      case Tok::Open:
        advance();
        return strategic(coalition());
      default:
        throw ParseError(t.pos, "expected a formula, found " + describe(t));
    }
  }

  Coalition coalition() {
    Coalition c = 0;
    if (cur_.kind == Tok::Close) {
      advance();
      return c;
    }
    for (;;) {
      if (cur_.kind != Tok::Ident) throw ParseError(cur_.pos, "expected agent name, found " + describe(cur_));
      auto a = sig_.agent_index(cur_.text);
      if (!a) throw ParseError(cur_.pos, "unknown agent " + std::string(cur_.text));
      c |= Coalition{1} << *a;
      advance();
      if (cur_.kind == Tok::Comma) {
        advance();
        continue;
      }
      expect(Tok::Close, "',' or '>>'");
      return c;
    }
  }

  Formula strategic(Coalition c) {
    Token t = cur_;
    if (t.kind == Tok::LParen) {
      advance();
      Formula l = formula();
      if (cur_.kind != Tok::Ident || cur_.text != "U")
        throw ParseError(cur_.pos, "expected 'U', found " + describe(cur_));
      advance();
      Formula r = formula();
      expect(Tok::RParen, "')'");
      return Formula::until(c, std::move(l), std::move(r));
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "X") return advance(), Formula::next(c, formula());
      if (t.text == "G") return advance(), Formula::always(c, formula());
      if (t.text == "F") return advance(), Formula::eventually(c, formula());
    }
    throw ParseError(t.pos, "expected 'X', 'G', 'F' or '(', found " + describe(t));
  }

  Lexer lex_;
  const Signature& sig_;
  Token cur_{Tok::End, {}, 0};
};

}  // namespace

Formula parse(std::string_view text, const Signature& sig) { return Parser(text, sig).parse_all(); }

// ---------------------------------------------------------------------------
// printing

std::string coalition_to_string(Coalition c, const Signature& sig) {
  std::string s = "<<";
  bool first = true;
  for (std::size_t i = 0; i < sig.agents.size(); ++i) {
    if (!(c >> i & 1U)) continue;
    if (!first) s += ',';
    s += sig.agents[i].name;
    first = false;
  }
  return s + ">>";
}

namespace {

void print_into(std::string& out, const Formula::Node* n, const Signature& sig) {
  switch (n->kind) {
    case FormulaKind::True:
      out += "true";
      return;
    case FormulaKind::Atom:
      out += sig.propositions.at(static_cast<std::size_t>(n->prop));
      return;
    case FormulaKind::Not:
      out += '!';
      print_into(out, n->left.get(), sig);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies: {
      out += '(';
      print_into(out, n->left.get(), sig);
      out += n->kind == FormulaKind::And ? " & " : n->kind == FormulaKind::Or ? " | " : " -> ";
      print_into(out, n->right.get(), sig);
      out += ')';
      return;
    }
    case FormulaKind::Enforce:
      out += coalition_to_string(n->coalition, sig);
      switch (n->temporal) {
        case TemporalOp::Next: out += " X "; break;
        case TemporalOp::Always: out += " G "; break;
        case TemporalOp::Eventually: out += " F "; break;
        case TemporalOp::Until:
          out += " (";
          print_into(out, n->left.get(), sig);
          out += " U ";
          print_into(out, n->right.get(), sig);
          out += ')';
          return;
      }
      print_into(out, n->left.get(), sig);
      return;
  }
}

}  // namespace

std::string print(const Formula& f, const Signature& sig) {
  std::string out;
  print_into(out, f.id(), sig);
  return out;
}

// ---------------------------------------------------------------------------
// generation

namespace {

class Generator {
 public:
  Generator(const GeneratorParams& p, std::vector<Coalition> slots)
      : p_(p), rng_(p.seed), slots_(std::move(slots)) {}

  std::mt19937_64& rng() { return rng_; }

  Formula build(int k, int c, bool under_not) {
    if (k == 0 && c == 0) return Formula::atom(uniform(0, p_.propositions - 1));

    enum Choice { Not, Binary, Enforce };
    std::vector<Choice> choices;
    if (c >= 1 && !under_not) choices.push_back(Not);
    if (c >= 1) choices.insert(choices.end(), {Binary, Binary});
    if (k >= 1) choices.insert(choices.end(), {Enforce, Enforce});
    Choice pick = choices[static_cast<std::size_t>(uniform(0, static_cast<int>(choices.size()) - 1))];

    switch (pick) {
      case Not:
        return Formula::negation(build(k, c - 1, true));
      case Binary: {
        int rest_c = c - 1;
        int lk = uniform(0, k), lc = uniform(0, rest_c);
        int op = uniform(0, 2);
        Formula l = build(lk, lc, false);
        Formula r = build(k - lk, rest_c - lc, false);
        if (op == 0) return Formula::conjunction(std::move(l), std::move(r));
        if (op == 1) return Formula::disjunction(std::move(l), std::move(r));
        return Formula::implication(std::move(l), std::move(r));
      }
      case Enforce: {
        Coalition coal = slots_[next_slot_++];
        int op = uniform(0, 3);
        int rest_k = k - 1;
        if (op == 3) {
          int lk = uniform(0, rest_k), lc = uniform(0, c);
          Formula l = build(lk, lc, false);
          Formula r = build(rest_k - lk, c - lc, false);
          return Formula::until(coal, std::move(l), std::move(r));
        }
        Formula body = build(rest_k, c, false);
        if (op == 0) return Formula::next(coal, std::move(body));
        if (op == 1) return Formula::always(coal, std::move(body));
        return Formula::eventually(coal, std::move(body));
      }
    }
    return Formula::truth();
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  const GeneratorParams& p_;
  std::mt19937_64 rng_;
  std::vector<Coalition> slots_;
  std::size_t next_slot_ = 0;
};

}  // namespace

Formula generate(const GeneratorParams& p) {
  if (p.groups < 1) throw GeneratorError("groups must be at least 1");
  if (p.target_k < 0 || p.target_c < 0) throw GeneratorError("target counts must be non-negative");
  if (p.propositions < 1) throw GeneratorError("propositions must be at least 1");
  if (p.agents < 1 || p.agents > 32) throw GeneratorError("agents must be between 1 and 32");

  const std::uint64_t subsets = p.agents >= 63 ? ~std::uint64_t{0} : std::uint64_t{1} << p.agents;
  const int pool_size = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(p.groups), subsets));
  if (pool_size > p.target_k)
    throw GeneratorError("infeasible: " + std::to_string(pool_size) + " distinct coalitions need at least as many modalities, target_k is " +
                         std::to_string(p.target_k));

  // The pool and slot order come from their own stream so that the tree
  // shape stream stays independent of the pool size.
  std::mt19937_64 pool_rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Coalition> pool;
  std::unordered_set<Coalition> taken;
  const Coalition all = p.agents == 32 ? ~Coalition{0} : (Coalition{1} << p.agents) - 1;
  while (static_cast<int>(pool.size()) < pool_size) {
    Coalition c = static_cast<Coalition>(pool_rng()) & all;
    if (taken.insert(c).second) pool.push_back(c);
  }
  std::vector<Coalition> slots = pool;
  while (static_cast<int>(slots.size()) < p.target_k)
    slots.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(pool_rng)]);
  std::shuffle(slots.begin(), slots.end(), pool_rng);

  Generator g(p, std::move(slots));
  return g.build(p.target_k, p.target_c, false);
}

Signature generator_signature(int agents, int propositions, Semantics semantics) {
  Signature sig;
  sig.semantics = semantics;
  for (int i = 0; i < agents; ++i) {
    std::string name = i < 26 ? std::string(1, static_cast<char>('a' + i)) : "a" + std::to_string(i);
    sig.agents.push_back({name, 1, 1, {}});
  }
  static const char* kProps[] = {"p", "q", "r", "s"};
  for (int i = 0; i < propositions; ++i)
    sig.propositions.push_back(i < 4 ? kProps[i] : "p" + std::to_string(i));
  return sig;
}

}  // namespace atlforge

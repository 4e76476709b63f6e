#pragma once

// Scalar expressions appearing in update transformers: literals carrying
// their type, wire references, arithmetic/relational/boolean operators,
// overloaded conversion, the zero-test lifting s_bool, the generic s_*
// operations and if-then-else.
//
// Evaluation is defined over runtime values (bool or double). Operations
// without a definition at the operand kinds raise EvalError; in particular
// arithmetic over booleans is deliberately uninterpreted.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bdt/types.hpp"

namespace bdt {

using Value = std::variant<bool, double>;

inline bool value_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<bool>(a))
    return std::get<bool>(a) == std::get<bool>(b);
  return std::get<double>(a) == std::get<double>(b);
}

// Shortest faithful decimal form; integral values print without a point.
inline std::string num_to_string(double v) {
  if (v == 0.0) return "0";
  if (std::floor(v) == v && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

inline std::string to_string(const Value& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "True" : "False";
  return num_to_string(std::get<double>(v));
}

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

class SymExpr;
using Sym = std::shared_ptr<const SymExpr>;

enum class BinOp {
  add, sub, mul, pow,
  eq, ne, lt, le, gt, ge,
  conj, disj,
};

enum class UnOp { neg, lnot };

enum class SFun { s_and, s_or, s_not, s_exp, s_sin };

inline const char* to_string(SFun f) {
  switch (f) {
    case SFun::s_and: return "s_and";
    case SFun::s_or: return "s_or";
    case SFun::s_not: return "s_not";
    case SFun::s_exp: return "s_exp";
    case SFun::s_sin: return "s_sin";
  }
  return "?";
}

struct LitE {
  Value value;
  TypeTerm type;
};

struct WireE {
  std::string name;
};

struct UnE {
  UnOp op;
  Sym a;
  std::optional<ClassId> cls;  // class imposed on the operand type
};

struct BinE {
  BinOp op;
  Sym a, b;
  std::optional<ClassId> cls;  // class imposed on the operand type
};

struct ConvE {
  Sym a;
  std::optional<Ground> target;
  TypeTerm out_type;  // target as ground, or a fresh variable
};

struct SBoolE {
  Sym a;
  TypeTerm out_type;  // independent of the argument type
};

struct SCallE {
  SFun f;
  std::vector<Sym> args;
  std::optional<ClassId> cls;  // class constraint on the common argument type
};

struct IteE {
  Sym cond, then_v, else_v;
};

class SymExpr {
 public:
  using Rep = std::variant<LitE, WireE, UnE, BinE, ConvE, SBoolE, SCallE, IteE>;
  explicit SymExpr(Rep rep) : rep_(std::move(rep)) {}
  const Rep& rep() const { return rep_; }

 private:
  Rep rep_;
};

inline Sym mk(SymExpr::Rep rep) {
  return std::make_shared<const SymExpr>(std::move(rep));
}

inline Sym lit(Value v, TypeTerm t) { return mk(LitE{v, std::move(t)}); }
inline Sym wire(std::string name) { return mk(WireE{std::move(name)}); }

inline Sym add(Sym a, Sym b) { return mk(BinE{BinOp::add, a, b, ClassId::plus}); }
inline Sym sub(Sym a, Sym b) { return mk(BinE{BinOp::sub, a, b, ClassId::minus}); }
inline Sym mul(Sym a, Sym b) { return mk(BinE{BinOp::mul, a, b, ClassId::power}); }
inline Sym pow_(Sym a, Sym b) { return mk(BinE{BinOp::pow, a, b, ClassId::power}); }
// Step scaling inside the integrator: part of the discretisation
// primitive, which only requires plus of its element type.
inline Sym mul_unconstrained(Sym a, Sym b) {
  return mk(BinE{BinOp::mul, a, b, std::nullopt});
}
inline Sym neg(Sym a) { return mk(UnE{UnOp::neg, a, ClassId::uminus}); }

inline Sym cmp(BinOp op, Sym a, Sym b) {
  std::optional<ClassId> cls;
  if (op == BinOp::lt || op == BinOp::le || op == BinOp::gt || op == BinOp::ge)
    cls = ClassId::ord;
  return mk(BinE{op, a, b, cls});
}
inline Sym conj(Sym a, Sym b) { return mk(BinE{BinOp::conj, a, b, std::nullopt}); }
inline Sym disj(Sym a, Sym b) { return mk(BinE{BinOp::disj, a, b, std::nullopt}); }
inline Sym lnot(Sym a) { return mk(UnE{UnOp::lnot, a, std::nullopt}); }

inline Sym conv(Sym a, std::optional<Ground> target, TypeTerm out_type) {
  return mk(ConvE{a, target, std::move(out_type)});
}
inline Sym s_bool(Sym a, TypeTerm out_type) {
  return mk(SBoolE{a, std::move(out_type)});
}
inline Sym s_call(SFun f, std::vector<Sym> args,
                  std::optional<ClassId> cls = std::nullopt) {
  return mk(SCallE{f, std::move(args), cls});
}
inline Sym ite(Sym c, Sym t, Sym e) { return mk(IteE{c, t, e}); }

// ---------------------------------------------------------------------------
// Evaluation

using Env = std::map<std::string, Value>;

inline double need_num(const Value& v, const char* what) {
  if (!std::holds_alternative<double>(v))
    throw EvalError(std::string("operation ") + what +
                    " is undefined at bool");
  return std::get<double>(v);
}

inline bool need_bool(const Value& v, const char* what) {
  if (!std::holds_alternative<bool>(v))
    throw EvalError(std::string(what) + " expects a boolean");
  return std::get<bool>(v);
}

inline bool truthy(const Value& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  return std::get<double>(v) != 0.0;
}

inline Value eval_sym(const Sym& e, const Env& env);

inline int cmp_values(const Value& a, const Value& b, const char* what) {
  // Booleans are ordered False < True; mixing kinds is a typing bug.
  if (std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b)) {
    int x = std::get<bool>(a) ? 1 : 0;
    int y = std::get<bool>(b) ? 1 : 0;
    return x - y;
  }
  if (std::holds_alternative<double>(a) && std::holds_alternative<double>(b)) {
    double x = std::get<double>(a), y = std::get<double>(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  throw EvalError(std::string(what) + " over mixed value kinds");
}

inline Value eval_sym(const Sym& e, const Env& env) {
  struct V {
    const Env& env;
    Value operator()(const LitE& n) const {
      // A numeric literal at bool denotes False for 0 and True otherwise.
      if (n.type.is_ground() && n.type.as_ground().g == Ground::boolean &&
          std::holds_alternative<double>(n.value))
        return std::get<double>(n.value) != 0.0;
      return n.value;
    }
    Value operator()(const WireE& w) const {
      auto it = env.find(w.name);
      if (it == env.end())
        throw EvalError("unbound wire " + w.name);
      return it->second;
    }
    Value operator()(const UnE& u) const {
      Value a = eval_sym(u.a, env);
      if (u.op == UnOp::neg) return -need_num(a, "unary −");
      return !need_bool(a, "¬");
    }
    Value operator()(const BinE& b) const {
      if (b.op == BinOp::conj) {
        return need_bool(eval_sym(b.a, env), "∧") &&
               need_bool(eval_sym(b.b, env), "∧");
      }
      if (b.op == BinOp::disj) {
        return need_bool(eval_sym(b.a, env), "∨") ||
               need_bool(eval_sym(b.b, env), "∨");
      }
      Value x = eval_sym(b.a, env);
      Value y = eval_sym(b.b, env);
      switch (b.op) {
        case BinOp::add: return need_num(x, "+") + need_num(y, "+");
        case BinOp::sub: return need_num(x, "−") - need_num(y, "−");
        case BinOp::mul: return need_num(x, "·") * need_num(y, "·");
        case BinOp::pow: return std::pow(need_num(x, "^"), need_num(y, "^"));
        case BinOp::eq:
          if (x.index() != y.index())
            throw EvalError("= over mixed value kinds");
          return value_equal(x, y);
        case BinOp::ne:
          if (x.index() != y.index())
            throw EvalError("≠ over mixed value kinds");
          return !value_equal(x, y);
        case BinOp::lt: return cmp_values(x, y, "<") < 0;
        case BinOp::le: return cmp_values(x, y, "≤") <= 0;
        case BinOp::gt: return cmp_values(x, y, ">") > 0;
        case BinOp::ge: return cmp_values(x, y, "≥") >= 0;
        default: throw EvalError("unreachable");
      }
    }
    Value operator()(const ConvE& c) const {
      Value a = eval_sym(c.a, env);
      std::optional<Ground> dst = c.target;
      if (c.out_type.is_ground()) dst = c.out_type.as_ground().g;
      bool to_bool = dst && *dst == Ground::boolean;
      bool to_num =
          dst && (*dst == Ground::real || *dst == Ground::integer);
      if (std::holds_alternative<bool>(a)) {
        if (to_num) return std::get<bool>(a) ? 1.0 : 0.0;
        return a;  // identity at bool
      }
      if (to_bool) return std::get<double>(a) != 0.0;
      return a;  // identity over numbers
    }
    Value operator()(const SBoolE& s) const {
      // s_bool(x) := if x≠0 then 1 else 0, at the result type: True/False
      // when the result is boolean, 1/0 when numeric.
      Value a = eval_sym(s.a, env);
      if (s.out_type.is_ground()) {
        if (s.out_type.as_ground().g == Ground::boolean) return truthy(a);
        return truthy(a) ? 1.0 : 0.0;
      }
      if (std::holds_alternative<bool>(a)) return a;
      return truthy(a) ? 1.0 : 0.0;
    }
    Value operator()(const SCallE& c) const {
      std::vector<Value> args;
      for (const Sym& a : c.args) args.push_back(eval_sym(a, env));
      switch (c.f) {
        case SFun::s_and:
        case SFun::s_or: {
          // n-ary over truthiness, like the block they lower from
          bool r = c.f == SFun::s_and;
          for (const Value& a : args)
            r = c.f == SFun::s_and ? (r && truthy(a)) : (r || truthy(a));
          if (std::holds_alternative<bool>(args.at(0))) return r;
          return r ? 1.0 : 0.0;
        }
        case SFun::s_not: {
          bool r = !truthy(args.at(0));
          if (std::holds_alternative<bool>(args[0])) return r;
          return r ? 1.0 : 0.0;
        }
        case SFun::s_exp:
          return std::exp(need_num(args.at(0), "s_exp"));
        case SFun::s_sin:
          return std::sin(need_num(args.at(0), "s_sin"));
      }
      throw EvalError("unreachable");
    }
    Value operator()(const IteE& i) const {
      return need_bool(eval_sym(i.cond, env), "if")
                 ? eval_sym(i.then_v, env)
                 : eval_sym(i.else_v, env);
    }
  };
  return std::visit(V{env}, e->rep());
}

// ---------------------------------------------------------------------------
// Printing
//
// Precedence, loosest first: ite, ∨, ∧, comparisons, +/−, ·, ^, unary.
// Additive operators print spaced at top level and tight when the printer
// wraps them in parentheses; comparisons, · and ^ always print tight.

namespace detail {

inline int prec(const SymExpr& e) {
  struct V {
    int operator()(const LitE&) const { return 100; }
    int operator()(const WireE&) const { return 100; }
    int operator()(const UnE&) const { return 70; }
    int operator()(const BinE& b) const {
      switch (b.op) {
        case BinOp::disj: return 10;
        case BinOp::conj: return 20;
        case BinOp::eq: case BinOp::ne: case BinOp::lt:
        case BinOp::le: case BinOp::gt: case BinOp::ge: return 30;
        case BinOp::add: case BinOp::sub: return 40;
        case BinOp::mul: return 50;
        case BinOp::pow: return 60;
      }
      return 100;
    }
    int operator()(const ConvE&) const { return 90; }
    int operator()(const SBoolE&) const { return 100; }
    int operator()(const SCallE&) const { return 100; }
    int operator()(const IteE&) const { return 5; }
  };
  return std::visit(V{}, e.rep());
}

inline const char* op_symbol(BinOp op) {
  switch (op) {
    case BinOp::add: return "+";
    case BinOp::sub: return "−";
    case BinOp::mul: return "·";
    case BinOp::pow: return "^";
    case BinOp::eq: return "=";
    case BinOp::ne: return "≠";
    case BinOp::lt: return "<";
    case BinOp::le: return "≤";
    case BinOp::gt: return ">";
    case BinOp::ge: return "≥";
    case BinOp::conj: return "∧";
    case BinOp::disj: return "∨";
  }
  return "?";
}

std::string print_sym(const SymExpr& e, int min_prec, bool parenthesized);

inline std::string print_child(const Sym& e, int min_prec, bool tight_ctx) {
  bool parens = prec(*e) < min_prec;
  std::string body = print_sym(*e, parens ? 0 : min_prec, parens || tight_ctx);
  if (parens) return "(" + body + ")";
  return body;
}

inline std::string print_sym(const SymExpr& e, int /*min_prec*/,
                             bool parenthesized) {
  struct V {
    bool tight;
    std::string operator()(const LitE& n) const { return to_string(n.value); }
    std::string operator()(const WireE& w) const { return w.name; }
    std::string operator()(const UnE& u) const {
      const char* sym = u.op == UnOp::neg ? "−" : "¬";
      return sym + print_child(u.a, 71, tight);
    }
    std::string operator()(const BinE& b) const {
      int p = prec(SymExpr(BinE{b.op, b.a, b.b, b.cls}));
      bool spaced;
      switch (b.op) {
        case BinOp::add: case BinOp::sub: spaced = !tight; break;
        case BinOp::conj: case BinOp::disj: spaced = true; break;
        case BinOp::eq: case BinOp::ne: case BinOp::lt:
        case BinOp::le: case BinOp::gt: case BinOp::ge: spaced = false; break;
        default: spaced = false; break;
      }
      std::string op = op_symbol(b.op);
      std::string sep = spaced ? " " + op + " " : op;
      bool right_assoc = b.op == BinOp::pow;
      // comparisons do not chain; parenthesize a comparison operand
      bool non_assoc = p == 30;
      std::string lhs =
          print_child(b.a, right_assoc || non_assoc ? p + 1 : p, tight);
      std::string rhs = print_child(b.b, right_assoc ? p : p + 1, tight);
      return lhs + sep + rhs;
    }
    std::string operator()(const ConvE& c) const {
      std::string body = "conv(" + print_child(c.a, 0, false) + ")";
      if (c.target) return body + ":" + to_string(*c.target);
      return body;
    }
    std::string operator()(const SBoolE& s) const {
      return "s_bool(" + print_child(s.a, 0, false) + ")";
    }
    std::string operator()(const SCallE& c) const {
      std::string out = to_string(c.f);
      out += "(";
      for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i) out += ",";
        out += print_child(c.args[i], 0, false);
      }
      return out + ")";
    }
    std::string operator()(const IteE& i) const {
      return "if " + print_child(i.cond, 6, false) + " then " +
             print_child(i.then_v, 6, false) + " else " +
             print_child(i.else_v, 6, false);
    }
  };
  return std::visit(V{parenthesized}, e.rep());
}

}  // namespace detail

inline std::string to_string(const Sym& e) {
  return detail::print_sym(*e, 0, false);
}

// ---------------------------------------------------------------------------
// Structural helpers

// Substitutes expressions for wire references; the replacement map is
// applied simultaneously, so no capture is possible.
inline Sym substitute_wires(const Sym& e, const std::map<std::string, Sym>& m) {
  struct V {
    const std::map<std::string, Sym>& m;
    Sym operator()(const LitE& n) const { return mk(LitE{n}); }
    Sym operator()(const WireE& w) const {
      auto it = m.find(w.name);
      if (it != m.end()) return it->second;
      return mk(WireE{w});
    }
    Sym operator()(const UnE& u) const {
      return mk(UnE{u.op, substitute_wires(u.a, m), u.cls});
    }
    Sym operator()(const BinE& b) const {
      return mk(BinE{b.op, substitute_wires(b.a, m), substitute_wires(b.b, m),
                     b.cls});
    }
    Sym operator()(const ConvE& c) const {
      return mk(ConvE{substitute_wires(c.a, m), c.target, c.out_type});
    }
    Sym operator()(const SBoolE& s) const {
      return mk(SBoolE{substitute_wires(s.a, m), s.out_type});
    }
    Sym operator()(const SCallE& c) const {
      std::vector<Sym> args;
      for (const Sym& a : c.args) args.push_back(substitute_wires(a, m));
      return mk(SCallE{c.f, std::move(args), c.cls});
    }
    Sym operator()(const IteE& i) const {
      return mk(IteE{substitute_wires(i.cond, m), substitute_wires(i.then_v, m),
                     substitute_wires(i.else_v, m)});
    }
  };
  return std::visit(V{m}, e->rep());
}

inline void collect_wires(const Sym& e, std::set<std::string>& out) {
  struct V {
    std::set<std::string>& out;
    void operator()(const LitE&) const {}
    void operator()(const WireE& w) const { out.insert(w.name); }
    void operator()(const UnE& u) const { collect_wires(u.a, out); }
    void operator()(const BinE& b) const {
      collect_wires(b.a, out);
      collect_wires(b.b, out);
    }
    void operator()(const ConvE& c) const { collect_wires(c.a, out); }
    void operator()(const SBoolE& s) const { collect_wires(s.a, out); }
    void operator()(const SCallE& c) const {
      for (const Sym& a : c.args) collect_wires(a, out);
    }
    void operator()(const IteE& i) const {
      collect_wires(i.cond, out);
      collect_wires(i.then_v, out);
      collect_wires(i.else_v, out);
    }
  };
  std::visit(V{out}, e->rep());
}

// Rewrites the type slots (literals and conversion results) under a final
// substitution, after which expressions carry resolved types inline.
inline Sym resolve_types(const Sym& e, const Subst& s) {
  struct V {
    const Subst& s;
    Sym operator()(const LitE& n) const {
      return lit(n.value, s.apply(n.type));
    }
    Sym operator()(const WireE& w) const { return mk(WireE{w}); }
    Sym operator()(const UnE& u) const {
      return mk(UnE{u.op, resolve_types(u.a, s), u.cls});
    }
    Sym operator()(const BinE& b) const {
      return mk(BinE{b.op, resolve_types(b.a, s), resolve_types(b.b, s),
                     b.cls});
    }
    Sym operator()(const ConvE& c) const {
      return mk(ConvE{resolve_types(c.a, s), c.target, s.apply(c.out_type)});
    }
    Sym operator()(const SBoolE& sb) const {
      return mk(SBoolE{resolve_types(sb.a, s), s.apply(sb.out_type)});
    }
    Sym operator()(const SCallE& c) const {
      std::vector<Sym> args;
      for (const Sym& a : c.args) args.push_back(resolve_types(a, s));
      return mk(SCallE{c.f, std::move(args), c.cls});
    }
    Sym operator()(const IteE& i) const {
      return mk(IteE{resolve_types(i.cond, s), resolve_types(i.then_v, s),
                     resolve_types(i.else_v, s)});
    }
  };
  return std::visit(V{s}, e->rep());
}

}  // namespace bdt

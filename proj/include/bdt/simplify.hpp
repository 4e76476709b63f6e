#pragma once

// Simplification of update expressions after fusion.
//
// Two layers, applied bottom-up to a fixpoint:
//   - evaluation folding: a wire-free subtree whose resolved type is a
//     ground type evaluates to a literal (1+3 folds at real, but stays
//     symbolic at a type variable, where addition has no fixed meaning)
//   - algebraic rules that are valid at every instance of the inferred
//     type: n ≠ 0 is True only when the literal's class set guarantees a
//     nonzero denotation (numeral_nzero) or the type is already ground.
//
// Every rule reduces the node count or is idempotent, so the rewrite
// terminates.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdt/pt.hpp"
#include "bdt/sym.hpp"
#include "bdt/types.hpp"

namespace bdt {

inline int count_sym_nodes(const Sym& e) {
  struct V {
    int operator()(const LitE&) const { return 1; }
    int operator()(const WireE&) const { return 1; }
    int operator()(const UnE& u) const { return 1 + count_sym_nodes(u.a); }
    int operator()(const BinE& b) const {
      return 1 + count_sym_nodes(b.a) + count_sym_nodes(b.b);
    }
    int operator()(const ConvE& c) const { return 1 + count_sym_nodes(c.a); }
    int operator()(const SBoolE& s) const { return 1 + count_sym_nodes(s.a); }
    int operator()(const SCallE& c) const {
      int n = 1;
      for (const Sym& a : c.args) n += count_sym_nodes(a);
      return n;
    }
    int operator()(const IteE& i) const {
      return 1 + count_sym_nodes(i.cond) + count_sym_nodes(i.then_v) +
             count_sym_nodes(i.else_v);
    }
  };
  return std::visit(V{}, e->rep());
}

namespace detail {

struct Folded {
  Sym e;
  std::optional<TypeTerm> t;  // resolved type when structurally known
  bool wire_free = false;
};

inline bool is_ground_num(const std::optional<TypeTerm>& t) {
  return t && t->is_ground() &&
         (t->as_ground().g == Ground::real || t->as_ground().g == Ground::integer);
}

inline bool is_ground(const std::optional<TypeTerm>& t, Ground g) {
  return t && t->is_ground() && t->as_ground().g == g;
}

inline const LitE* as_lit(const Sym& e) {
  return std::get_if<LitE>(&e->rep());
}

inline bool lit_is(const Sym& e, bool b) {
  const LitE* l = as_lit(e);
  return l && std::holds_alternative<bool>(l->value) &&
         std::get<bool>(l->value) == b;
}

inline bool lit_is(const Sym& e, double v) {
  const LitE* l = as_lit(e);
  return l && std::holds_alternative<double>(l->value) &&
         std::get<double>(l->value) == v;
}

// Is this literal's denotation nonzero at every instance of its type?
// Ground bool/real/int: decided by the value. A type variable only
// guarantees it through numeral_nzero; a zero value is zero everywhere.
enum class ZeroFact { zero, nonzero, unknown };

inline ZeroFact zero_fact(const LitE& l, const Subst& s) {
  if (std::holds_alternative<bool>(l.value))
    return std::get<bool>(l.value) ? ZeroFact::nonzero : ZeroFact::zero;
  double v = std::get<double>(l.value);
  if (v == 0.0) return ZeroFact::zero;
  TypeTerm t = s.apply(l.type);
  if (t.is_ground()) return ZeroFact::nonzero;
  if (t.is_var() && t.as_var().classes.contains(ClassId::numeral_nzero))
    return ZeroFact::nonzero;
  return ZeroFact::unknown;
}

Folded fold_node(const Sym& e, const Subst& s);

// True when every stored type slot in the subtree resolves to a ground
// type; evaluation is only meaning-preserving on such subtrees (a literal
// at a type variable denotes differently per instantiation).
inline bool fully_resolved(const Sym& e, const Subst& s) {
  struct V {
    const Subst& s;
    bool slot(const TypeTerm& t) const { return s.apply(t).is_ground(); }
    bool operator()(const LitE& l) const { return slot(l.type); }
    bool operator()(const WireE&) const { return true; }
    bool operator()(const UnE& u) const { return fully_resolved(u.a, s); }
    bool operator()(const BinE& b) const {
      return fully_resolved(b.a, s) && fully_resolved(b.b, s);
    }
    bool operator()(const ConvE& c) const {
      return slot(c.out_type) && fully_resolved(c.a, s);
    }
    bool operator()(const SBoolE& sb) const {
      return slot(sb.out_type) && fully_resolved(sb.a, s);
    }
    bool operator()(const SCallE& c) const {
      for (const Sym& a : c.args)
        if (!fully_resolved(a, s)) return false;
      return true;
    }
    bool operator()(const IteE& i) const {
      return fully_resolved(i.cond, s) && fully_resolved(i.then_v, s) &&
             fully_resolved(i.else_v, s);
    }
  };
  return std::visit(V{s}, e->rep());
}

// Local rewrites at one node whose children are already folded.
inline Folded apply_rules(Folded f, const Subst& s) {
  for (int guard = 0; guard < 32; ++guard) {
    const auto& rep = f.e->rep();

    // numeric literal at ground bool becomes True/False
    if (const LitE* l = std::get_if<LitE>(&rep)) {
      if (std::holds_alternative<double>(l->value) &&
          is_ground(f.t, Ground::boolean)) {
        f.e = lit(Value{std::get<double>(l->value) != 0.0}, s.apply(l->type));
        continue;
      }
      break;  // nothing else applies to a literal
    }

    // wire-free fully ground subtree evaluates outright
    if (f.wire_free && f.t && f.t->is_ground() &&
        f.t->as_ground().g != Ground::unit && fully_resolved(f.e, s)) {
      bool evaluated = false;
      try {
        Value v = eval_sym(resolve_types(f.e, s), Env{});
        Sym folded = lit(v, *f.t);
        if (count_sym_nodes(folded) < count_sym_nodes(f.e)) {
          f.e = folded;
          evaluated = true;
        }
      } catch (const EvalError&) {
      }
      if (evaluated) continue;
    }

    if (const UnE* u = std::get_if<UnE>(&rep)) {
      if (u->op == UnOp::lnot) {
        if (const UnE* uu = std::get_if<UnE>(&u->a->rep());
            uu && uu->op == UnOp::lnot) {
          f.e = uu->a;
          continue;
        }
        if (lit_is(u->a, true)) { f.e = lit(Value{false}, t_bool()); continue; }
        if (lit_is(u->a, false)) { f.e = lit(Value{true}, t_bool()); continue; }
      }
      break;
    }

    if (const BinE* b = std::get_if<BinE>(&rep)) {
      if (b->op == BinOp::conj) {
        if (lit_is(b->a, true)) { f.e = b->b; continue; }
        if (lit_is(b->b, true)) { f.e = b->a; continue; }
        if (lit_is(b->a, false) || lit_is(b->b, false)) {
          f.e = lit(Value{false}, t_bool());
          continue;
        }
        break;
      }
      if (b->op == BinOp::disj) {
        if (lit_is(b->a, false)) { f.e = b->b; continue; }
        if (lit_is(b->b, false)) { f.e = b->a; continue; }
        if (lit_is(b->a, true) || lit_is(b->b, true)) {
          f.e = lit(Value{true}, t_bool());
          continue;
        }
        break;
      }
      if (b->op == BinOp::eq || b->op == BinOp::ne) {
        const LitE* la = as_lit(b->a);
        const LitE* lb = as_lit(b->b);
        // zero-test on a literal, decided by the class discipline
        if (la && lb) {
          ZeroFact fa = zero_fact(*la, s);
          ZeroFact fb = zero_fact(*lb, s);
          if (fa != ZeroFact::unknown && fb != ZeroFact::unknown &&
              (fa == ZeroFact::zero || fb == ZeroFact::zero)) {
            bool same = fa == fb;
            bool val = b->op == BinOp::eq ? same : !same;
            f.e = lit(Value{val}, t_bool());
            continue;
          }
        }
        // comparison against a boolean literal collapses
        auto bool_side = [&](const Sym& side,
                             const Sym& other) -> std::optional<Sym> {
          const LitE* l = as_lit(side);
          if (!l || !std::holds_alternative<bool>(l->value))
            return std::nullopt;
          bool bv = std::get<bool>(l->value);
          bool keep = (b->op == BinOp::eq) == bv;  // e = True, e != False
          return keep ? other : lnot(other);
        };
        if (auto r = bool_side(b->b, b->a)) { f.e = *r; continue; }
        if (auto r = bool_side(b->a, b->b)) { f.e = *r; continue; }
        break;
      }
      if (b->op == BinOp::add) {
        if (is_ground_num(f.t)) {
          if (lit_is(b->a, 0.0)) { f.e = b->b; continue; }
          if (lit_is(b->b, 0.0)) { f.e = b->a; continue; }
        }
        break;
      }
      if (b->op == BinOp::mul) {
        if (is_ground_num(f.t)) {
          if (lit_is(b->a, 1.0)) { f.e = b->b; continue; }
          if (lit_is(b->b, 1.0)) { f.e = b->a; continue; }
        }
        break;
      }
      break;
    }

    if (const ConvE* c = std::get_if<ConvE>(&rep)) {
      Folded child = fold_node(c->a, s);  // children already folded; cheap
      TypeTerm out = s.apply(c->out_type);
      if (out.is_ground() && is_ground(child.t, out.as_ground().g)) {
        f.e = c->a;
        f.t = child.t;
        continue;
      }
      break;
    }

    if (const SBoolE* sb = std::get_if<SBoolE>(&rep)) {
      TypeTerm out = s.apply(sb->out_type);
      Folded child = fold_node(sb->a, s);
      // identity at bool on both sides
      if (is_ground(std::optional<TypeTerm>(out), Ground::boolean) &&
          is_ground(child.t, Ground::boolean)) {
        f.e = sb->a;
        f.t = out;
        continue;
      }
      if (const LitE* l = as_lit(sb->a)) {
        ZeroFact zf = zero_fact(*l, s);
        if (zf != ZeroFact::unknown) {
          f.e = lit(Value{zf == ZeroFact::nonzero ? 1.0 : 0.0}, out);
          continue;
        }
      }
      break;
    }

    if (const IteE* i = std::get_if<IteE>(&rep)) {
      if (lit_is(i->cond, true)) { f.e = i->then_v; f.t = std::nullopt; continue; }
      if (lit_is(i->cond, false)) { f.e = i->else_v; f.t = std::nullopt; continue; }
      break;
    }

    break;
  }
  return f;
}

inline Folded fold_node(const Sym& e, const Subst& s) {
  struct V {
    const Subst& s;

    Folded operator()(const LitE& l) const {
      return {lit(l.value, l.type), s.apply(l.type), true};
    }
    Folded operator()(const WireE& w) const {
      return {mk(WireE{w}), std::nullopt, false};
    }
    Folded operator()(const UnE& u) const {
      Folded a = fold_node(u.a, s);
      Folded f{mk(UnE{u.op, a.e, u.cls}),
               u.op == UnOp::lnot ? std::optional<TypeTerm>(t_bool()) : a.t,
               a.wire_free};
      return f;
    }
    Folded operator()(const BinE& b) const {
      Folded a = fold_node(b.a, s);
      Folded c = fold_node(b.b, s);
      std::optional<TypeTerm> t;
      switch (b.op) {
        case BinOp::eq: case BinOp::ne: case BinOp::lt: case BinOp::le:
        case BinOp::gt: case BinOp::ge: case BinOp::conj: case BinOp::disj:
          t = t_bool();
          break;
        default:
          t = a.t ? a.t : c.t;  // operands are unified
      }
      return {mk(BinE{b.op, a.e, c.e, b.cls}), t, a.wire_free && c.wire_free};
    }
    Folded operator()(const ConvE& c) const {
      Folded a = fold_node(c.a, s);
      return {mk(ConvE{a.e, c.target, c.out_type}), s.apply(c.out_type),
              a.wire_free};
    }
    Folded operator()(const SBoolE& sb) const {
      Folded a = fold_node(sb.a, s);
      return {mk(SBoolE{a.e, sb.out_type}), s.apply(sb.out_type), a.wire_free};
    }
    Folded operator()(const SCallE& c) const {
      std::vector<Sym> args;
      std::optional<TypeTerm> t;
      bool wf = true;
      for (const Sym& a : c.args) {
        Folded fa = fold_node(a, s);
        args.push_back(fa.e);
        if (!t) t = fa.t;
        wf = wf && fa.wire_free;
      }
      return {mk(SCallE{c.f, std::move(args), c.cls}), t, wf};
    }
    Folded operator()(const IteE& i) const {
      Folded c = fold_node(i.cond, s);
      Folded a = fold_node(i.then_v, s);
      Folded b = fold_node(i.else_v, s);
      return {mk(IteE{c.e, a.e, b.e}), a.t ? a.t : b.t,
              c.wire_free && a.wire_free && b.wire_free};
    }
  };
  Folded f = std::visit(V{s}, e->rep());
  return apply_rules(std::move(f), s);
}

}  // namespace detail

inline Sym fold_constants(const Sym& e, const Subst& s) {
  Sym cur = e;
  for (int i = 0; i < 8; ++i) {
    Sym next = detail::fold_node(cur, s).e;
    if (to_string(next) == to_string(cur)) break;
    cur = next;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Canonical renaming
//
// A fused update carries machine-generated wire names. For display the
// inputs are renamed along a shared alphabet: value parameters of the
// enclosing definition consume the first positions, then external inputs,
// then states (s, or s1..sn when there are several).

inline std::string positional_name(int pos) {
  static const char* k_names[] = {"x", "y", "z", "u", "v", "w"};
  if (pos < 6) return k_names[pos];
  return "p" + std::to_string(pos + 1);
}

inline std::string state_name(int idx, int state_count) {
  if (state_count == 1) return "s";
  return "s" + std::to_string(idx + 1);
}

struct NormalizedUpdate {
  UpdatePT update;
  int external_count = 0;
  int state_count = 0;
};

// `fused.inputs` must list external inputs first, then state inputs.
// `name_start` is how many positional names the definition's value
// parameters already consumed.
inline NormalizedUpdate normalize_update(const UpdatePT& fused,
                                         const Subst& subst, int state_count,
                                         int name_start = 0) {
  NormalizedUpdate r;
  r.state_count = state_count;
  r.external_count = static_cast<int>(fused.inputs.size()) - state_count;
  std::map<std::string, Sym> rename;
  for (int i = 0; i < r.external_count; ++i) {
    std::string name = positional_name(name_start + i);
    r.update.inputs.push_back(name);
    rename.emplace(fused.inputs[i], wire(name));
  }
  for (int i = 0; i < state_count; ++i) {
    std::string name = state_name(i, state_count);
    r.update.inputs.push_back(name);
    rename.emplace(fused.inputs[r.external_count + i], wire(name));
  }
  for (const Sym& e : fused.outputs)
    r.update.outputs.push_back(
        fold_constants(substitute_wires(e, rename), subst));
  return r;
}

}  // namespace bdt

#pragma once

// Predicate transformer expressions. Every transformer here is an update
// [x1,..,xn ↝ e1,..,em]: it consumes a tuple of scalar inputs and produces
// a tuple of scalar outputs. Compositions:
//
//   Serial(a, b)    data flows through a, then b       PT(in a, out b)
//   Parallel(a, b)  side by side                       PT(a×c, b×d)
//   Feedback(body)  first output fed to first input    PT(b, c)
//   Named(n, args)  reference to a definition; each use is typed with
//                   fresh type variables (per-occurrence generalization)
//
// Feedback is evaluated by state threading: the caller supplies the
// fed-back value as input 0 and receives the full body outputs, so no
// fixpoint is solved at runtime.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "bdt/sym.hpp"
#include "bdt/types.hpp"

namespace bdt {

class PTExpr;
using PT = std::shared_ptr<const PTExpr>;

struct UpdatePT {
  std::vector<std::string> inputs;
  std::vector<Sym> outputs;
};

struct IdPT {};

struct SerialPT {
  PT a, b;  // a first, then b
};

struct ParallelPT {
  PT a, b;
};

struct FeedbackPT {
  PT body;
};

struct NamedPT {
  std::string name;
  std::vector<std::string> args;  // value parameters threaded through
};

class PTExpr {
 public:
  using Rep = std::variant<UpdatePT, IdPT, SerialPT, ParallelPT, FeedbackPT,
                           NamedPT>;
  explicit PTExpr(Rep rep) : rep_(std::move(rep)) {}
  const Rep& rep() const { return rep_; }

 private:
  Rep rep_;
};

inline PT mk_pt(PTExpr::Rep rep) {
  return std::make_shared<const PTExpr>(std::move(rep));
}

inline PT pt_update(std::vector<std::string> inputs, std::vector<Sym> outputs) {
  return mk_pt(UpdatePT{std::move(inputs), std::move(outputs)});
}
inline PT pt_id() { return mk_pt(IdPT{}); }
inline PT compose_serial(PT a, PT b) {
  return mk_pt(SerialPT{std::move(a), std::move(b)});
}
inline PT compose_parallel(PT a, PT b) {
  return mk_pt(ParallelPT{std::move(a), std::move(b)});
}
inline PT pt_feedback(PT body) { return mk_pt(FeedbackPT{std::move(body)}); }
inline PT pt_named(std::string name, std::vector<std::string> args = {}) {
  return mk_pt(NamedPT{std::move(name), std::move(args)});
}

// A named definition. Value parameters carry constants' type variables
// into the signature; they never hold runtime data. `params` lists them
// in positional order (dt last when the body uses it).
struct Definition {
  std::string name;
  PT body;
  std::vector<std::string> params;
  std::map<std::string, TypeTerm> param_types;
};

using DefEnv = std::map<std::string, Definition>;

// ---------------------------------------------------------------------------
// Printing (paper notation)

std::string to_string(const PT& p);

namespace detail {

inline int pt_prec(const PTExpr& e) {
  struct V {
    int operator()(const SerialPT&) const { return 40; }
    int operator()(const ParallelPT&) const { return 30; }
    int operator()(const UpdatePT&) const { return 100; }
    int operator()(const IdPT&) const { return 100; }
    int operator()(const FeedbackPT&) const { return 100; }
    int operator()(const NamedPT&) const { return 100; }
  };
  return std::visit(V{}, e.rep());
}

inline std::string print_pt_child(const PT& p, int min_prec) {
  std::string body = to_string(p);
  if (pt_prec(*p) < min_prec) return "(" + body + ")";
  return body;
}

}  // namespace detail

inline std::string to_string(const UpdatePT& u) {
  std::string out = "[";
  if (u.inputs.empty()) {
    out += "()";
  } else {
    for (std::size_t i = 0; i < u.inputs.size(); ++i) {
      if (i) out += ", ";
      out += u.inputs[i];
    }
  }
  out += " ↝ ";
  if (u.outputs.empty()) {
    out += "()";
  } else {
    for (std::size_t i = 0; i < u.outputs.size(); ++i) {
      if (i) out += ", ";
      out += to_string(u.outputs[i]);
    }
  }
  return out + "]";
}

inline std::string to_string(const PT& p) {
  struct V {
    const PT& self;
    std::string operator()(const UpdatePT& u) const { return to_string(u); }
    std::string operator()(const IdPT&) const { return "Id"; }
    std::string operator()(const SerialPT& s) const {
      return detail::print_pt_child(s.a, 40) + " ∘ " +
             detail::print_pt_child(s.b, 41);
    }
    std::string operator()(const ParallelPT& s) const {
      return detail::print_pt_child(s.a, 30) + " ‖ " +
             detail::print_pt_child(s.b, 31);
    }
    std::string operator()(const FeedbackPT& f) const {
      return "fb(" + to_string(f.body) + ")";
    }
    std::string operator()(const NamedPT& n) const {
      if (n.args.empty()) return n.name;
      std::string out = n.name + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        out += n.args[i];
      }
      return out + ")";
    }
  };
  return std::visit(V{p}, p->rep());
}

// ---------------------------------------------------------------------------
// Expression typing

struct TypeError {
  std::string message;
  std::string where;  // port, block or expression context

  std::string str() const {
    if (where.empty()) return message;
    return message + " at " + where;
  }
};

struct InferResult {
  TypeTerm type;  // root transformer type (apply subst for display)
  Subst subst;
  std::map<const PTExpr*, TypeTerm> nodes;     // transformer type per node
  std::map<const PTExpr*, PT> named_bodies;    // per-occurrence clones
  std::optional<TypeError> error;
  bool ok() const { return !error.has_value(); }
};

namespace detail {

// Rebuilds stored type slots through a variable-renaming map, giving each
// reference to a definition its own type variables.
inline TypeTerm refresh_type(const TypeTerm& t, VarGen& gen,
                             std::map<int, TypeTerm>& renames) {
  if (t.is_var()) {
    auto it = renames.find(t.as_var().id);
    if (it == renames.end())
      it = renames.emplace(t.as_var().id, gen.fresh(t.as_var().classes)).first;
    return it->second;
  }
  if (t.is_prod()) {
    std::vector<TypeTerm> elems;
    for (const TypeTerm& e : t.as_prod().elems)
      elems.push_back(refresh_type(e, gen, renames));
    return TypeTerm(ProdType{std::move(elems)});
  }
  if (t.is_transformer())
    return t_transformer(refresh_type(*t.as_transformer().in, gen, renames),
                         refresh_type(*t.as_transformer().out, gen, renames));
  return t;
}

inline Sym refresh_sym(const Sym& e, VarGen& gen,
                       std::map<int, TypeTerm>& renames) {
  struct V {
    VarGen& gen;
    std::map<int, TypeTerm>& renames;
    Sym operator()(const LitE& n) const {
      return lit(n.value, refresh_type(n.type, gen, renames));
    }
    Sym operator()(const WireE& w) const { return mk(WireE{w}); }
    Sym operator()(const UnE& u) const {
      return mk(UnE{u.op, refresh_sym(u.a, gen, renames), u.cls});
    }
    Sym operator()(const BinE& b) const {
      return mk(BinE{b.op, refresh_sym(b.a, gen, renames),
                     refresh_sym(b.b, gen, renames), b.cls});
    }
    Sym operator()(const ConvE& c) const {
      return mk(ConvE{refresh_sym(c.a, gen, renames), c.target,
                      refresh_type(c.out_type, gen, renames)});
    }
    Sym operator()(const SBoolE& s) const {
      return mk(SBoolE{refresh_sym(s.a, gen, renames),
                       refresh_type(s.out_type, gen, renames)});
    }
    Sym operator()(const SCallE& c) const {
      std::vector<Sym> args;
      for (const Sym& a : c.args) args.push_back(refresh_sym(a, gen, renames));
      return mk(SCallE{c.f, std::move(args), c.cls});
    }
    Sym operator()(const IteE& i) const {
      return mk(IteE{refresh_sym(i.cond, gen, renames),
                     refresh_sym(i.then_v, gen, renames),
                     refresh_sym(i.else_v, gen, renames)});
    }
  };
  return std::visit(V{gen, renames}, e->rep());
}

inline PT refresh_pt(const PT& p, VarGen& gen,
                     std::map<int, TypeTerm>& renames) {
  struct V {
    VarGen& gen;
    std::map<int, TypeTerm>& renames;
    PT operator()(const UpdatePT& u) const {
      std::vector<Sym> outs;
      for (const Sym& e : u.outputs)
        outs.push_back(refresh_sym(e, gen, renames));
      return pt_update(u.inputs, std::move(outs));
    }
    PT operator()(const IdPT&) const { return pt_id(); }
    PT operator()(const SerialPT& s) const {
      return compose_serial(refresh_pt(s.a, gen, renames),
                            refresh_pt(s.b, gen, renames));
    }
    PT operator()(const ParallelPT& s) const {
      return compose_parallel(refresh_pt(s.a, gen, renames),
                              refresh_pt(s.b, gen, renames));
    }
    PT operator()(const FeedbackPT& f) const {
      return pt_feedback(refresh_pt(f.body, gen, renames));
    }
    PT operator()(const NamedPT& n) const { return mk_pt(NamedPT{n}); }
  };
  return std::visit(V{gen, renames}, p->rep());
}

struct InferCtx {
  const DefEnv& env;
  VarGen& gen;
  InferResult& out;
  std::map<std::string, TypeTerm> globals;  // dt and other free wires
  int depth = 0;
};

// Types a scalar expression. `locals` binds the enclosing update's
// inputs; free wires (dt) share one session variable via `globals`.
inline std::optional<TypeTerm> type_sym(const Sym& e,
                                        const std::map<std::string, TypeTerm>& locals,
                                        InferCtx& cx) {
  auto fail = [&](UnifyError err, const Sym& at) -> std::optional<TypeTerm> {
    if (!cx.out.error)
      cx.out.error = TypeError{err.detail, to_string(at)};
    return std::nullopt;
  };

  struct V {
    const std::map<std::string, TypeTerm>& locals;
    InferCtx& cx;
    decltype(fail)& report;
    const Sym& self;

    std::optional<TypeTerm> rec(const Sym& e) const {
      return type_sym(e, locals, cx);
    }

    std::optional<TypeTerm> operator()(const LitE& n) const { return n.type; }
    std::optional<TypeTerm> operator()(const WireE& w) const {
      auto it = locals.find(w.name);
      if (it != locals.end()) return it->second;
      auto g = cx.globals.find(w.name);
      if (g == cx.globals.end())
        g = cx.globals.emplace(w.name, cx.gen.fresh()).first;
      return g->second;
    }
    std::optional<TypeTerm> operator()(const UnE& u) const {
      auto a = rec(u.a);
      if (!a) return std::nullopt;
      if (u.op == UnOp::lnot) {
        if (auto err = unify(*a, t_bool(), cx.out.subst, cx.gen))
          return report(*err, self);
        return t_bool();
      }
      if (u.cls) {
        if (auto err = unify(*a, cx.gen.fresh(ClassSet::closure_of({*u.cls})),
                             cx.out.subst, cx.gen))
          return report(*err, self);
      }
      return a;
    }
    std::optional<TypeTerm> operator()(const BinE& b) const {
      if (b.op == BinOp::conj || b.op == BinOp::disj) {
        auto x = rec(b.a);
        if (!x) return std::nullopt;
        if (auto err = unify(*x, t_bool(), cx.out.subst, cx.gen))
          return report(*err, self);
        auto y = rec(b.b);
        if (!y) return std::nullopt;
        if (auto err = unify(*y, t_bool(), cx.out.subst, cx.gen))
          return report(*err, self);
        return t_bool();
      }
      auto x = rec(b.a);
      if (!x) return std::nullopt;
      auto y = rec(b.b);
      if (!y) return std::nullopt;
      if (auto err = unify(*x, *y, cx.out.subst, cx.gen))
        return report(*err, self);
      if (b.cls) {
        if (auto err = unify(*x, cx.gen.fresh(ClassSet::closure_of({*b.cls})),
                             cx.out.subst, cx.gen))
          return report(*err, self);
      }
      switch (b.op) {
        case BinOp::eq: case BinOp::ne: case BinOp::lt:
        case BinOp::le: case BinOp::gt: case BinOp::ge:
          return t_bool();
        default:
          return x;
      }
    }
    std::optional<TypeTerm> operator()(const ConvE& c) const {
      if (!rec(c.a)) return std::nullopt;
      return c.out_type;
    }
    std::optional<TypeTerm> operator()(const SBoolE& s) const {
      if (!rec(s.a)) return std::nullopt;
      return s.out_type;
    }
    std::optional<TypeTerm> operator()(const SCallE& c) const {
      // s_and/s_or/s_not tie arguments and result to one type; s_exp and
      // s_sin likewise (their bool instantiation stays uninterpreted).
      std::optional<TypeTerm> t;
      for (const Sym& a : c.args) {
        auto ta = rec(a);
        if (!ta) return std::nullopt;
        if (!t) {
          t = ta;
        } else if (auto err = unify(*t, *ta, cx.out.subst, cx.gen)) {
          return report(*err, self);
        }
      }
      if (!t) t = cx.gen.fresh();
      if (c.cls) {
        if (auto err = unify(*t, cx.gen.fresh(ClassSet::closure_of({*c.cls})),
                             cx.out.subst, cx.gen))
          return report(*err, self);
      }
      return t;
    }
    std::optional<TypeTerm> operator()(const IteE& i) const {
      auto c = rec(i.cond);
      if (!c) return std::nullopt;
      if (auto err = unify(*c, t_bool(), cx.out.subst, cx.gen))
        return report(*err, self);
      auto a = rec(i.then_v);
      if (!a) return std::nullopt;
      auto b = rec(i.else_v);
      if (!b) return std::nullopt;
      if (auto err = unify(*a, *b, cx.out.subst, cx.gen))
        return report(*err, self);
      return a;
    }
  };
  return std::visit(V{locals, cx, fail, e}, e->rep());
}

inline std::optional<TypeTerm> infer_node(const PT& p, InferCtx& cx) {
  struct V {
    const PT& self;
    InferCtx& cx;

    std::optional<TypeTerm> operator()(const UpdatePT& u) const {
      std::map<std::string, TypeTerm> locals;
      std::vector<TypeTerm> ins;
      for (const std::string& name : u.inputs) {
        TypeTerm v = cx.gen.fresh();
        locals.emplace(name, v);
        ins.push_back(v);
      }
      std::vector<TypeTerm> outs;
      for (const Sym& e : u.outputs) {
        auto t = type_sym(e, locals, cx);
        if (!t) return std::nullopt;
        outs.push_back(*t);
      }
      return t_transformer(t_tuple(ins), t_tuple(outs));
    }
    std::optional<TypeTerm> operator()(const IdPT&) const {
      TypeTerm v = cx.gen.fresh();
      return t_transformer(v, v);
    }
    std::optional<TypeTerm> operator()(const SerialPT& s) const {
      auto ta = infer_node(s.a, cx);
      if (!ta) return std::nullopt;
      auto tb = infer_node(s.b, cx);
      if (!tb) return std::nullopt;
      const auto& fa = ta->as_transformer();
      const auto& fb = tb->as_transformer();
      if (auto err = unify(*fa.out, *fb.in, cx.out.subst, cx.gen)) {
        if (!cx.out.error)
          cx.out.error =
              TypeError{err->detail, "serial composition interface"};
        return std::nullopt;
      }
      return t_transformer(*fa.in, *fb.out);
    }
    std::optional<TypeTerm> operator()(const ParallelPT& s) const {
      auto ta = infer_node(s.a, cx);
      if (!ta) return std::nullopt;
      auto tb = infer_node(s.b, cx);
      if (!tb) return std::nullopt;
      const auto& fa = ta->as_transformer();
      const auto& fb = tb->as_transformer();
      return t_transformer(
          t_tuple({cx.out.subst.apply(*fa.in), cx.out.subst.apply(*fb.in)}),
          t_tuple({cx.out.subst.apply(*fa.out), cx.out.subst.apply(*fb.out)}));
    }
    std::optional<TypeTerm> operator()(const FeedbackPT& f) const {
      auto tb = infer_node(f.body, cx);
      if (!tb) return std::nullopt;
      TypeTerm in = cx.out.subst.apply(*tb->as_transformer().in);
      TypeTerm out = cx.out.subst.apply(*tb->as_transformer().out);
      auto split = [](const TypeTerm& t)
          -> std::pair<TypeTerm, TypeTerm> {  // (first, rest)
        if (t.is_prod()) {
          const auto& es = t.as_prod().elems;
          std::vector<TypeTerm> rest(es.begin() + 1, es.end());
          return {es[0], t_tuple(rest)};
        }
        return {t, t_unit()};
      };
      if (in.is_ground() && in.as_ground().g == Ground::unit) {
        if (!cx.out.error)
          cx.out.error = TypeError{"feedback requires at least one input",
                                   to_string(self)};
        return std::nullopt;
      }
      auto [fed_in, rest_in] = split(in);
      auto [fed_out, rest_out] = split(out);
      if (auto err = unify(fed_in, fed_out, cx.out.subst, cx.gen)) {
        if (!cx.out.error)
          cx.out.error = TypeError{err->detail, "feedback interface"};
        return std::nullopt;
      }
      return t_transformer(rest_in, rest_out);
    }
    std::optional<TypeTerm> operator()(const NamedPT& n) const {
      auto it = cx.env.find(n.name);
      if (it == cx.env.end()) {
        if (!cx.out.error)
          cx.out.error = TypeError{"unknown definition " + n.name, ""};
        return std::nullopt;
      }
      if (cx.depth > 64) {
        if (!cx.out.error)
          cx.out.error = TypeError{"definition nesting too deep (cycle?)",
                                   n.name};
        return std::nullopt;
      }
      std::map<int, TypeTerm> renames;
      PT clone = refresh_pt(it->second.body, cx.gen, renames);
      cx.out.named_bodies.emplace(self.get(), clone);
      ++cx.depth;
      auto t = infer_node(clone, cx);
      --cx.depth;
      return t;
    }
  };
  auto t = std::visit(V{p, cx}, p->rep());
  if (t) cx.out.nodes.emplace(p.get(), *t);
  return t;
}

}  // namespace detail

inline InferResult infer(const PT& p, const DefEnv& env, VarGen& gen) {
  InferResult r;
  detail::InferCtx cx{env, gen, r, {}, 0};
  auto t = detail::infer_node(p, cx);
  if (t) {
    r.type = *t;
  } else if (!r.error) {
    r.error = TypeError{"type inference failed", ""};
  }
  return r;
}

// ---------------------------------------------------------------------------
// Widths and components (resolved types)

inline int width_of(const TypeTerm& t, const Subst& s) {
  TypeTerm w = s.apply(t);
  if (w.is_ground()) return w.as_ground().g == Ground::unit ? 0 : 1;
  if (w.is_prod()) {
    int n = 0;
    for (const TypeTerm& e : w.as_prod().elems) n += width_of(e, s);
    return n;
  }
  return 1;  // an unresolved variable is a scalar
}

inline std::vector<TypeTerm> components_of(const TypeTerm& t, const Subst& s) {
  TypeTerm w = s.apply(t);
  if (w.is_ground() && w.as_ground().g == Ground::unit) return {};
  if (w.is_prod()) {
    std::vector<TypeTerm> out;
    for (const TypeTerm& e : w.as_prod().elems) {
      auto sub = components_of(e, s);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  return {w};
}

// ---------------------------------------------------------------------------
// Structural fusion into a single update
//
// Serial substitutes the producer's output expressions for the consumer's
// inputs; parallel concatenates, renaming on collision; Id expands to a
// width-matched pass-through. Feedback keeps its body's interface (state
// threading). Requires a completed inference for widths and clones.

namespace detail {

struct FuseCtx {
  const InferResult& ti;
  int gensym = 0;
  std::string fresh_wire() { return "·w" + std::to_string(gensym++); }
};

inline std::optional<UpdatePT> fuse_node(const PT& p, FuseCtx& cx) {
  struct V {
    const PT& self;
    FuseCtx& cx;

    std::optional<UpdatePT> operator()(const UpdatePT& u) const { return u; }
    std::optional<UpdatePT> operator()(const IdPT&) const {
      auto it = cx.ti.nodes.find(self.get());
      if (it == cx.ti.nodes.end()) return std::nullopt;
      int w = width_of(*it->second.as_transformer().in, cx.ti.subst);
      UpdatePT u;
      for (int i = 0; i < w; ++i) {
        u.inputs.push_back(cx.fresh_wire());
        u.outputs.push_back(wire(u.inputs.back()));
      }
      return u;
    }
    std::optional<UpdatePT> operator()(const SerialPT& s) const {
      auto fa = fuse_node(s.a, cx);
      if (!fa) return std::nullopt;
      auto fb = fuse_node(s.b, cx);
      if (!fb) return std::nullopt;
      if (fa->outputs.size() != fb->inputs.size()) return std::nullopt;
      std::map<std::string, Sym> m;
      for (std::size_t i = 0; i < fb->inputs.size(); ++i)
        m.emplace(fb->inputs[i], fa->outputs[i]);
      UpdatePT u;
      u.inputs = fa->inputs;
      for (const Sym& e : fb->outputs)
        u.outputs.push_back(substitute_wires(e, m));
      return u;
    }
    std::optional<UpdatePT> operator()(const ParallelPT& s) const {
      auto fa = fuse_node(s.a, cx);
      if (!fa) return std::nullopt;
      auto fb = fuse_node(s.b, cx);
      if (!fb) return std::nullopt;
      std::set<std::string> taken(fa->inputs.begin(), fa->inputs.end());
      std::map<std::string, Sym> m;
      std::vector<std::string> b_inputs;
      for (const std::string& name : fb->inputs) {
        if (taken.count(name)) {
          std::string n2 = cx.fresh_wire();
          m.emplace(name, wire(n2));
          b_inputs.push_back(n2);
        } else {
          b_inputs.push_back(name);
        }
        taken.insert(b_inputs.back());
      }
      UpdatePT u;
      u.inputs = fa->inputs;
      u.inputs.insert(u.inputs.end(), b_inputs.begin(), b_inputs.end());
      u.outputs = fa->outputs;
      for (const Sym& e : fb->outputs)
        u.outputs.push_back(m.empty() ? e : substitute_wires(e, m));
      return u;
    }
    std::optional<UpdatePT> operator()(const FeedbackPT& f) const {
      return fuse_node(f.body, cx);
    }
    std::optional<UpdatePT> operator()(const NamedPT&) const {
      auto it = cx.ti.named_bodies.find(self.get());
      if (it == cx.ti.named_bodies.end()) return std::nullopt;
      return fuse_node(it->second, cx);
    }
  };
  return std::visit(V{p, cx}, p->rep());
}

}  // namespace detail

inline std::optional<UpdatePT> fuse_pt(const PT& p, const InferResult& ti) {
  detail::FuseCtx cx{ti, 0};
  return detail::fuse_node(p, cx);
}

// Whether output j of the update instantaneously depends on input i.
inline bool update_depends(const UpdatePT& u, std::size_t out_idx,
                           std::size_t in_idx) {
  if (out_idx >= u.outputs.size() || in_idx >= u.inputs.size()) return false;
  std::set<std::string> wires;
  collect_wires(u.outputs[out_idx], wires);
  return wires.count(u.inputs[in_idx]) != 0;
}

// Feedback is only sound when the fed-back pair is threaded through a
// state: output 0 must not instantaneously reference input 0.
inline std::optional<std::string> algebraic_loop(const PT& body,
                                                 const DefEnv& env) {
  VarGen gen;
  InferResult ti = infer(body, env, gen);
  if (!ti.ok()) return std::nullopt;  // typing errors reported elsewhere
  auto fused = fuse_pt(body, ti);
  if (!fused) return std::nullopt;
  if (fused->inputs.empty() || fused->outputs.empty()) return std::nullopt;
  if (update_depends(*fused, 0, 0))
    return "algebraic loop: fed-back output depends instantaneously on " +
           fused->inputs[0];
  return std::nullopt;
}

struct ComposeResult {
  PT pt;
  std::optional<std::string> error;
};

inline ComposeResult compose_feedback(PT body, const DefEnv& env = {}) {
  ComposeResult r{pt_feedback(body), std::nullopt};
  r.error = algebraic_loop(body, env);
  return r;
}

// ---------------------------------------------------------------------------
// Denotation
//
// Positional evaluation: inputs and outputs are flat value tuples matching
// the inferred widths. Feedback consumes the fed-back value as input 0 and
// returns the full body outputs (the caller threads state between steps).

struct DenoteCtx {
  const DefEnv& env;
  const InferResult& ti;
  Env globals;  // dt and friends
};

inline std::vector<Value> denote(const PT& p, const std::vector<Value>& in,
                                 DenoteCtx& cx) {
  struct V {
    const PT& self;
    const std::vector<Value>& in;
    DenoteCtx& cx;

    std::vector<Value> operator()(const UpdatePT& u) const {
      if (in.size() != u.inputs.size())
        throw EvalError("update arity mismatch: got " +
                        std::to_string(in.size()) + " inputs, expected " +
                        std::to_string(u.inputs.size()));
      Env env = cx.globals;
      for (std::size_t i = 0; i < u.inputs.size(); ++i)
        env[u.inputs[i]] = in[i];
      std::vector<Value> out;
      for (const Sym& e : u.outputs) out.push_back(eval_sym(e, env));
      return out;
    }
    std::vector<Value> operator()(const IdPT&) const { return in; }
    std::vector<Value> operator()(const SerialPT& s) const {
      return denote(s.b, denote(s.a, in, cx), cx);
    }
    std::vector<Value> operator()(const ParallelPT& s) const {
      auto it = cx.ti.nodes.find(s.a.get());
      if (it == cx.ti.nodes.end())
        throw EvalError("expression was not typed before evaluation");
      std::size_t wa = static_cast<std::size_t>(
          width_of(*it->second.as_transformer().in, cx.ti.subst));
      if (wa > in.size()) throw EvalError("parallel split out of range");
      std::vector<Value> left(in.begin(), in.begin() + wa);
      std::vector<Value> right(in.begin() + wa, in.end());
      std::vector<Value> out = denote(s.a, left, cx);
      std::vector<Value> rb = denote(s.b, right, cx);
      out.insert(out.end(), rb.begin(), rb.end());
      return out;
    }
    std::vector<Value> operator()(const FeedbackPT& f) const {
      return denote(f.body, in, cx);
    }
    std::vector<Value> operator()(const NamedPT& n) const {
      auto it = cx.ti.named_bodies.find(self.get());
      if (it == cx.ti.named_bodies.end())
        throw EvalError("unknown definition " + n.name + " at evaluation");
      return denote(it->second, in, cx);
    }
  };
  return std::visit(V{p, in, cx}, p->rep());
}

// ---------------------------------------------------------------------------
// Free type parameters
//
// Variables that occur in a definition's body (its literals and conversion
// slots, including through referenced definitions) but not in its
// inferred transformer type. These are the unsound danglers that -const
// turns into value parameters.

namespace detail {

inline void body_type_vars(const PT& p, const InferResult& ti,
                           std::vector<int>& out, std::set<int>& seen) {
  struct V {
    const PT& self;
    const InferResult& ti;
    std::vector<int>& out;
    std::set<int>& seen;

    void sym_vars(const Sym& e) const {
      struct SV {
        const InferResult& ti;
        std::vector<int>& out;
        std::set<int>& seen;
        void rec(const Sym& e) const { std::visit(SV{ti, out, seen}, e->rep()); }
        void operator()(const LitE& n) const {
          collect_vars(n.type, ti.subst, out, seen);
        }
        void operator()(const WireE&) const {}
        void operator()(const UnE& u) const { rec(u.a); }
        void operator()(const BinE& b) const { rec(b.a); rec(b.b); }
        void operator()(const ConvE& c) const {
          rec(c.a);
          collect_vars(c.out_type, ti.subst, out, seen);
        }
        void operator()(const SBoolE& s) const {
          rec(s.a);
          collect_vars(s.out_type, ti.subst, out, seen);
        }
        void operator()(const SCallE& c) const {
          for (const Sym& a : c.args) rec(a);
        }
        void operator()(const IteE& i) const {
          rec(i.cond); rec(i.then_v); rec(i.else_v);
        }
      };
      std::visit(SV{ti, out, seen}, e->rep());
    }

    void operator()(const UpdatePT& u) const {
      for (const Sym& e : u.outputs) sym_vars(e);
    }
    void operator()(const IdPT&) const {}
    void operator()(const SerialPT& s) const {
      body_type_vars(s.a, ti, out, seen);
      body_type_vars(s.b, ti, out, seen);
    }
    void operator()(const ParallelPT& s) const {
      body_type_vars(s.a, ti, out, seen);
      body_type_vars(s.b, ti, out, seen);
    }
    void operator()(const FeedbackPT& f) const {
      body_type_vars(f.body, ti, out, seen);
    }
    void operator()(const NamedPT&) const {
      auto it = ti.named_bodies.find(self.get());
      if (it != ti.named_bodies.end()) body_type_vars(it->second, ti, out, seen);
    }
  };
  std::visit(V{p, ti, out, seen}, p->rep());
}

}  // namespace detail

// Ordered by first occurrence in the body.
inline std::vector<int> free_type_params(const PT& body,
                                         const InferResult& ti) {
  std::vector<int> body_vars;
  std::set<int> seen;
  detail::body_type_vars(body, ti, body_vars, seen);
  std::set<int> in_signature;
  for (int v : free_vars(ti.type, ti.subst)) in_signature.insert(v);
  std::vector<int> out;
  for (int v : body_vars)
    if (!in_signature.count(v)) out.push_back(v);
  return out;
}

}  // namespace bdt

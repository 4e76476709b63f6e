#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "bdt/simplify.hpp"

using namespace bdt;

namespace {

std::string folded(const Sym& e, const Subst& s = {}) {
  return to_string(fold_constants(e, s));
}

// Rebuilds e with the k-th node (preorder) replaced by its own fold;
// used to check that folding inner subtrees first cannot change the
// final result of the full fold.
Sym fold_subtree_at(const Sym& e, int& k, const Subst& s) {
  if (k-- == 0) return fold_constants(e, s);
  struct V {
    int& k;
    const Subst& s;
    Sym rec(const Sym& e) const { return fold_subtree_at(e, k, s); }
    Sym operator()(const LitE& l) const { return lit(l.value, l.type); }
    Sym operator()(const WireE& w) const { return mk(WireE{w}); }
    Sym operator()(const UnE& u) const {
      return mk(UnE{u.op, rec(u.a), u.cls});
    }
    Sym operator()(const BinE& b) const {
      Sym a = rec(b.a);
      return mk(BinE{b.op, a, rec(b.b), b.cls});
    }
    Sym operator()(const ConvE& c) const {
      return mk(ConvE{rec(c.a), c.target, c.out_type});
    }
    Sym operator()(const SBoolE& sb) const {
      return mk(SBoolE{rec(sb.a), sb.out_type});
    }
    Sym operator()(const SCallE& c) const {
      std::vector<Sym> args;
      for (const Sym& a : c.args) args.push_back(rec(a));
      return mk(SCallE{c.f, std::move(args), c.cls});
    }
    Sym operator()(const IteE& i) const {
      Sym c = rec(i.cond);
      Sym t = rec(i.then_v);
      return mk(IteE{c, t, rec(i.else_v)});
    }
  };
  return std::visit(V{k, s}, e->rep());
}

}  // namespace

TEST_CASE("arithmetic on variables stays symbolic until grounded") {
  VarGen gen;
  TypeTerm a = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
  Sym e = mk(BinE{BinOp::add, lit(Value{1.0}, a), lit(Value{3.0}, a),
                  ClassId::simulink});

  Subst open;
  CHECK(folded(e, open) == "1 + 3");  // no fixed meaning at 'a

  Subst closed;
  closed.bind(a.as_var().id, t_real());
  CHECK(folded(e, closed) == "4");

  Subst at_bool;
  at_bool.bind(a.as_var().id, t_bool());
  // the literals rewrite to their boolean reading, but + at bool is
  // uninterpreted: nothing may fold
  CHECK(folded(e, at_bool) == "True + True");
}

TEST_CASE("wire-containing trees fold only their closed parts") {
  Sym e = add(mul(lit(Value{2.0}, t_real()), lit(Value{3.0}, t_real())),
              wire("x"));
  CHECK(folded(e) == "6 + x");

  Sym all = add(mul(lit(Value{2.0}, t_real()), lit(Value{3.0}, t_real())),
                lit(Value{1.0}, t_real()));
  CHECK(folded(all) == "7");
}

TEST_CASE("zero tests respect the open-world class discipline") {
  VarGen gen;
  Subst s;

  // nonzero is only guaranteed by numeral_nzero or a ground type
  TypeTerm nz = gen.fresh(ClassSet::closure_of({ClassId::numeral_nzero}));
  TypeTerm zt = gen.fresh(ClassSet::closure_of({ClassId::numeral_nzero}));
  Sym sure = mk(BinE{BinOp::ne, lit(Value{3.0}, nz), lit(Value{0.0}, zt),
                     std::nullopt});
  CHECK(folded(sure, s) == "True");

  TypeTerm num = gen.fresh(ClassSet::closure_of({ClassId::numeral}));
  TypeTerm zt2 = gen.fresh(ClassSet::closure_of({ClassId::numeral_nzero}));
  Sym maybe = mk(BinE{BinOp::ne, lit(Value{3.0}, num), lit(Value{0.0}, zt2),
                      std::nullopt});
  CHECK(folded(maybe, s) == "3≠0");  // 3 could denote zero at some instance

  Sym ground = mk(BinE{BinOp::ne, lit(Value{3.0}, t_real()),
                       lit(Value{0.0}, t_real()), std::nullopt});
  CHECK(folded(ground, s) == "True");

  Sym zero_eq = mk(BinE{BinOp::eq, lit(Value{0.0}, t_real()),
                        lit(Value{0.0}, t_real()), std::nullopt});
  CHECK(folded(zero_eq, s) == "True");
}

TEST_CASE("equality of two nonzero literals never folds at a variable") {
  VarGen gen;
  Subst s;
  TypeTerm a = gen.fresh(ClassSet::closure_of({ClassId::numeral}));
  Sym e = mk(BinE{BinOp::ne, lit(Value{1.0}, a), lit(Value{2.0}, a),
                  std::nullopt});
  // at bool both 1 and 2 denote True, so 1≠2 would be False there
  CHECK(folded(e, s) == "1≠2");

  Subst at_real;
  at_real.bind(a.as_var().id, t_real());
  CHECK(folded(e, at_real) == "True");

  Subst at_bool;
  at_bool.bind(a.as_var().id, t_bool());
  CHECK(folded(e, at_bool) == "False");
}

TEST_CASE("comparisons against boolean literals collapse") {
  Sym x = wire("x");
  CHECK(folded(mk(BinE{BinOp::eq, x, lit(Value{true}, t_bool()),
                       std::nullopt})) == "x");
  CHECK(folded(mk(BinE{BinOp::ne, x, lit(Value{false}, t_bool()),
                       std::nullopt})) == "x");
  CHECK(folded(mk(BinE{BinOp::eq, x, lit(Value{false}, t_bool()),
                       std::nullopt})) == "¬x");
  CHECK(folded(mk(BinE{BinOp::ne, lit(Value{true}, t_bool()), x,
                       std::nullopt})) == "¬x");
}

TEST_CASE("boolean algebra absorbs literals") {
  Sym x = wire("x");
  Sym t = lit(Value{true}, t_bool());
  Sym f = lit(Value{false}, t_bool());
  CHECK(folded(conj(t, x)) == "x");
  CHECK(folded(conj(x, t)) == "x");
  CHECK(folded(conj(x, f)) == "False");
  CHECK(folded(disj(f, x)) == "x");
  CHECK(folded(disj(x, t)) == "True");
  CHECK(folded(lnot(lnot(x))) == "x");
  CHECK(folded(lnot(t)) == "False");
  CHECK(folded(lnot(f)) == "True");
}

TEST_CASE("additive and multiplicative units vanish only at ground type") {
  VarGen gen;
  Subst s;

  Sym ground_add = add(lit(Value{0.0}, t_real()), wire("x"));
  CHECK(folded(ground_add, s) == "x");
  Sym ground_mul = mul(wire("x"), lit(Value{1.0}, t_real()));
  CHECK(folded(ground_mul, s) == "x");

  TypeTerm a = gen.fresh(ClassSet::closure_of({ClassId::numeral}));
  Sym open_mul = mk(BinE{BinOp::mul, lit(Value{1.0}, a), wire("x"),
                         ClassId::power});
  CHECK(folded(open_mul, s) == "1·x");  // 1 is not a unit at every instance

  Subst closed;
  closed.bind(a.as_var().id, t_int());
  CHECK(folded(open_mul, closed) == "x");
}

TEST_CASE("conversions to the operand's own type disappear") {
  Sym same = conv(lit(Value{2.0}, t_real()), Ground::real, t_real());
  CHECK(folded(same) == "2");

  Sym cross = conv(lit(Value{2.0}, t_int()), Ground::real, t_real());
  CHECK(folded(cross) == "2");  // wire-free: evaluates through the cast

  Sym on_wire = conv(wire("x"), Ground::real, t_real());
  CHECK(folded(on_wire) == "conv(x):real");

  VarGen gen;
  TypeTerm v = gen.fresh();
  Subst s;
  s.bind(v.as_var().id, t_real());
  Sym inferred = conv(wire("x"), std::nullopt, v);
  Sym inner = conv(lit(Value{3.0}, t_real()), std::nullopt, v);
  CHECK(folded(inferred, s) == "conv(x)");
  CHECK(folded(inner, s) == "3");  // out type resolves to the child's type
}

TEST_CASE("boolean coercion folds by the zero fact") {
  VarGen gen;
  Subst s;
  TypeTerm in1 = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
  TypeTerm out1 = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
  CHECK(folded(s_bool(lit(Value{2.0}, in1), out1), s) == "1");

  TypeTerm in2 = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
  TypeTerm out2 = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
  CHECK(folded(s_bool(lit(Value{0.0}, in2), out2), s) == "0");

  TypeTerm out3 = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
  CHECK(folded(s_bool(lit(Value{true}, t_bool()), out3), s) == "1");

  // both sides ground bool: the coercion is the identity
  CHECK(folded(s_bool(lit(Value{true}, t_bool()), t_bool()), s) == "True");
  CHECK(folded(s_bool(wire("x"), t_bool()), s) == "s_bool(x)");
}

TEST_CASE("conditionals fold on a decided condition") {
  Sym a = wire("a");
  Sym b = wire("b");
  CHECK(folded(ite(lit(Value{true}, t_bool()), a, b)) == "a");
  CHECK(folded(ite(lit(Value{false}, t_bool()), a, b)) == "b");
  CHECK(folded(ite(lnot(lit(Value{false}, t_bool())), a, b)) == "a");
  Sym open = ite(wire("c"), a, b);
  CHECK(folded(open) == "if c then a else b");
}

TEST_CASE("folding is idempotent") {
  VarGen gen;
  Subst s;
  TypeTerm a = gen.fresh(ClassSet::closure_of({ClassId::numeral}));
  std::vector<Sym> samples = {
      add(mul(lit(Value{2.0}, t_real()), wire("x")), lit(Value{0.0}, t_real())),
      mk(BinE{BinOp::ne, lit(Value{1.0}, a), lit(Value{2.0}, a), std::nullopt}),
      conj(cmp(BinOp::ne, wire("x"), lit(Value{0.0}, t_real())),
           lit(Value{true}, t_bool())),
      ite(lnot(lnot(wire("c"))), wire("p"), lit(Value{3.0}, t_real())),
      s_bool(lit(Value{2.0}, a), gen.fresh()),
  };
  for (const Sym& e : samples) {
    Sym once = fold_constants(e, s);
    Sym twice = fold_constants(once, s);
    CHECK(to_string(once) == to_string(twice));
  }
}

TEST_CASE("inner-first folding is confluent with whole-tree folding") {
  VarGen gen;
  Subst s;
  TypeTerm a = gen.fresh(ClassSet::closure_of({ClassId::numeral}));
  TypeTerm nz = gen.fresh(ClassSet::closure_of({ClassId::numeral_nzero}));
  std::vector<Sym> samples = {
      add(add(lit(Value{1.0}, t_real()), lit(Value{3.0}, t_real())),
          mul(wire("x"), lit(Value{1.0}, t_real()))),
      conj(mk(BinE{BinOp::ne, lit(Value{3.0}, nz), lit(Value{0.0}, nz),
               std::nullopt}),
           cmp(BinOp::ne, wire("y"), lit(Value{0.0}, t_real()))),
      ite(lnot(lit(Value{false}, t_bool())),
          add(lit(Value{1.0}, a), lit(Value{3.0}, a)),
          lit(Value{0.0}, a)),
      mk(BinE{BinOp::eq, lnot(lnot(wire("x"))), lit(Value{true}, t_bool()),
              std::nullopt}),
  };
  for (const Sym& e : samples) {
    std::string direct = to_string(fold_constants(e, s));
    int nodes = count_sym_nodes(e);
    for (int k = 0; k < nodes; ++k) {
      int idx = k;
      Sym partial = fold_subtree_at(e, idx, s);
      CHECK(to_string(fold_constants(partial, s)) == direct);
    }
  }
}

TEST_CASE("normalization renames inputs along the shared alphabet") {
  UpdatePT fused;
  fused.inputs = {"·w0", "·w1", "·w2"};
  fused.outputs = {wire("·w1"), add(wire("·w2"), wire("·w0"))};
  Subst s;

  NormalizedUpdate plain = normalize_update(fused, s, /*state_count=*/1);
  CHECK(plain.update.inputs == std::vector<std::string>{"x", "y", "s"});
  CHECK(plain.external_count == 2);
  CHECK(to_string(plain.update.outputs[0]) == "y");
  CHECK(to_string(plain.update.outputs[1]) == "s + x");

  // value parameters of the definition consume leading positions
  NormalizedUpdate shifted = normalize_update(fused, s, 1, /*name_start=*/2);
  CHECK(shifted.update.inputs == std::vector<std::string>{"z", "u", "s"});

  UpdatePT multi;
  multi.inputs = {"a", "b", "c"};
  multi.outputs = {wire("a")};
  NormalizedUpdate states = normalize_update(multi, s, 2);
  CHECK(states.update.inputs == std::vector<std::string>{"x", "s1", "s2"});

  CHECK(positional_name(6) == "p7");
  CHECK(positional_name(5) == "w");
}

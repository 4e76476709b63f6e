#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "bdt/types.hpp"

using namespace bdt;

TEST_CASE("tuple construction flattens and degenerates") {
  CHECK(t_tuple({}).is_ground());
  CHECK(t_tuple({}).as_ground().g == Ground::unit);

  TypeTerm one = t_tuple({t_real()});
  CHECK(one.is_ground());
  CHECK(one.as_ground().g == Ground::real);

  TypeTerm nested = t_tuple({t_bool(), t_tuple({t_real(), t_int()})});
  REQUIRE(nested.is_prod());
  const auto& elems = nested.as_prod().elems;
  REQUIRE(elems.size() == 3);
  CHECK(elems[0].as_ground().g == Ground::boolean);
  CHECK(elems[1].as_ground().g == Ground::real);
  CHECK(elems[2].as_ground().g == Ground::integer);
}

TEST_CASE("unify reports ground mismatches by name") {
  Subst s;
  VarGen gen;
  auto err = unify(t_bool(), t_real(), s, gen);
  REQUIRE(err.has_value());
  CHECK(err->kind == UnifyError::Kind::mismatch);
  CHECK(err->detail == "bool vs real");
}

TEST_CASE("unify merges class constraints of two variables") {
  Subst s;
  VarGen gen;
  TypeTerm a = gen.fresh(ClassSet::single(ClassId::numeral));
  TypeTerm b = gen.fresh(ClassSet::single(ClassId::ord));
  REQUIRE_FALSE(unify(a, b, s, gen).has_value());

  TypeTerm ra = s.apply(a);
  TypeTerm rb = s.apply(b);
  REQUIRE(ra.is_var());
  REQUIRE(rb.is_var());
  CHECK(ra.as_var().id == rb.as_var().id);
  CHECK(ra.as_var().classes.contains(ClassId::numeral));
  CHECK(ra.as_var().classes.contains(ClassId::plus));
  CHECK(ra.as_var().classes.contains(ClassId::ord));
  CHECK(ra.as_var().classes.display() == "{numeral,ord}");

  // binding the merged variable must respect both constraints
  auto err = unify(a, t_bool(), s, gen);
  REQUIRE(err.has_value());
  CHECK(err->kind == UnifyError::Kind::class_violation);
}

TEST_CASE("unify checks the instance table when grounding a variable") {
  Subst s;
  VarGen gen;

  TypeTerm p = gen.fresh(ClassSet::single(ClassId::plus));
  auto err = unify(p, t_bool(), s, gen);
  REQUIRE(err.has_value());
  CHECK(err->kind == UnifyError::Kind::class_violation);
  CHECK(err->detail == "bool is not an instance of plus");

  // closure of numeral includes plus, so bool fails on the closure too
  TypeTerm n = gen.fresh(ClassSet::single(ClassId::numeral));
  auto err2 = unify(n, t_bool(), s, gen);
  REQUIRE(err2.has_value());
  CHECK(err2->detail.find("plus") != std::string::npos);

  // bool is an instance of the zero-test constraint
  TypeTerm z = gen.fresh(ClassSet::single(ClassId::numeral_nzero));
  CHECK_FALSE(unify(z, t_bool(), s, gen).has_value());
  CHECK(s.apply(z).as_ground().g == Ground::boolean);

  // int is not an instance of simulink
  TypeTerm g = gen.fresh(ClassSet::single(ClassId::simulink));
  auto err3 = unify(g, t_int(), s, gen);
  REQUIRE(err3.has_value());
  CHECK(err3->detail == "int is not an instance of simulink");
}

TEST_CASE("occurs check rejects infinite types") {
  Subst s;
  VarGen gen;
  TypeTerm a = gen.fresh();
  TypeTerm t = t_tuple({a, t_real()});
  auto err = unify(a, t, s, gen);
  REQUIRE(err.has_value());
  CHECK(err->kind == UnifyError::Kind::occurs);
}

TEST_CASE("unify descends products and transformers elementwise") {
  Subst s;
  VarGen gen;
  TypeTerm a = gen.fresh();
  TypeTerm b = gen.fresh();

  REQUIRE_FALSE(
      unify(t_tuple({a, t_bool()}), t_tuple({t_real(), b}), s, gen)
          .has_value());
  CHECK(s.apply(a).as_ground().g == Ground::real);
  CHECK(s.apply(b).as_ground().g == Ground::boolean);

  auto width = unify(t_tuple({t_real(), t_real()}),
                     t_tuple({t_real(), t_real(), t_real()}), s, gen);
  REQUIRE(width.has_value());
  CHECK(width->detail.find("width 2 vs 3") != std::string::npos);

  TypeTerm c = gen.fresh();
  REQUIRE_FALSE(unify(t_transformer(c, t_bool()),
                      t_transformer(t_int(), t_bool()), s, gen)
                    .has_value());
  CHECK(s.apply(c).as_ground().g == Ground::integer);
}

TEST_CASE("instantiate grounds every remaining variable, checking classes") {
  Subst s;
  VarGen gen;
  TypeTerm a = gen.fresh(ClassSet::single(ClassId::simulink));
  TypeTerm b = gen.fresh();
  TypeTerm t = t_transformer(a, t_tuple({a, b}));

  Subst ok = s;
  REQUIRE_FALSE(instantiate(t, Ground::real, ok).has_value());
  CHECK(ok.apply(a).as_ground().g == Ground::real);
  CHECK(ok.apply(b).as_ground().g == Ground::real);

  Subst bad = s;
  auto err = instantiate(t, Ground::integer, bad);
  REQUIRE(err.has_value());
  CHECK(err->detail.find("int is not an instance of simulink") !=
        std::string::npos);

  // ground parts are left alone
  Subst mixed = s;
  TypeTerm half = t_tuple({t_bool(), gen.fresh()});
  REQUIRE_FALSE(instantiate(half, Ground::real, mixed).has_value());
  CHECK(mixed.apply(half).as_prod().elems[0].as_ground().g ==
        Ground::boolean);
}

TEST_CASE("free_vars lists first occurrences once, after substitution") {
  Subst s;
  VarGen gen;
  TypeTerm a = gen.fresh();
  TypeTerm b = gen.fresh();
  TypeTerm c = gen.fresh();
  TypeTerm t = t_transformer(t_tuple({a, b}), t_tuple({b, a, c}));

  auto vs = free_vars(t, s);
  CHECK(vs == std::vector<int>{a.as_var().id, b.as_var().id, c.as_var().id});

  s.bind(b.as_var().id, t_real());
  auto vs2 = free_vars(t, s);
  CHECK(vs2 == std::vector<int>{a.as_var().id, c.as_var().id});
}

TEST_CASE("printer names variables in appearance order, annotating once") {
  Subst s;
  VarGen gen;
  TypeTerm a = gen.fresh(ClassSet::single(ClassId::simulink));
  TypeTerm t = t_transformer(a, t_tuple({a, a}));

  TypePrinter p;
  CHECK(p.print(s.apply(t)) == "'a:simulink ⇒° 'a × 'a");

  TypePrinter q;
  TypeTerm b = gen.fresh();
  TypeTerm u = t_transformer(t_tuple({b, a}), t_tuple({b, a}));
  CHECK(q.print(s.apply(u)) == "'a × 'b:simulink ⇒° 'a × 'b");

  TypePrinter r;
  CHECK(r.print(t_transformer(t_real(), t_tuple({t_real(), t_real()}))) ==
        "real ⇒° real × real");

  // a transformer nested inside a product is parenthesized
  TypePrinter n;
  CHECK(n.print(t_tuple({t_transformer(t_unit(), t_bool()), t_real()})) ==
        "(unit ⇒° bool) × real");
}

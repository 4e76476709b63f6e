#pragma once

// Type terms over ground types, constrained type variables, products and
// transformer types, with unification and ground instantiation.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "bdt/classes.hpp"

namespace bdt {

class TypeTerm;

struct GroundType {
  Ground g;
};

struct VarType {
  int id;
  ClassSet classes;
};

// Invariant: elems.size() != 1. The empty product is written as unit.
struct ProdType {
  std::vector<TypeTerm> elems;
};

struct TransformerType {
  std::shared_ptr<const TypeTerm> in;
  std::shared_ptr<const TypeTerm> out;
};

class TypeTerm {
 public:
  using Rep = std::variant<GroundType, VarType, ProdType, TransformerType>;

  TypeTerm() : rep_(std::make_shared<Rep>(GroundType{Ground::unit})) {}
  explicit TypeTerm(Rep rep) : rep_(std::make_shared<Rep>(std::move(rep))) {}

  const Rep& rep() const { return *rep_; }

  bool is_ground() const { return std::holds_alternative<GroundType>(*rep_); }
  bool is_var() const { return std::holds_alternative<VarType>(*rep_); }
  bool is_prod() const { return std::holds_alternative<ProdType>(*rep_); }
  bool is_transformer() const {
    return std::holds_alternative<TransformerType>(*rep_);
  }

  const GroundType& as_ground() const { return std::get<GroundType>(*rep_); }
  const VarType& as_var() const { return std::get<VarType>(*rep_); }
  const ProdType& as_prod() const { return std::get<ProdType>(*rep_); }
  const TransformerType& as_transformer() const {
    return std::get<TransformerType>(*rep_);
  }

 private:
  std::shared_ptr<const Rep> rep_;
};

inline TypeTerm t_ground(Ground g) { return TypeTerm(GroundType{g}); }
inline TypeTerm t_bool() { return t_ground(Ground::boolean); }
inline TypeTerm t_real() { return t_ground(Ground::real); }
inline TypeTerm t_int() { return t_ground(Ground::integer); }
inline TypeTerm t_unit() { return t_ground(Ground::unit); }

inline TypeTerm t_var(int id, ClassSet cs = {}) {
  return TypeTerm(VarType{id, cs});
}

inline TypeTerm t_transformer(TypeTerm in, TypeTerm out) {
  return TypeTerm(TransformerType{
      std::make_shared<const TypeTerm>(std::move(in)),
      std::make_shared<const TypeTerm>(std::move(out))});
}

// Tuple smart constructor: flattens nested products, absorbs unit, and
// collapses singleton tuples, so products always have length >= 2.
inline TypeTerm t_tuple(const std::vector<TypeTerm>& parts) {
  std::vector<TypeTerm> flat;
  for (const TypeTerm& p : parts) {
    if (p.is_prod()) {
      for (const TypeTerm& e : p.as_prod().elems) flat.push_back(e);
    } else if (p.is_ground() && p.as_ground().g == Ground::unit) {
      // dropped
    } else {
      flat.push_back(p);
    }
  }
  if (flat.empty()) return t_unit();
  if (flat.size() == 1) return flat[0];
  return TypeTerm(ProdType{std::move(flat)});
}

// Fresh variable supply. Sessions share one counter; display names are
// assigned per printing session, so absolute ids never surface.
class VarGen {
 public:
  TypeTerm fresh(ClassSet cs = {}) { return t_var(next_++, cs); }
  int next_id() const { return next_; }

 private:
  int next_ = 0;
};

// ---------------------------------------------------------------------------
// Substitution

struct UnifyError {
  enum class Kind { mismatch, class_violation, occurs };
  Kind kind;
  std::string detail;
};

class Subst {
 public:
  // Resolves the outermost variable chain; does not descend into products.
  TypeTerm walk(TypeTerm t) const {
    while (t.is_var()) {
      auto it = map_.find(t.as_var().id);
      if (it == map_.end()) return t;
      t = it->second;
    }
    return t;
  }

  // Full structural application.
  TypeTerm apply(const TypeTerm& t) const {
    TypeTerm w = walk(t);
    if (w.is_prod()) {
      std::vector<TypeTerm> elems;
      for (const TypeTerm& e : w.as_prod().elems) elems.push_back(apply(e));
      return TypeTerm(ProdType{std::move(elems)});
    }
    if (w.is_transformer()) {
      return t_transformer(apply(*w.as_transformer().in),
                           apply(*w.as_transformer().out));
    }
    return w;
  }

  void bind(int id, TypeTerm t) { map_[id] = std::move(t); }

  bool bound(int id) const { return map_.count(id) != 0; }

 private:
  std::map<int, TypeTerm> map_;
};

inline bool occurs_in(int id, const TypeTerm& t, const Subst& s) {
  TypeTerm w = s.walk(t);
  if (w.is_var()) return w.as_var().id == id;
  if (w.is_prod()) {
    for (const TypeTerm& e : w.as_prod().elems)
      if (occurs_in(id, e, s)) return true;
    return false;
  }
  if (w.is_transformer()) {
    return occurs_in(id, *w.as_transformer().in, s) ||
           occurs_in(id, *w.as_transformer().out, s);
  }
  return false;
}

std::string to_string(const TypeTerm& t);  // below

// Binds a constrained variable to a ground type, checking the instance
// table. Returns the missing classes on failure.
inline std::optional<UnifyError> check_instance(const ClassSet& cs, Ground g) {
  if (cs.subset_of(instances_of(g))) return std::nullopt;
  std::string missing;
  for (ClassId c : cs.members()) {
    if (!instances_of(g).contains(c)) {
      if (!missing.empty()) missing += ",";
      missing += to_string(c);
    }
  }
  return UnifyError{UnifyError::Kind::class_violation,
                    std::string(to_string(g)) + " is not an instance of " +
                        missing};
}

// Unification. On success extends s; on failure returns the error and
// leaves s in a partially extended state (callers treat that as fatal).
inline std::optional<UnifyError> unify(const TypeTerm& a, const TypeTerm& b,
                                       Subst& s, VarGen& vars) {
  TypeTerm x = s.walk(a);
  TypeTerm y = s.walk(b);

  if (x.is_var() && y.is_var()) {
    const VarType& vx = x.as_var();
    const VarType& vy = y.as_var();
    if (vx.id == vy.id) return std::nullopt;
    ClassSet merged = vx.classes.union_with(vy.classes);
    if (merged == vy.classes) {
      s.bind(vx.id, y);
    } else if (merged == vx.classes) {
      s.bind(vy.id, x);
    } else {
      TypeTerm fresh = vars.fresh(merged);
      s.bind(vx.id, fresh);
      s.bind(vy.id, fresh);
    }
    return std::nullopt;
  }

  if (x.is_var() || y.is_var()) {
    const TypeTerm& var = x.is_var() ? x : y;
    const TypeTerm& other = x.is_var() ? y : x;
    const VarType& v = var.as_var();
    if (occurs_in(v.id, other, s))
      return UnifyError{UnifyError::Kind::occurs,
                        "occurs check failed for " + to_string(var) + " in " +
                            to_string(other)};
    if (!v.classes.empty()) {
      if (other.is_ground()) {
        if (auto err = check_instance(v.classes, other.as_ground().g))
          return err;
      } else {
        return UnifyError{UnifyError::Kind::class_violation,
                          "class constraints " + v.classes.display() +
                              " cannot apply to " + to_string(other)};
      }
    }
    s.bind(v.id, other);
    return std::nullopt;
  }

  if (x.is_ground() && y.is_ground()) {
    if (x.as_ground().g == y.as_ground().g) return std::nullopt;
    return UnifyError{UnifyError::Kind::mismatch,
                      std::string(to_string(x.as_ground().g)) + " vs " +
                          to_string(y.as_ground().g)};
  }

  if (x.is_prod() && y.is_prod()) {
    const auto& ex = x.as_prod().elems;
    const auto& ey = y.as_prod().elems;
    if (ex.size() != ey.size())
      return UnifyError{UnifyError::Kind::mismatch,
                        to_string(x) + " vs " + to_string(y) +
                            " (width " + std::to_string(ex.size()) + " vs " +
                            std::to_string(ey.size()) + ")"};
    for (std::size_t i = 0; i < ex.size(); ++i)
      if (auto err = unify(ex[i], ey[i], s, vars)) return err;
    return std::nullopt;
  }

  if (x.is_transformer() && y.is_transformer()) {
    if (auto err =
            unify(*x.as_transformer().in, *y.as_transformer().in, s, vars))
      return err;
    return unify(*x.as_transformer().out, *y.as_transformer().out, s, vars);
  }

  return UnifyError{UnifyError::Kind::mismatch,
                    to_string(x) + " vs " + to_string(y)};
}

// Instantiates every variable in t at the given ground type, checking the
// instance table.
inline std::optional<UnifyError> instantiate(const TypeTerm& t, Ground g,
                                             Subst& s) {
  TypeTerm w = s.walk(t);
  if (w.is_var()) {
    if (auto err = check_instance(w.as_var().classes, g)) {
      err->detail = "type variable " + to_string(w) + ": " + err->detail;
      return err;
    }
    s.bind(w.as_var().id, t_ground(g));
    return std::nullopt;
  }
  if (w.is_prod()) {
    for (const TypeTerm& e : w.as_prod().elems)
      if (auto err = instantiate(e, g, s)) return err;
    return std::nullopt;
  }
  if (w.is_transformer()) {
    if (auto err = instantiate(*w.as_transformer().in, g, s)) return err;
    return instantiate(*w.as_transformer().out, g, s);
  }
  return std::nullopt;
}

inline void collect_vars(const TypeTerm& t, const Subst& s,
                         std::vector<int>& out, std::set<int>& seen) {
  TypeTerm w = s.apply(t);
  if (w.is_var()) {
    if (seen.insert(w.as_var().id).second) out.push_back(w.as_var().id);
  } else if (w.is_prod()) {
    for (const TypeTerm& e : w.as_prod().elems) collect_vars(e, s, out, seen);
  } else if (w.is_transformer()) {
    collect_vars(*w.as_transformer().in, s, out, seen);
    collect_vars(*w.as_transformer().out, s, out, seen);
  }
}

inline std::vector<int> free_vars(const TypeTerm& t, const Subst& s) {
  std::vector<int> out;
  std::set<int> seen;
  collect_vars(t, s, out, seen);
  return out;
}

// ---------------------------------------------------------------------------
// Printing
//
// Variables are displayed 'a, 'b, ... in order of first appearance, with
// their constraint shown at the first occurrence only, e.g.
//   'a:{numeral,zero} x 'a => ...
// A printer session is shared across the parts of one definition so the
// naming stays consistent between its signature, parameters and warnings.

class TypePrinter {
 public:
  std::string name_of(int id, const ClassSet& cs) {
    auto it = names_.find(id);
    if (it != names_.end()) return it->second;
    std::string name = "'" + letter(static_cast<int>(names_.size()));
    names_[id] = name;
    if (!cs.empty()) return name + ":" + cs.display();
    return name;
  }

  std::string print(const TypeTerm& t) { return print(t, /*nested=*/false); }

  std::string print(const TypeTerm& t, bool nested) {
    if (t.is_ground()) return to_string(t.as_ground().g);
    if (t.is_var()) return name_of(t.as_var().id, t.as_var().classes);
    if (t.is_prod()) {
      std::string out;
      const auto& elems = t.as_prod().elems;
      for (std::size_t i = 0; i < elems.size(); ++i) {
        if (i) out += " × ";
        out += print(elems[i], /*nested=*/true);
      }
      return out;
    }
    const auto& tr = t.as_transformer();
    std::string lhs = print(*tr.in, /*nested=*/true);
    std::string rhs = print(*tr.out, /*nested=*/true);
    std::string out = lhs + " ⇒° " + rhs;
    if (nested) return "(" + out + ")";
    return out;
  }

 private:
  static std::string letter(int n) {
    std::string base(1, static_cast<char>('a' + n % 26));
    if (n < 26) return base;
    return base + std::to_string(n / 26);
  }
  std::map<int, std::string> names_;
};

inline std::string to_string(const TypeTerm& t) {
  TypePrinter p;
  return p.print(t);
}

}  // namespace bdt

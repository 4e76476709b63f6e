#pragma once

// Block library: maps each diagram block to its predicate transformer
// primitive, in three translation modes.
//
//   default   declared types kept, logic inputs lifted through ≠0
//   -const    undeclared constants additionally surface their literal's
//             type variable as a value parameter of the definition
//   -generic  declarations dropped; constants, arithmetic and logic are
//             typed at simulink class variables (boolean constants pass
//             through s_bool, logic through s_and/s_or/s_not)
//
// Scalar multi-input blocks fold left; the integrator reads the global
// wire dt. Mux and Demux lower to Id (their routing happens at the
// composition site).

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bdt/diagram.hpp"
#include "bdt/pt.hpp"
#include "bdt/sym.hpp"
#include "bdt/types.hpp"

namespace bdt {

struct TranslationMode {
  bool const_params = false;
  bool generic = false;
  std::optional<Ground> target_type;
};

// A value parameter created for a constant: carries the literal's type
// variable into the definition signature. The value itself stays in the
// expression; the parameter is a pure type carrier.
struct ConstParam {
  TypeTerm type;
  Value value;
};

struct LoweredBlock {
  PT pt;
  std::vector<ConstParam> const_params;
  // Extra unifications imposed on the update's inputs (positional);
  // the default-mode integrator pins both to real.
  std::vector<TypeTerm> input_constraints;
  bool stateful = false;
  Value initial{0.0};
};

struct LowerError {
  std::string message;
};

namespace detail {

inline bool integral_value(double v) {
  return std::isfinite(v) && std::floor(v) == v;
}

// Undeclared literals: 0 gets the zero class, positive whole numbers the
// numeral class; anything else only exists at real.
inline TypeTerm undeclared_literal_type(double v, VarGen& gen) {
  if (integral_value(v) && v == 0.0)
    return gen.fresh(ClassSet::closure_of({ClassId::zero}));
  if (integral_value(v) && v >= 1.0)
    return gen.fresh(ClassSet::closure_of({ClassId::numeral}));
  return t_real();
}

inline TypeTerm generic_literal_type(double v, VarGen& gen) {
  if (integral_value(v) && v >= 0.0)
    return gen.fresh(ClassSet::closure_of({ClassId::simulink}));
  return t_real();
}

inline Sym lower_constant(const Block& b, const TranslationMode& mode,
                          VarGen& gen, std::vector<ConstParam>& params) {
  bool bool_declared =
      b.bool_value.has_value() ||
      (b.out_type && *b.out_type == Ground::boolean);

  if (mode.generic) {
    if (bool_declared) {
      Value payload =
          b.bool_value ? Value{*b.bool_value} : Value{b.value.value_or(0.0)};
      TypeTerm inner = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
      TypeTerm outer = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
      if (mode.const_params) params.push_back({inner, payload});
      return s_bool(lit(payload, inner), outer);
    }
    double v = b.value.value_or(0.0);
    TypeTerm t = generic_literal_type(v, gen);
    if (mode.const_params && t.is_var()) params.push_back({t, Value{v}});
    return lit(Value{v}, t);
  }

  if (b.bool_value) return lit(Value{*b.bool_value}, t_bool());
  double v = b.value.value_or(0.0);
  if (b.out_type) {
    if (*b.out_type == Ground::boolean) return lit(Value{v != 0.0}, t_bool());
    return lit(Value{v}, t_ground(*b.out_type));
  }
  TypeTerm t = undeclared_literal_type(v, gen);
  if (mode.const_params && t.is_var()) params.push_back({t, Value{v}});
  return lit(Value{v}, t);
}

inline std::vector<std::string> input_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

inline Sym lift_nonzero(const Sym& x, VarGen& gen) {
  TypeTerm zt = gen.fresh(ClassSet::closure_of({ClassId::numeral_nzero}));
  return mk(BinE{BinOp::ne, x, lit(Value{0.0}, zt), std::nullopt});
}

inline BinOp relop_to_binop(RelOp op) {
  switch (op) {
    case RelOp::eq: return BinOp::eq;
    case RelOp::ne: return BinOp::ne;
    case RelOp::lt: return BinOp::lt;
    case RelOp::le: return BinOp::le;
    case RelOp::gt: return BinOp::gt;
    case RelOp::ge: return BinOp::ge;
  }
  return BinOp::eq;
}

}  // namespace detail

inline std::variant<LoweredBlock, LowerError> lower_block(
    const Block& b, const TranslationMode& mode, VarGen& gen) {
  using detail::input_names;
  LoweredBlock out;

  auto chain = [&](BinOp op, std::optional<ClassId> cls) {
    auto names = input_names(b.in_count);
    Sym acc = wire(names[0]);
    for (std::size_t i = 1; i < names.size(); ++i)
      acc = mk(BinE{op, acc, wire(names[i]), cls});
    out.pt = pt_update(names, {acc});
  };

  switch (b.kind) {
    case BlockKind::constant: {
      Sym e = detail::lower_constant(b, mode, gen, out.const_params);
      out.pt = pt_update({}, {e});
      return out;
    }

    case BlockKind::add:
      chain(BinOp::add, mode.generic ? ClassId::simulink : ClassId::plus);
      return out;
    case BlockKind::sub:
      chain(BinOp::sub, mode.generic ? ClassId::simulink : ClassId::minus);
      return out;
    case BlockKind::mul:
      chain(BinOp::mul, mode.generic ? ClassId::simulink : ClassId::power);
      return out;

    case BlockKind::gain: {
      double g = b.gain.value_or(1.0);
      TypeTerm gt = mode.generic ? detail::generic_literal_type(g, gen)
                                 : detail::undeclared_literal_type(g, gen);
      Sym glit = lit(Value{g}, gt);
      std::optional<ClassId> cls =
          mode.generic ? ClassId::simulink : ClassId::power;
      out.pt = pt_update({"x0"}, {mk(BinE{BinOp::mul, glit, wire("x0"), cls})});
      return out;
    }

    case BlockKind::relational: {
      BinOp op = detail::relop_to_binop(b.rel_op.value_or(RelOp::eq));
      if (mode.generic) {
        Sym cond = mk(BinE{op, wire("x0"), wire("x1"), ClassId::simulink});
        TypeTerm vt = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
        out.pt = pt_update(
            {"x0", "x1"},
            {ite(cond, lit(Value{1.0}, vt), lit(Value{0.0}, vt))});
      } else {
        out.pt = pt_update({"x0", "x1"}, {cmp(op, wire("x0"), wire("x1"))});
      }
      return out;
    }

    case BlockKind::logic_and:
    case BlockKind::logic_or: {
      auto names = input_names(b.in_count);
      if (mode.generic) {
        std::vector<Sym> args;
        for (const std::string& n : names) args.push_back(wire(n));
        SFun f =
            b.kind == BlockKind::logic_and ? SFun::s_and : SFun::s_or;
        out.pt = pt_update(names, {s_call(f, args, ClassId::simulink)});
      } else {
        Sym acc = detail::lift_nonzero(wire(names[0]), gen);
        for (std::size_t i = 1; i < names.size(); ++i) {
          Sym next = detail::lift_nonzero(wire(names[i]), gen);
          acc = b.kind == BlockKind::logic_and ? conj(acc, next)
                                               : disj(acc, next);
        }
        out.pt = pt_update(names, {acc});
      }
      return out;
    }

    case BlockKind::logic_not: {
      if (mode.generic) {
        out.pt =
            pt_update({"x0"}, {s_call(SFun::s_not, {wire("x0")},
                                      ClassId::simulink)});
      } else {
        out.pt = pt_update({"x0"}, {lnot(detail::lift_nonzero(wire("x0"), gen))});
      }
      return out;
    }

    case BlockKind::convert: {
      if (mode.generic) {
        // generic wires carry only simulink-classed variables; a boolean
        // target becomes the s_bool normalizer so its 0/1 meaning
        // survives instantiation at a numeric type
        TypeTerm out_t = gen.fresh(ClassSet::closure_of({ClassId::simulink}));
        if (b.convert_to && *b.convert_to == Ground::boolean)
          out.pt = pt_update({"x0"}, {s_bool(wire("x0"), out_t)});
        else
          out.pt = pt_update({"x0"}, {conv(wire("x0"), b.convert_to, out_t)});
        return out;
      }
      TypeTerm out_t =
          b.convert_to ? t_ground(*b.convert_to) : gen.fresh();
      out.pt = pt_update({"x0"}, {conv(wire("x0"), b.convert_to, out_t)});
      return out;
    }

    case BlockKind::integrator: {
      std::optional<ClassId> cls =
          mode.generic ? ClassId::simulink : ClassId::plus;
      Sym next = mk(BinE{BinOp::add, wire("s"),
                         mul_unconstrained(wire("x0"), wire("dt")), cls});
      out.pt = pt_update({"x0", "s"}, {wire("s"), next});
      out.stateful = true;
      out.initial = Value{b.initial.value_or(0.0)};
      if (!mode.generic) out.input_constraints = {t_real(), t_real()};
      return out;
    }

    case BlockKind::unit_delay: {
      out.pt = pt_update({"x0", "s"}, {wire("s"), wire("x0")});
      out.stateful = true;
      out.initial = Value{b.initial.value_or(0.0)};
      return out;
    }

    case BlockKind::mux:
    case BlockKind::demux:
      out.pt = pt_id();
      return out;

    case BlockKind::scope:
      return LowerError{"Scope is a trace tap, not a transformer"};
    case BlockKind::inport:
    case BlockKind::outport:
    case BlockKind::subsystem:
      return LowerError{std::string(to_string(b.kind)) +
                        " is handled structurally, not lowered"};
  }
  return LowerError{"unknown block kind"};
}

}  // namespace bdt

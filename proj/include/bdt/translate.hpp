#pragma once

// Diagram translation: validate, flatten, run the arity fixpoint, then
// walk the blocks in topological order building one update transformer by
// direct substitution. Stateful block outputs become state input wires;
// their next-state expressions are appended after the visible outputs, so
// the resulting update has shape
//
//   [externals.., states.. ↝ outports.., scope taps.., next states..]
//
// Typing is incremental: each block's lowered expression is typed against
// the types already assigned to its input wires, so the first failure
// (in topological order) names the offending wire.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdt/arity.hpp"
#include "bdt/blocks.hpp"
#include "bdt/diagram.hpp"
#include "bdt/pt.hpp"
#include "bdt/simplify.hpp"
#include "bdt/sym.hpp"
#include "bdt/types.hpp"

namespace bdt {

struct TranslationResult {
  bool ok = false;
  std::optional<TypeError> error;
  std::optional<ArityError> arity_error;
  std::vector<DiagramError> validation;

  std::string name;
  Diagram flat;
  ArityMap arities;

  UpdatePT update;  // inputs: externals then states (machine wire names)
  TypeTerm type;    // transformer type; apply subst when printing
  Subst subst;
  VarGen gen;

  int external_count = 0;
  int state_count = 0;
  std::vector<Value> state_initials;

  std::vector<std::string> param_names;  // -const value parameters
  std::vector<TypeTerm> param_types;
  std::vector<Value> param_values;
  bool uses_dt = false;

  // update.outputs layout: [0, outport_count) visible outputs,
  // [outport_count, outport_count + tap_count) scope taps, then states.
  int outport_count = 0;
  int tap_count = 0;
  std::vector<std::string> output_labels;  // for outports and taps

  std::vector<TypeTerm> free_var_terms;  // dangling body type variables
};

namespace detail {

struct Bundle {
  std::vector<Sym> exprs;
  std::vector<TypeTerm> types;
};

inline std::string out_key(const std::string& id, int i) {
  return id + ".out" + std::to_string(i);
}

// Deterministic topological order; wires leaving stateful blocks are cut,
// so the (validated) graph is acyclic. O(n^2) sweeps keep block-list
// order among ready blocks.
inline std::vector<int> topo_order(const Diagram& d) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < d.blocks.size(); ++i)
    index.emplace(d.blocks[i].id, static_cast<int>(i));
  std::vector<int> indegree(d.blocks.size(), 0);
  for (const Wire& w : d.wires) {
    auto src = index.find(w.from.block);
    auto dst = index.find(w.to.block);
    if (src == index.end() || dst == index.end()) continue;
    if (d.blocks[src->second].stateful()) continue;
    indegree[dst->second]++;
  }
  std::vector<int> order;
  std::vector<bool> placed(d.blocks.size(), false);
  for (std::size_t round = 0; round < d.blocks.size(); ++round) {
    bool progressed = false;
    for (std::size_t i = 0; i < d.blocks.size(); ++i) {
      if (placed[i] || indegree[i] != 0) continue;
      placed[i] = true;
      progressed = true;
      order.push_back(static_cast<int>(i));
      for (const Wire& w : d.wires) {
        if (w.from.block != d.blocks[i].id) continue;
        if (d.blocks[i].stateful()) continue;
        auto dst = index.find(w.to.block);
        if (dst != index.end()) indegree[dst->second]--;
      }
    }
    if (!progressed) break;
  }
  return order;
}

// Type variables sitting in literal/result slots of the body but absent
// from the transformer type and not carried by a value parameter.
inline std::vector<TypeTerm> dangling_var_terms(
    const std::vector<Sym>& outputs, const Subst& subst, const TypeTerm& type,
    const std::vector<TypeTerm>& param_types) {
  std::map<int, TypeTerm> body_vars;
  std::vector<int> body_order;
  std::set<int> seen;
  struct Walk {
    const Subst& s;
    std::map<int, TypeTerm>& terms;
    std::vector<int>& order;
    std::set<int>& seen;
    void type_slot(const TypeTerm& t) const {
      TypeTerm w = s.apply(t);
      if (w.is_var()) {
        if (seen.insert(w.as_var().id).second) {
          order.push_back(w.as_var().id);
          terms.emplace(w.as_var().id, w);
        }
      } else if (w.is_prod()) {
        for (const TypeTerm& e2 : w.as_prod().elems) type_slot(e2);
      }
    }
    void rec(const Sym& e) const {
      struct V {
        const Walk& w;
        void operator()(const LitE& n) const { w.type_slot(n.type); }
        void operator()(const WireE&) const {}
        void operator()(const UnE& u) const { w.rec(u.a); }
        void operator()(const BinE& b) const { w.rec(b.a); w.rec(b.b); }
        void operator()(const ConvE& c) const {
          w.rec(c.a);
          w.type_slot(c.out_type);
        }
        void operator()(const SBoolE& s2) const {
          w.rec(s2.a);
          w.type_slot(s2.out_type);
        }
        void operator()(const SCallE& c) const {
          for (const Sym& a : c.args) w.rec(a);
        }
        void operator()(const IteE& i) const {
          w.rec(i.cond); w.rec(i.then_v); w.rec(i.else_v);
        }
      };
      std::visit(V{*this}, e->rep());
    }
  };
  for (const Sym& e : outputs)
    Walk{subst, body_vars, body_order, seen}.rec(e);
  std::set<int> in_type;
  for (int v : free_vars(type, subst)) in_type.insert(v);
  std::set<int> in_params;
  for (const TypeTerm& p : param_types) {
    TypeTerm w = subst.apply(p);
    if (w.is_var()) in_params.insert(w.as_var().id);
  }
  std::vector<TypeTerm> out;
  for (int id : body_order)
    if (!in_type.count(id) && !in_params.count(id))
      out.push_back(body_vars.at(id));
  return out;
}

}  // namespace detail

inline TranslationResult translate(const Diagram& d,
                                   const TranslationMode& mode) {
  TranslationResult r;
  r.name = d.name.empty() ? "A" : d.name;

  r.validation = validate(d);
  if (!r.validation.empty()) return r;

  FlattenResult fr = flatten(d);
  r.flat = std::move(fr.diagram);
  for (const DiagramError& e : fr.errors) r.validation.push_back(e);
  if (!r.validation.empty()) return r;

  // The flat graph has no subsystem indirection, so cycle detection here
  // sees loops that cross former subsystem boundaries.
  for (const DiagramError& e : validate(r.flat)) r.validation.push_back(e);
  if (!r.validation.empty()) return r;

  ArityResult ar = compute_arity(r.flat);
  r.arities = ar.ports;
  if (ar.error) {
    r.arity_error = ar.error;
    return r;
  }

  static const DefEnv k_empty_env;
  InferResult session;
  detail::InferCtx cx{k_empty_env, r.gen, session, {}, 0};

  auto fail = [&](std::string message, std::string where) {
    if (!r.error) r.error = TypeError{std::move(message), std::move(where)};
  };

  // Driver of each in-port.
  std::map<std::string, PortRef> driver;
  for (const Wire& w : r.flat.wires) driver.emplace(w.to.str(), w.from);

  std::map<std::string, detail::Bundle> ports;  // by out-port key

  auto input_bundle = [&](const Block& b, int i) -> const detail::Bundle* {
    auto drv = driver.find(PortRef{b.id, false, i}.str());
    if (drv == driver.end()) return nullptr;
    auto it = ports.find(drv->second.str());
    return it == ports.end() ? nullptr : &it->second;
  };
  auto driver_key = [&](const Block& b, int i) -> std::string {
    auto drv = driver.find(PortRef{b.id, false, i}.str());
    return drv == driver.end() ? "?" : drv->second.str();
  };

  struct External {
    int port;
    std::string wire_name;
    TypeTerm type;
  };
  struct StateRec {
    int block_pos;
    std::string wire_name;
    Value initial;
    Sym next;
    TypeTerm type;
  };
  struct OutRec {
    int port;
    detail::Bundle bundle;
    std::string label;
  };
  struct TapRec {
    int block_pos;
    detail::Bundle bundle;
    std::string label;
  };
  std::vector<External> externals;
  std::vector<StateRec> states;
  std::vector<OutRec> outs;
  std::vector<TapRec> taps;

  // Stateful outputs are state wires, visible to consumers that the cut
  // topological order may visit before the block itself.
  struct PreState {
    std::string wire_name;
    TypeTerm type;
  };
  std::map<std::string, PreState> pre_states;
  for (const Block& b : r.flat.blocks) {
    if (!b.stateful()) continue;
    PreState ps{b.id + ".state", r.gen.fresh()};
    ports[detail::out_key(b.id, 0)] = {{wire(ps.wire_name)}, {ps.type}};
    pre_states.emplace(b.id, ps);
  }

  std::vector<int> order = detail::topo_order(r.flat);

  for (int pos : order) {
    if (r.error) break;
    const Block& b = r.flat.blocks[pos];
    switch (b.kind) {
      case BlockKind::inport: {
        std::string name = detail::out_key(b.id, 0);
        TypeTerm t = r.gen.fresh();
        externals.push_back(
            {b.port_index.value_or(static_cast<int>(externals.size())), name,
             t});
        ports[name] = {{wire(name)}, {t}};
        break;
      }

      case BlockKind::mux: {
        detail::Bundle all;
        for (int i = 0; i < b.in_count; ++i) {
          const detail::Bundle* in = input_bundle(b, i);
          if (!in) break;
          all.exprs.insert(all.exprs.end(), in->exprs.begin(), in->exprs.end());
          all.types.insert(all.types.end(), in->types.begin(), in->types.end());
        }
        ports[detail::out_key(b.id, 0)] = std::move(all);
        break;
      }

      case BlockKind::demux: {
        const detail::Bundle* in = input_bundle(b, 0);
        if (!in) break;
        int per = static_cast<int>(in->exprs.size()) / std::max(1, b.out_count);
        for (int j = 0; j < b.out_count; ++j) {
          detail::Bundle slice;
          for (int k = j * per; k < (j + 1) * per &&
                                k < static_cast<int>(in->exprs.size());
               ++k) {
            slice.exprs.push_back(in->exprs[k]);
            slice.types.push_back(in->types[k]);
          }
          ports[detail::out_key(b.id, j)] = std::move(slice);
        }
        break;
      }

      case BlockKind::outport: {
        const detail::Bundle* in = input_bundle(b, 0);
        if (!in) break;
        outs.push_back({b.port_index.value_or(static_cast<int>(outs.size())),
                        *in, b.id});
        break;
      }

      case BlockKind::scope: {
        const detail::Bundle* in = input_bundle(b, 0);
        if (!in) break;
        taps.push_back({pos, *in, b.id});
        break;
      }

      case BlockKind::subsystem:
        fail("subsystem survived flattening", b.id);
        break;

      default: {
        auto lowered = lower_block(b, mode, r.gen);
        if (const LowerError* le = std::get_if<LowerError>(&lowered)) {
          fail(le->message, b.id);
          break;
        }
        LoweredBlock& lb = std::get<LoweredBlock>(lowered);
        for (const ConstParam& p : lb.const_params) {
          r.param_names.push_back(
              positional_name(static_cast<int>(r.param_names.size())));
          r.param_types.push_back(p.type);
          r.param_values.push_back(p.value);
        }
        const UpdatePT* u = std::get_if<UpdatePT>(&lb.pt->rep());
        if (!u) {
          fail("block did not lower to an update", b.id);
          break;
        }

        // Type the lowered expressions over fresh input variables.
        std::map<std::string, TypeTerm> locals;
        std::vector<TypeTerm> in_vars;
        int data_inputs = static_cast<int>(u->inputs.size()) -
                          (lb.stateful ? 1 : 0);
        TypeTerm state_var =
            lb.stateful ? pre_states.at(b.id).type : r.gen.fresh();
        for (std::size_t j = 0; j < u->inputs.size(); ++j) {
          TypeTerm v = lb.stateful && j + 1 == u->inputs.size() ? state_var
                                                                : r.gen.fresh();
          locals.emplace(u->inputs[j], v);
          if (static_cast<int>(j) < data_inputs) in_vars.push_back(v);
        }
        std::vector<TypeTerm> out_types;
        for (const Sym& e : u->outputs) {
          auto t = detail::type_sym(e, locals, cx);
          if (!t) break;
          out_types.push_back(*t);
        }
        if (session.error) {
          fail(session.error->message, b.id + " (" + session.error->where + ")");
          break;
        }

        if (lb.stateful && out_types.size() == 2) {
          // next state must live at the state's type
          if (auto err = unify(out_types[1], state_var, session.subst, r.gen)) {
            fail(err->detail, b.id);
            break;
          }
        }
        for (std::size_t j = 0;
             j < lb.input_constraints.size() && j < in_vars.size(); ++j) {
          if (auto err = unify(in_vars[j], lb.input_constraints[j],
                               session.subst, r.gen)) {
            fail(err->detail, b.id + ".in" + std::to_string(j));
            break;
          }
        }
        if (r.error) break;

        // Bind actual input wires: first failure blames the wire.
        std::map<std::string, Sym> subst_map;
        bool bound = true;
        for (int j = 0; j < data_inputs; ++j) {
          const detail::Bundle* in = input_bundle(b, j);
          if (!in || in->exprs.size() != 1) {
            fail("input carries arity " +
                     std::to_string(in ? in->exprs.size() : 0) +
                     ", expected a scalar",
                 b.id + ".in" + std::to_string(j));
            bound = false;
            break;
          }
          if (auto err =
                  unify(in_vars[j], in->types[0], session.subst, r.gen)) {
            fail(err->detail,
                 driver_key(b, j) + " -> " + b.id + ".in" + std::to_string(j));
            bound = false;
            break;
          }
          subst_map.emplace(u->inputs[j], in->exprs[0]);
        }
        if (!bound) break;

        if (lb.stateful) {
          const std::string& sv = pre_states.at(b.id).wire_name;
          subst_map.emplace(u->inputs[data_inputs], wire(sv));
          Sym next = substitute_wires(u->outputs[1], subst_map);
          states.push_back({pos, sv, lb.initial, next, state_var});
        } else {
          ports[detail::out_key(b.id, 0)] = {
              {substitute_wires(u->outputs[0], subst_map)}, {out_types[0]}};
        }
      }
    }
  }
  if (r.error) return r;

  std::stable_sort(externals.begin(), externals.end(),
            [](const External& a, const External& b) { return a.port < b.port; });
  std::stable_sort(outs.begin(), outs.end(),
            [](const OutRec& a, const OutRec& b) { return a.port < b.port; });
  std::stable_sort(states.begin(), states.end(), [](const StateRec& a,
                                             const StateRec& b) {
    return a.block_pos < b.block_pos;
  });
  std::stable_sort(taps.begin(), taps.end(),
            [](const TapRec& a, const TapRec& b) {
              return a.block_pos < b.block_pos;
            });

  std::vector<TypeTerm> in_types, out_types;
  for (const External& e : externals) {
    r.update.inputs.push_back(e.wire_name);
    in_types.push_back(e.type);
  }
  for (const StateRec& s : states) {
    r.update.inputs.push_back(s.wire_name);
    in_types.push_back(s.type);
    r.state_initials.push_back(s.initial);
  }
  r.external_count = static_cast<int>(externals.size());
  r.state_count = static_cast<int>(states.size());

  auto push_bundle = [&](const detail::Bundle& bundle,
                         const std::string& label) {
    for (std::size_t k = 0; k < bundle.exprs.size(); ++k) {
      r.update.outputs.push_back(bundle.exprs[k]);
      out_types.push_back(bundle.types[k]);
      r.output_labels.push_back(
          bundle.exprs.size() == 1 ? label
                                   : label + "#" + std::to_string(k));
    }
  };
  for (const OutRec& o : outs) push_bundle(o.bundle, o.label);
  r.outport_count = static_cast<int>(r.update.outputs.size());
  for (const TapRec& t : taps) push_bundle(t.bundle, t.label);
  r.tap_count = static_cast<int>(r.update.outputs.size()) - r.outport_count;
  for (const StateRec& s : states) {
    r.update.outputs.push_back(s.next);
    out_types.push_back(s.type);
  }

  r.type = t_transformer(t_tuple(in_types), t_tuple(out_types));
  r.subst = session.subst;
  r.uses_dt = cx.globals.count("dt") != 0;
  r.free_var_terms = detail::dangling_var_terms(r.update.outputs, r.subst,
                                                r.type, r.param_types);

  // dt joins the parameter list last, as a distinguished symbol.
  if (r.uses_dt) r.param_names.push_back("dt");

  r.ok = true;
  return r;
}

// Binds every remaining type variable of the result at g (the -type
// option). Returns the first class-discipline violation, if any.
inline std::optional<TypeError> instantiate_at(TranslationResult& r,
                                               Ground g) {
  if (auto err = instantiate(r.type, g, r.subst))
    return TypeError{err->detail, "-type " + std::string(to_string(g))};
  for (const TypeTerm& p : r.param_types)
    if (auto err = instantiate(p, g, r.subst))
      return TypeError{err->detail, "-type " + std::string(to_string(g))};
  for (const Sym& e : r.update.outputs) {
    std::optional<UnifyError> err;
    struct V {
      Subst& s;
      Ground g;
      std::optional<UnifyError>& err;
      void rec(const Sym& e) const {
        if (err) return;
        struct W {
          const V& v;
          void operator()(const LitE& n) const { v.slot(n.type); }
          void operator()(const WireE&) const {}
          void operator()(const UnE& u) const { v.rec(u.a); }
          void operator()(const BinE& b) const { v.rec(b.a); v.rec(b.b); }
          void operator()(const ConvE& c) const {
            v.rec(c.a);
            v.slot(c.out_type);
          }
          void operator()(const SBoolE& s2) const {
            v.rec(s2.a);
            v.slot(s2.out_type);
          }
          void operator()(const SCallE& c) const {
            for (const Sym& a : c.args) v.rec(a);
          }
          void operator()(const IteE& i) const {
            v.rec(i.cond); v.rec(i.then_v); v.rec(i.else_v);
          }
        };
        std::visit(W{*this}, e->rep());
      }
      void slot(const TypeTerm& t) const {
        if (err) return;
        err = instantiate(t, g, s);
      }
    };
    V{r.subst, g, err}.rec(e);
    if (err) return TypeError{err->detail, "-type " + std::string(to_string(g))};
  }
  r.free_var_terms.clear();
  return std::nullopt;
}

}  // namespace bdt

#pragma once

// Hierarchical block-diagram model: blocks with indexed in/out ports,
// wires between them, and subsystems holding nested diagrams.
//
// validate() establishes the structural invariants the rest of the
// pipeline relies on: resolvable wire endpoints, exactly one driver per
// in-port, per-kind port counts, and no instantaneous cycles (every loop
// must pass through a delay or integrator). flatten() inlines subsystems,
// prefixing inner block ids with the subsystem path.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "bdt/sym.hpp"

namespace bdt {

enum class BlockKind {
  constant,
  add, sub, mul, gain,
  relational,
  logic_and, logic_or, logic_not,
  convert,
  integrator, unit_delay,
  mux, demux,
  inport, outport, scope,
  subsystem,
};

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::constant: return "Constant";
    case BlockKind::add: return "Add";
    case BlockKind::sub: return "Sub";
    case BlockKind::mul: return "Mul";
    case BlockKind::gain: return "Gain";
    case BlockKind::relational: return "Relational";
    case BlockKind::logic_and: return "And";
    case BlockKind::logic_or: return "Or";
    case BlockKind::logic_not: return "Not";
    case BlockKind::convert: return "Convert";
    case BlockKind::integrator: return "Integrator";
    case BlockKind::unit_delay: return "UnitDelay";
    case BlockKind::mux: return "Mux";
    case BlockKind::demux: return "Demux";
    case BlockKind::inport: return "Inport";
    case BlockKind::outport: return "Outport";
    case BlockKind::scope: return "Scope";
    case BlockKind::subsystem: return "Subsystem";
  }
  return "?";
}

enum class RelOp { eq, ne, lt, le, gt, ge };

inline const char* to_string(RelOp op) {
  switch (op) {
    case RelOp::eq: return "=";
    case RelOp::ne: return "!=";
    case RelOp::lt: return "<";
    case RelOp::le: return "<=";
    case RelOp::gt: return ">";
    case RelOp::ge: return ">=";
  }
  return "?";
}

struct PortRef {
  std::string block;
  bool is_out = false;
  int index = 0;

  std::string str() const {
    return block + "." + (is_out ? "out" : "in") + std::to_string(index);
  }
  bool operator<(const PortRef& o) const {
    return std::tie(block, is_out, index) <
           std::tie(o.block, o.is_out, o.index);
  }
  bool operator==(const PortRef& o) const = default;
};

struct Wire {
  PortRef from;  // out-port
  PortRef to;    // in-port
  bool operator==(const Wire& o) const = default;
};

struct Diagram;

struct Block {
  std::string id;
  BlockKind kind = BlockKind::constant;
  int in_count = 0;
  int out_count = 0;

  // Kind-specific parameters.
  std::optional<double> value;          // constant: numeric value
  std::optional<bool> bool_value;       // constant: boolean value
  std::optional<Ground> out_type;       // constant: declared output type
  std::optional<double> gain;           // gain
  std::optional<RelOp> rel_op;          // relational
  std::optional<Ground> convert_to;     // convert: absent means inferred
  std::optional<double> initial;        // integrator / unit delay
  std::optional<int> port_index;        // inport / outport position
  std::shared_ptr<Diagram> body;        // subsystem

  bool stateful() const {
    return kind == BlockKind::integrator || kind == BlockKind::unit_delay;
  }
};

struct Diagram {
  std::string name;
  std::vector<Block> blocks;
  std::vector<Wire> wires;

  const Block* find(const std::string& id) const {
    for (const Block& b : blocks)
      if (b.id == id) return &b;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Validation

struct DiagramError {
  enum class Kind {
    dangling_wire,
    duplicate_port,
    stateless_cycle,
    bad_port_count,
    unbound_subsystem_port,
  };
  Kind kind;
  std::string where;
  std::string message;
};

inline const char* to_string(DiagramError::Kind k) {
  switch (k) {
    case DiagramError::Kind::dangling_wire: return "DanglingWire";
    case DiagramError::Kind::duplicate_port: return "DuplicatePort";
    case DiagramError::Kind::stateless_cycle: return "StatelessCycle";
    case DiagramError::Kind::bad_port_count: return "BadPortCount";
    case DiagramError::Kind::unbound_subsystem_port:
      return "UnboundSubsystemPort";
  }
  return "?";
}

inline std::string to_string(const DiagramError& e) {
  return std::string(to_string(e.kind)) + " at " + e.where + ": " + e.message;
}

namespace detail {

struct KindSig {
  int min_in, max_in;    // max_in < 0 means unbounded
  int min_out, max_out;
};

inline KindSig kind_signature(const Block& b) {
  switch (b.kind) {
    case BlockKind::constant: return {0, 0, 1, 1};
    case BlockKind::add: return {2, -1, 1, 1};
    case BlockKind::sub: return {2, 2, 1, 1};
    case BlockKind::mul: return {2, -1, 1, 1};
    case BlockKind::gain: return {1, 1, 1, 1};
    case BlockKind::relational: return {2, 2, 1, 1};
    case BlockKind::logic_and: return {2, -1, 1, 1};
    case BlockKind::logic_or: return {2, -1, 1, 1};
    case BlockKind::logic_not: return {1, 1, 1, 1};
    case BlockKind::convert: return {1, 1, 1, 1};
    case BlockKind::integrator: return {1, 1, 1, 1};
    case BlockKind::unit_delay: return {1, 1, 1, 1};
    case BlockKind::mux: return {2, -1, 1, 1};
    case BlockKind::demux: return {1, 1, 2, -1};
    case BlockKind::inport: return {0, 0, 1, 1};
    case BlockKind::outport: return {1, 1, 0, 0};
    case BlockKind::scope: return {1, -1, 0, 0};
    case BlockKind::subsystem: return {0, -1, 0, -1};
  }
  return {0, 0, 0, 0};
}

}  // namespace detail

inline std::vector<DiagramError> validate(const Diagram& d,
                                          const std::string& prefix = "") {
  std::vector<DiagramError> errors;
  auto err = [&](DiagramError::Kind k, std::string where, std::string msg) {
    errors.push_back({k, prefix + where, std::move(msg)});
  };

  std::map<std::string, const Block*> by_id;
  for (const Block& b : d.blocks) {
    if (!by_id.emplace(b.id, &b).second)
      err(DiagramError::Kind::duplicate_port, b.id, "duplicate block id");
  }

  for (const Block& b : d.blocks) {
    auto sig = detail::kind_signature(b);
    if (b.in_count < sig.min_in || (sig.max_in >= 0 && b.in_count > sig.max_in))
      err(DiagramError::Kind::bad_port_count, b.id,
          std::string(to_string(b.kind)) + " has " +
              std::to_string(b.in_count) + " input(s)");
    if (b.out_count < sig.min_out ||
        (sig.max_out >= 0 && b.out_count > sig.max_out))
      err(DiagramError::Kind::bad_port_count, b.id,
          std::string(to_string(b.kind)) + " has " +
              std::to_string(b.out_count) + " output(s)");
  }

  // Wire endpoints must resolve to existing ports of the right direction.
  auto resolves = [&](const PortRef& p, bool want_out) -> bool {
    auto it = by_id.find(p.block);
    if (it == by_id.end()) return false;
    if (p.is_out != want_out) return false;
    int count = want_out ? it->second->out_count : it->second->in_count;
    return p.index >= 0 && p.index < count;
  };

  std::map<PortRef, int> drivers;
  for (const Wire& w : d.wires) {
    bool ok = true;
    if (!resolves(w.from, true)) {
      err(DiagramError::Kind::dangling_wire, w.from.str(),
          "wire source does not resolve to an out-port");
      ok = false;
    }
    if (!resolves(w.to, false)) {
      err(DiagramError::Kind::dangling_wire, w.to.str(),
          "wire sink does not resolve to an in-port");
      ok = false;
    }
    if (ok) drivers[w.to]++;
  }

  for (const Block& b : d.blocks) {
    for (int i = 0; i < b.in_count; ++i) {
      PortRef p{b.id, false, i};
      auto it = drivers.find(p);
      if (it == drivers.end())
        err(DiagramError::Kind::dangling_wire, p.str(),
            "in-port has no incoming wire");
      else if (it->second > 1)
        err(DiagramError::Kind::duplicate_port, p.str(),
            "in-port has " + std::to_string(it->second) + " drivers");
    }
  }

  // Subsystem interface: in/out counts must match the child's ports.
  for (const Block& b : d.blocks) {
    if (b.kind != BlockKind::subsystem) continue;
    if (!b.body) {
      err(DiagramError::Kind::bad_port_count, b.id, "subsystem has no body");
      continue;
    }
    std::set<int> ins, outs;
    for (const Block& c : b.body->blocks) {
      if (c.kind == BlockKind::inport) {
        if (!ins.insert(c.port_index.value_or(0)).second)
          err(DiagramError::Kind::duplicate_port, b.id + "/" + c.id,
              "duplicate inport index");
      }
      if (c.kind == BlockKind::outport) {
        if (!outs.insert(c.port_index.value_or(0)).second)
          err(DiagramError::Kind::duplicate_port, b.id + "/" + c.id,
              "duplicate outport index");
      }
    }
    auto contiguous = [](const std::set<int>& s) {
      int i = 0;
      for (int v : s)
        if (v != i++) return false;
      return true;
    };
    if (static_cast<int>(ins.size()) != b.in_count || !contiguous(ins))
      err(DiagramError::Kind::bad_port_count, b.id,
          "subsystem inputs do not match child inports");
    if (static_cast<int>(outs.size()) != b.out_count || !contiguous(outs))
      err(DiagramError::Kind::bad_port_count, b.id,
          "subsystem outputs do not match child outports");
    auto sub_errors = validate(*b.body, prefix + b.id + "/");
    errors.insert(errors.end(), sub_errors.begin(), sub_errors.end());
  }

  // Instantaneous cycles: DFS over block dependencies, where a stateful
  // block's output does not depend on its input within a step. Levels
  // holding subsystems defer to the flattened diagram, where loops broken
  // by a delay inside a child are visible.
  bool has_subsystem = false;
  for (const Block& b : d.blocks)
    if (b.kind == BlockKind::subsystem) has_subsystem = true;
  if (errors.empty() && !has_subsystem) {
    std::map<std::string, std::vector<std::string>> succ;
    for (const Wire& w : d.wires) {
      const Block* src = by_id[w.from.block];
      if (src->stateful()) continue;
      succ[w.from.block].push_back(w.to.block);
    }
    std::map<std::string, int> mark;  // 0 new, 1 active, 2 done
    std::vector<std::string> stack;
    auto dfs = [&](auto&& self, const std::string& id) -> bool {
      mark[id] = 1;
      stack.push_back(id);
      for (const std::string& next : succ[id]) {
        if (mark[next] == 1) {
          std::string cycle;
          auto it = std::find(stack.begin(), stack.end(), next);
          for (; it != stack.end(); ++it) {
            if (!cycle.empty()) cycle += " -> ";
            cycle += *it;
          }
          err(DiagramError::Kind::stateless_cycle, next,
              "instantaneous cycle: " + cycle + " -> " + next);
          return false;
        }
        if (mark[next] == 0 && !self(self, next)) return false;
      }
      stack.pop_back();
      mark[id] = 2;
      return true;
    };
    for (const Block& b : d.blocks) {
      if (mark[b.id] == 0 && !dfs(dfs, b.id)) break;
    }
  }

  return errors;
}

// ---------------------------------------------------------------------------
// Flattening

namespace detail {

inline void flatten_into(const Diagram& d, const std::string& prefix,
                         const std::map<int, PortRef>& input_sources,
                         std::map<PortRef, PortRef>& alias, Diagram& out,
                         std::vector<DiagramError>& errors);

// Resolves a source port through subsystem boundaries recorded in alias.
// Chains are finite unless interface ports feed themselves; the guard
// breaks such cycles and leaves the port for validation to reject.
inline PortRef resolve_alias(PortRef p, const std::map<PortRef, PortRef>& a) {
  for (std::size_t step = 0; step <= a.size(); ++step) {
    auto it = a.find(p);
    if (it == a.end()) return p;
    p = it->second;
  }
  return p;
}

inline void flatten_into(const Diagram& d, const std::string& prefix,
                         const std::map<int, PortRef>& input_sources,
                         std::map<PortRef, PortRef>& alias, Diagram& out,
                         std::vector<DiagramError>& errors) {
  auto driver_of = [&](const PortRef& in_port) -> std::optional<PortRef> {
    for (const Wire& w : d.wires)
      if (w.to == in_port) return w.from;
    return std::nullopt;
  };

  // Pass 1: emit blocks in declaration order, splicing each subsystem's
  // body in place. Aliases stay unresolved here; the top-level caller
  // resolves whole chains once every record exists.
  for (const Block& b : d.blocks) {
    std::string pid = prefix + b.id;
    if (b.kind == BlockKind::inport && !prefix.empty()) {
      int idx = b.port_index.value_or(0);
      auto it = input_sources.find(idx);
      if (it == input_sources.end()) {
        errors.push_back({DiagramError::Kind::unbound_subsystem_port, pid,
                          "inport has no outer source"});
        continue;
      }
      alias[PortRef{pid, true, 0}] = it->second;
      continue;
    }
    if (b.kind == BlockKind::outport && !prefix.empty())
      continue;  // interface only; its driver is re-pointed below
    if (b.kind == BlockKind::subsystem) {
      std::map<int, PortRef> sub_inputs;
      for (int i = 0; i < b.in_count; ++i) {
        auto drv = driver_of(PortRef{b.id, false, i});
        if (!drv) {
          errors.push_back({DiagramError::Kind::unbound_subsystem_port,
                            PortRef{pid, false, i}.str(),
                            "subsystem input has no driver"});
          continue;
        }
        PortRef from = *drv;
        from.block = prefix + from.block;
        sub_inputs[i] = from;
      }
      // Outports of the child become aliases for the subsystem's out-ports.
      for (const Block& c : b.body->blocks) {
        if (c.kind != BlockKind::outport) continue;
        int idx = c.port_index.value_or(0);
        // Child outport driver, seen from inside the child.
        std::optional<PortRef> inner;
        for (const Wire& w : b.body->wires)
          if (w.to == PortRef{c.id, false, 0}) inner = w.from;
        if (!inner) {
          errors.push_back({DiagramError::Kind::unbound_subsystem_port,
                            pid + "/" + c.id, "outport has no driver"});
          continue;
        }
        PortRef from = *inner;
        from.block = pid + "/" + from.block;
        alias[PortRef{pid, true, idx}] = from;
      }
      flatten_into(*b.body, pid + "/", sub_inputs, alias, out, errors);
      continue;
    }
    Block copy = b;
    copy.id = pid;
    out.blocks.push_back(std::move(copy));
  }

  // Pass 2: emit wires whose sink survives, with sources qualified.
  // Wires into inports/subsystems/outports-of-subsystems vanish.
  for (const Wire& w : d.wires) {
    const Block* sink = d.find(w.to.block);
    if (!sink) continue;
    if (sink->kind == BlockKind::subsystem || sink->kind == BlockKind::inport)
      continue;
    if (sink->kind == BlockKind::outport && !prefix.empty()) continue;
    PortRef from = w.from;
    from.block = prefix + from.block;
    PortRef to = w.to;
    to.block = prefix + to.block;
    out.wires.push_back(Wire{resolve_alias(from, alias), to});
  }
}

}  // namespace detail

struct FlattenResult {
  Diagram diagram;
  std::vector<DiagramError> errors;
};

// Inlines all subsystems. Expects a validated diagram; alias chains are
// fully resolved, so the result contains no inport/outport indirection
// except at the root.
inline FlattenResult flatten(const Diagram& d) {
  FlattenResult r;
  r.diagram.name = d.name;
  std::map<PortRef, PortRef> alias;
  std::map<int, PortRef> no_inputs;
  detail::flatten_into(d, "", no_inputs, alias, r.diagram, r.errors);
  // Resolve any aliases that were recorded after first use.
  for (Wire& w : r.diagram.wires)
    w.from = detail::resolve_alias(w.from, alias);
  return r;
}

}  // namespace bdt

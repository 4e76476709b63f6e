#pragma once

// Wire arity analysis. Every out-port carries an arity (signal count),
// initially 1. Sweeps recompute out-port arities from in-port arities
// (an in-port has the arity of its driving out-port) until a sweep
// changes nothing or the iteration bound is exceeded.
//
//   Mux    : out = sum of input arities
//   Demux  : input arity split evenly across outputs
//   SISO   : Gain/Not/Convert/Integrator/UnitDelay pass arity through
//   scalar : Add/Sub/Mul/Relational/And/Or require arity-1 inputs
//   Subsystem: inner Inports take the outer in-arities, one sweep runs
//              over the body, outer out-ports take the inner drivers
//
// Arities are monotone non-decreasing across sweeps, so the fixpoint is
// unique and independent of block order. The bound is the total number
// of basic (non-subsystem) blocks; a diagram converges iff it reaches a
// quiet sweep within that many sweeps.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdt/diagram.hpp"

namespace bdt {

using ArityMap = std::map<std::string, int>;  // out-port ref -> arity

struct ArityError {
  enum class Kind { mismatch, non_convergence };
  Kind kind;
  std::string where;  // port or block reference
  std::string message;
};

inline std::string to_string(const ArityError& e) {
  const char* k = e.kind == ArityError::Kind::mismatch ? "ArityMismatch"
                                                       : "NonConvergence";
  std::string out = k;
  if (!e.where.empty()) out += " at " + e.where;
  return out + ": " + e.message;
}

struct ArityResult {
  ArityMap ports;
  std::optional<ArityError> error;
  int sweeps = 0;
  int bound = 0;
  bool ok() const { return !error.has_value(); }
};

namespace detail {

inline bool arity_scalar_only(BlockKind k) {
  switch (k) {
    case BlockKind::add:
    case BlockKind::sub:
    case BlockKind::mul:
    case BlockKind::relational:
    case BlockKind::logic_and:
    case BlockKind::logic_or:
      return true;
    default:
      return false;
  }
}

inline bool arity_passthrough(BlockKind k) {
  switch (k) {
    case BlockKind::gain:
    case BlockKind::logic_not:
    case BlockKind::convert:
    case BlockKind::integrator:
    case BlockKind::unit_delay:
      return true;
    default:
      return false;
  }
}

struct AritySweep {
  ArityMap& ports;
  std::vector<std::string> changed;  // out-ports bumped this sweep

  int get(const std::string& key) {
    auto it = ports.find(key);
    return it == ports.end() ? 1 : it->second;
  }

  bool set(const std::string& key, int arity) {
    int& slot = ports.try_emplace(key, 1).first->second;
    if (slot == arity) return false;
    slot = arity;
    changed.push_back(key);
    return true;
  }

  // Arity of block in-port i under `prefix`: the driving out-port's entry.
  int in_arity(const Diagram& d, const std::string& prefix,
               const std::string& id, int i) {
    for (const Wire& w : d.wires)
      if (w.to.block == id && w.to.index == i)
        return get(prefix + w.from.str());
    return 1;
  }

  bool update_block(const Diagram& d, const std::string& prefix,
                    const Block& b);

  bool sweep(const Diagram& d, const std::string& prefix) {
    bool up = false;
    for (const Block& b : d.blocks) up = update_block(d, prefix, b) || up;
    return up;
  }
};

inline bool AritySweep::update_block(const Diagram& d,
                                     const std::string& prefix,
                                     const Block& b) {
  std::string base = prefix + b.id;
  auto out_key = [&](int i) {
    return base + ".out" + std::to_string(i);
  };
  switch (b.kind) {
    case BlockKind::mux: {
      int a = 0;
      for (int i = 0; i < b.in_count; ++i) a += in_arity(d, prefix, b.id, i);
      return set(out_key(0), std::max(1, a));
    }
    case BlockKind::demux: {
      int n = in_arity(d, prefix, b.id, 0);
      int share = std::max(1, n / std::max(1, b.out_count));
      bool up = false;
      for (int i = 0; i < b.out_count; ++i)
        up = set(out_key(i), share) || up;
      return up;
    }
    case BlockKind::subsystem: {
      bool up = false;
      // Inner Inport k surfaces the subsystem's in-port k.
      for (const Block& c : b.body->blocks)
        if (c.kind == BlockKind::inport)
          up = set(prefix + b.id + "/" + c.id + ".out0",
                   in_arity(d, prefix, b.id, c.port_index.value_or(0))) ||
               up;
      up = sweep(*b.body, prefix + b.id + "/") || up;
      // Inner Outport k's driver surfaces as the subsystem's out-port k.
      for (const Block& c : b.body->blocks)
        if (c.kind == BlockKind::outport)
          up = set(out_key(c.port_index.value_or(0)),
                   in_arity(*b.body, prefix + b.id + "/", c.id, 0)) ||
               up;
      return up;
    }
    case BlockKind::inport:
      // Root-level source; within a subsystem the container sets it.
      return false;
    case BlockKind::constant:
      return set(out_key(0), 1);
    case BlockKind::outport:
    case BlockKind::scope:
      return false;
    default:
      if (arity_passthrough(b.kind))
        return set(out_key(0), in_arity(d, prefix, b.id, 0));
      // Scalar-only op: outputs stay 1 regardless of inputs.
      return set(out_key(0), 1);
  }
}

inline int basic_block_count(const Diagram& d) {
  int n = 0;
  for (const Block& b : d.blocks)
    n += b.kind == BlockKind::subsystem ? basic_block_count(*b.body) : 1;
  return n;
}

// Mismatches are checked only on the converged map: Demux inputs grow
// monotonically during iteration and may pass through non-divisible
// transients.
inline std::optional<ArityError> check_arity_violations(
    const Diagram& d, const std::string& prefix, AritySweep& s) {
  for (const Block& b : d.blocks) {
    if (b.kind == BlockKind::subsystem) {
      if (auto e = check_arity_violations(*b.body, prefix + b.id + "/", s))
        return e;
      continue;
    }
    if (arity_scalar_only(b.kind)) {
      for (int i = 0; i < b.in_count; ++i) {
        int a = s.in_arity(d, prefix, b.id, i);
        if (a != 1)
          return ArityError{
              ArityError::Kind::mismatch,
              prefix + b.id + ".in" + std::to_string(i),
              std::string(to_string(b.kind)) +
                  " is scalar-only but receives arity " +
                  std::to_string(a)};
      }
    }
    if (b.kind == BlockKind::demux) {
      int n = s.in_arity(d, prefix, b.id, 0);
      int k = std::max(1, b.out_count);
      if (n % k != 0)
        return ArityError{ArityError::Kind::mismatch, prefix + b.id + ".in0",
                          "Demux input arity " + std::to_string(n) +
                              " does not split evenly across " +
                              std::to_string(k) + " outputs"};
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline ArityResult compute_arity(const Diagram& d) {
  ArityResult r;
  detail::AritySweep s{r.ports, {}};
  r.bound = detail::basic_block_count(d);
  if (r.bound == 0) return r;

  bool up = true;
  int i = 0;
  while (up && i < r.bound) {
    s.changed.clear();
    up = s.sweep(d, "");
    ++i;
  }
  r.sweeps = i;
  if (up) {
    std::string cyclic;
    for (const std::string& p : s.changed) {
      if (!cyclic.empty()) cyclic += ", ";
      cyclic += p;
    }
    r.error = ArityError{
        ArityError::Kind::non_convergence, "",
        "arity computation did not converge within " +
            std::to_string(r.bound) + " sweeps; still growing: " + cyclic};
    return r;
  }
  r.error = detail::check_arity_violations(d, "", s);
  return r;
}

}  // namespace bdt

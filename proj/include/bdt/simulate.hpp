#pragma once

// Discrete-time execution of a translated diagram: forward Euler with a
// fixed step. Each row evaluates the update's outputs at the current
// state (taps before state update), then feeds the next-state outputs
// back. The trace records scope taps; diagrams without scopes fall back
// to their outports.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "bdt/translate.hpp"

namespace bdt {

struct SimConfig {
  double dt = 0.01;
  double horizon = 1.0;
};

struct Trace {
  std::vector<std::string> labels;          // tap names
  std::vector<double> times;
  std::vector<std::vector<Value>> rows;     // one row per time, per tap
};

struct SimError {
  std::string message;
};

inline std::variant<Trace, SimError> simulate(const TranslationResult& tr,
                                              const SimConfig& cfg) {
  if (!tr.ok) return SimError{"diagram did not translate"};
  if (tr.external_count > 0)
    return SimError{"simulation requires a closed diagram; " +
                    std::to_string(tr.external_count) +
                    " external input(s) are unbound"};
  if (cfg.dt <= 0.0 || !std::isfinite(cfg.dt))
    return SimError{"dt must be positive"};
  if (cfg.horizon < 0.0 || !std::isfinite(cfg.horizon))
    return SimError{"horizon must be nonnegative"};

  int tap_begin = tr.outport_count;
  int tap_end = tr.outport_count + tr.tap_count;
  if (tr.tap_count == 0) {  // no scopes: trace the outports
    tap_begin = 0;
    tap_end = tr.outport_count;
  }
  if (tap_begin == tap_end && tr.state_count == 0)
    return SimError{"nothing to trace: no scope, outport, or state"};

  Trace tr_out;
  for (int i = tap_begin; i < tap_end; ++i)
    tr_out.labels.push_back(tr.output_labels[i]);

  // State kinds follow the resolved state types.
  std::vector<Value> state;
  for (int i = 0; i < tr.state_count; ++i) {
    TypeTerm t = tr.subst.apply(
        tr.type.as_transformer().in->is_prod()
            ? tr.type.as_transformer().in->as_prod().elems[tr.external_count + i]
            : *tr.type.as_transformer().in);
    Value init = tr.state_initials[i];
    if (t.is_ground() && t.as_ground().g == Ground::boolean) {
      bool bv = std::holds_alternative<bool>(init)
                    ? std::get<bool>(init)
                    : std::get<double>(init) != 0.0;
      state.push_back(Value{bv});
    } else {
      double dv = std::holds_alternative<double>(init)
                      ? std::get<double>(init)
                      : (std::get<bool>(init) ? 1.0 : 0.0);
      state.push_back(Value{dv});
    }
  }

  long long steps =
      static_cast<long long>(std::floor(cfg.horizon / cfg.dt + 1e-9));
  if (steps > 100000000LL) return SimError{"too many steps"};

  // bake the session substitution into stored types once
  std::vector<Sym> exprs;
  exprs.reserve(tr.update.outputs.size());
  for (const Sym& e : tr.update.outputs)
    exprs.push_back(resolve_types(e, tr.subst));

  std::size_t n_out = exprs.size();
  for (long long k = 0; k <= steps; ++k) {
    Env env;
    env["dt"] = Value{cfg.dt};
    for (int i = 0; i < tr.state_count; ++i)
      env[tr.update.inputs[tr.external_count + i]] = state[i];

    std::vector<Value> outs;
    outs.reserve(n_out);
    try {
      for (const Sym& e : exprs) outs.push_back(eval_sym(e, env));
    } catch (const EvalError& err) {
      return SimError{std::string("evaluation failed at t=") +
                      std::to_string(k * cfg.dt) + ": " + err.what()};
    }

    tr_out.times.push_back(static_cast<double>(k) * cfg.dt);
    std::vector<Value> row;
    for (int i = tap_begin; i < tap_end; ++i) row.push_back(outs[i]);
    tr_out.rows.push_back(std::move(row));

    for (int i = 0; i < tr.state_count; ++i)
      state[i] = outs[n_out - tr.state_count + i];
  }
  return tr_out;
}

inline std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_value(const Value& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "1" : "0";
  return csv_number(std::get<double>(v));
}

inline void write_csv(const Trace& t, std::ostream& os) {
  os << "time";
  for (const std::string& l : t.labels) os << "," << l;
  os << "\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << csv_number(t.times[r]);
    for (const Value& v : t.rows[r]) os << "," << csv_value(v);
    os << "\n";
  }
}

}  // namespace bdt

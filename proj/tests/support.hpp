#pragma once

// Shared helpers for the test binaries: fixture loading, random diagram
// generation, and evaluation of translated updates.

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdt/diagram_json.hpp"
#include "bdt/report.hpp"
#include "bdt/simplify.hpp"
#include "bdt/translate.hpp"

namespace support {

inline std::string data_path(const std::string& name) {
  return std::string(BDT_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bdt::Diagram load_fixture(const std::string& name) {
  auto r = bdt::parse_diagram(read_file(data_path(name)));
  if (!r.ok()) throw std::runtime_error(name + ": " + r.error->str());
  return *r.diagram;
}

inline const std::vector<std::string>& corpus_files() {
  static const std::vector<std::string> files = {
      "fig1_left.bdt.json",  "fig1_right.bdt.json", "fig2.bdt.json",
      "fig3a_compare.bdt.json", "fig3b.bdt.json",   "fig3b_nested.bdt.json",
      "fig3c.bdt.json",      "fig4a.bdt.json",      "fig4b.bdt.json",
      "fig5a.bdt.json",      "fig5b.bdt.json",      "fig6.bdt.json",
      "mixed.bdt.json",      "muxdemux.bdt.json",
  };
  return files;
}

// Truthiness-aware value comparison: a bool and a number agree when the
// number's zero test matches the bool.
inline bool values_agree(const bdt::Value& a, const bdt::Value& b,
                         double tol) {
  bool ab = std::holds_alternative<bool>(a);
  bool bb = std::holds_alternative<bool>(b);
  if (ab && bb) return std::get<bool>(a) == std::get<bool>(b);
  if (!ab && !bb) {
    double x = std::get<double>(a), y = std::get<double>(b);
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) == std::isnan(y);
    return std::abs(x - y) <= tol;
  }
  bool truth = ab ? std::get<bool>(a) : std::get<bool>(b);
  double num = ab ? std::get<double>(b) : std::get<double>(a);
  return (num != 0.0) == truth;
}

// Evaluates the raw translated update under a valuation of its wires.
inline std::vector<bdt::Value> eval_update(
    const bdt::UpdatePT& u, const bdt::Subst& subst,
    const std::vector<bdt::Value>& in, double dt = 0.25) {
  bdt::Env env;
  env["dt"] = bdt::Value{dt};
  if (in.size() != u.inputs.size())
    throw std::runtime_error("valuation arity mismatch");
  for (std::size_t i = 0; i < u.inputs.size(); ++i) env[u.inputs[i]] = in[i];
  std::vector<bdt::Value> out;
  for (const bdt::Sym& e : u.outputs)
    out.push_back(bdt::eval_sym(bdt::resolve_types(e, subst), env));
  return out;
}

// ---------------------------------------------------------------------------
// Random diagram generation
//
// Wires are tracked with the ground type the construction intends for
// them, so generated diagrams are accepted in default mode by design.

enum class WireType { boolean, real, integer };

struct GenWire {
  std::string port;  // "<block>.out<k>"
  WireType type;
};

struct GenDiagram {
  bdt::Diagram d;
  int n_inports = 0;
  std::vector<WireType> inport_types;  // intended, enforced via Convert
};

inline const char* gen_type_name(WireType t) {
  switch (t) {
    case WireType::boolean: return "bool";
    case WireType::real: return "real";
    case WireType::integer: return "int";
  }
  return "real";
}

inline bdt::Block gen_block(const std::string& id, bdt::BlockKind k) {
  bdt::Block b;
  b.id = id;
  b.kind = k;
  return b;
}

// Ground-typed random diagram: constants carry declarations, converts
// carry targets, every wire's ground type is known at generation time.
// Used by the simplifier-preservation property.
inline GenDiagram random_ground_diagram(std::mt19937& rng, int max_blocks) {
  GenDiagram g;
  g.d.name = "rand";
  std::vector<GenWire> wires;  // available sources
  auto rnd = [&](int n) { return static_cast<int>(rng() % n); };
  auto add_block = [&](bdt::Block b) { g.d.blocks.push_back(std::move(b)); };
  auto connect = [&](const std::string& from, const std::string& to) {
    auto f = bdt::detail::parse_port_ref(from);
    auto t = bdt::detail::parse_port_ref(to);
    g.d.wires.push_back(bdt::Wire{*f, *t});
  };

  int next_id = 0;
  auto fresh = [&](const char* base) {
    return std::string(base) + std::to_string(next_id++);
  };

  // seed sources: constants and inports (inports are typed via Convert)
  int n_sources = 1 + rnd(3);
  for (int i = 0; i < n_sources; ++i) {
    WireType t = static_cast<WireType>(rnd(3));
    if (rnd(3) == 0) {
      std::string in_id = fresh("in");
      bdt::Block ib = gen_block(in_id, bdt::BlockKind::inport);
      ib.in_count = 0;
      ib.out_count = 1;
      ib.port_index = g.n_inports++;
      g.inport_types.push_back(t);
      add_block(std::move(ib));
      std::string cv_id = fresh("cv");
      bdt::Block cb = gen_block(cv_id, bdt::BlockKind::convert);
      cb.in_count = 1;
      cb.out_count = 1;
      switch (t) {
        case WireType::boolean: cb.convert_to = bdt::Ground::boolean; break;
        case WireType::real: cb.convert_to = bdt::Ground::real; break;
        case WireType::integer: cb.convert_to = bdt::Ground::integer; break;
      }
      add_block(std::move(cb));
      connect(in_id + ".out0", cv_id + ".in0");
      wires.push_back({cv_id + ".out0", t});
    } else {
      std::string id = fresh("c");
      bdt::Block cb = gen_block(id, bdt::BlockKind::constant);
      cb.in_count = 0;
      cb.out_count = 1;
      switch (t) {
        case WireType::boolean:
          cb.bool_value = rnd(2) == 0;
          break;
        case WireType::real:
          cb.value = (rnd(2001) - 1000) / 100.0;
          cb.out_type = bdt::Ground::real;
          break;
        case WireType::integer:
          cb.value = static_cast<double>(rnd(21) - 10);
          cb.out_type = bdt::Ground::integer;
          break;
      }
      add_block(std::move(cb));
      wires.push_back({id + ".out0", t});
    }
  }

  auto pick = [&](WireType t) -> const GenWire* {
    std::vector<const GenWire*> of_type;
    for (const GenWire& w : wires)
      if (w.type == t) of_type.push_back(&w);
    if (of_type.empty()) return nullptr;
    return of_type[rnd(static_cast<int>(of_type.size()))];
  };
  auto pick_any = [&]() -> const GenWire& {
    return wires[rnd(static_cast<int>(wires.size()))];
  };
  auto pick_num = [&]() -> const GenWire* {
    const GenWire* r = pick(rnd(2) == 0 ? WireType::real : WireType::integer);
    if (!r) r = pick(WireType::real);
    if (!r) r = pick(WireType::integer);
    return r;
  };

  int budget = 1 + rnd(max_blocks - 2);
  for (int i = 0; i < budget; ++i) {
    switch (rnd(9)) {
      case 0:
      case 1: {  // add/sub/mul over a numeric type
        const GenWire* a = pick_num();
        if (!a) break;
        const GenWire* b = pick(a->type);
        if (!b) break;
        bdt::BlockKind k = rnd(3) == 0   ? bdt::BlockKind::sub
                           : rnd(2) == 0 ? bdt::BlockKind::add
                                         : bdt::BlockKind::mul;
        std::string id = fresh("op");
        bdt::Block ob = gen_block(id, k);
        ob.in_count = 2;
        ob.out_count = 1;
        WireType t = a->type;
        std::string ap = a->port, bp = b->port;
        add_block(std::move(ob));
        connect(ap, id + ".in0");
        connect(bp, id + ".in1");
        wires.push_back({id + ".out0", t});
        break;
      }
      case 2: {  // gain over a numeric wire
        const GenWire* a = pick_num();
        if (!a) break;
        std::string id = fresh("g");
        bdt::Block gb = gen_block(id, bdt::BlockKind::gain);
        gb.in_count = 1;
        gb.out_count = 1;
        // a decimal gain literal is typed ground real, so integer wires
        // only admit integral gains
        gb.gain = (a->type == WireType::real && rnd(2) == 0) ? 0.5 : 2.0;
        WireType t = a->type;
        std::string ap = a->port;
        add_block(std::move(gb));
        connect(ap, id + ".in0");
        wires.push_back({id + ".out0", t});
        break;
      }
      case 3: {  // relational over matching operands
        const GenWire& a = pick_any();
        const GenWire* b = pick(a.type);
        if (!b) break;
        static const bdt::RelOp ops[] = {bdt::RelOp::eq, bdt::RelOp::ne,
                                         bdt::RelOp::lt, bdt::RelOp::le,
                                         bdt::RelOp::gt, bdt::RelOp::ge};
        bdt::RelOp op = ops[rnd(6)];
        if (a.type == WireType::boolean &&
            !(op == bdt::RelOp::eq || op == bdt::RelOp::ne))
          op = bdt::RelOp::ne;  // ord has no bool instance
        std::string id = fresh("r");
        bdt::Block rb = gen_block(id, bdt::BlockKind::relational);
        rb.in_count = 2;
        rb.out_count = 1;
        rb.rel_op = op;
        std::string ap = a.port, bp = b->port;
        add_block(std::move(rb));
        connect(ap, id + ".in0");
        connect(bp, id + ".in1");
        wires.push_back({id + ".out0", WireType::boolean});
        break;
      }
      case 4: {  // and/or over anything (inputs are zero-tested)
        const GenWire& a = pick_any();
        const GenWire& b = pick_any();
        std::string id = fresh("l");
        bdt::Block lb = gen_block(
            id, rnd(2) == 0 ? bdt::BlockKind::logic_and : bdt::BlockKind::logic_or);
        lb.in_count = 2;
        lb.out_count = 1;
        std::string ap = a.port, bp = b.port;
        add_block(std::move(lb));
        connect(ap, id + ".in0");
        connect(bp, id + ".in1");
        wires.push_back({id + ".out0", WireType::boolean});
        break;
      }
      case 5: {  // not
        const GenWire& a = pick_any();
        std::string id = fresh("n");
        bdt::Block nb = gen_block(id, bdt::BlockKind::logic_not);
        nb.in_count = 1;
        nb.out_count = 1;
        std::string ap = a.port;
        add_block(std::move(nb));
        connect(ap, id + ".in0");
        wires.push_back({id + ".out0", WireType::boolean});
        break;
      }
      case 6: {  // convert
        const GenWire& a = pick_any();
        WireType t = static_cast<WireType>(rnd(3));
        std::string id = fresh("cv");
        bdt::Block cb = gen_block(id, bdt::BlockKind::convert);
        cb.in_count = 1;
        cb.out_count = 1;
        switch (t) {
          case WireType::boolean: cb.convert_to = bdt::Ground::boolean; break;
          case WireType::real: cb.convert_to = bdt::Ground::real; break;
          case WireType::integer: cb.convert_to = bdt::Ground::integer; break;
        }
        std::string ap = a.port;
        add_block(std::move(cb));
        connect(ap, id + ".in0");
        wires.push_back({id + ".out0", t});
        break;
      }
      case 7: {  // integrator over real
        const GenWire* a = pick(WireType::real);
        if (!a) break;
        std::string id = fresh("int");
        bdt::Block ib = gen_block(id, bdt::BlockKind::integrator);
        ib.in_count = 1;
        ib.out_count = 1;
        ib.initial = (rnd(11) - 5) / 2.0;
        std::string ap = a->port;
        add_block(std::move(ib));
        connect(ap, id + ".in0");
        wires.push_back({id + ".out0", WireType::real});
        break;
      }
      case 8: {  // unit delay
        const GenWire& a = pick_any();
        std::string id = fresh("d");
        bdt::Block db = gen_block(id, bdt::BlockKind::unit_delay);
        db.in_count = 1;
        db.out_count = 1;
        WireType t = a.type;
        std::string ap = a.port;
        add_block(std::move(db));
        connect(ap, id + ".in0");
        wires.push_back({id + ".out0", t});
        break;
      }
    }
    if (static_cast<int>(g.d.blocks.size()) >= max_blocks - 1) break;
  }

  // tap one or two wires with outports
  int taps = 1 + rnd(2);
  for (int i = 0; i < taps; ++i) {
    const GenWire& w = pick_any();
    std::string id = fresh("o");
    bdt::Block ob = gen_block(id, bdt::BlockKind::outport);
    ob.in_count = 1;
    ob.out_count = 0;
    ob.port_index = i;
    std::string wp = w.port;
    add_block(std::move(ob));
    connect(wp, id + ".in0");
  }
  return g;
}

// Open-typed random diagram: constants are undeclared, inports are raw,
// no convert targets are forced. Used by the principal-types property.
struct OpenGen {
  bdt::Diagram d;
  int n_inports = 0;
  int n_free_consts = 0;  // undeclared constants, in block order
};

inline OpenGen random_open_diagram(std::mt19937& rng, int max_blocks) {
  OpenGen g;
  g.d.name = "rand";
  auto rnd = [&](int n) { return static_cast<int>(rng() % n); };
  std::vector<std::string> wires;
  auto connect = [&](const std::string& from, const std::string& to) {
    auto f = bdt::detail::parse_port_ref(from);
    auto t = bdt::detail::parse_port_ref(to);
    g.d.wires.push_back(bdt::Wire{*f, *t});
  };
  int next_id = 0;
  auto fresh = [&](const char* base) {
    return std::string(base) + std::to_string(next_id++);
  };

  int n_sources = 1 + rnd(2);
  for (int i = 0; i < n_sources; ++i) {
    if (rnd(2) == 0) {
      std::string id = fresh("in");
      bdt::Block b = gen_block(id, bdt::BlockKind::inport);
      b.in_count = 0;
      b.out_count = 1;
      b.port_index = g.n_inports++;
      g.d.blocks.push_back(std::move(b));
      wires.push_back(id + ".out0");
    } else {
      std::string id = fresh("c");
      bdt::Block b = gen_block(id, bdt::BlockKind::constant);
      b.in_count = 0;
      b.out_count = 1;
      int pickv = rnd(4);
      if (pickv == 3) {
        b.value = 2.5;  // decimal: lands ground real, not a position
      } else {
        b.value = static_cast<double>(pickv);  // 0,1,2: a class variable
        ++g.n_free_consts;
      }
      g.d.blocks.push_back(std::move(b));
      wires.push_back(id + ".out0");
    }
  }

  int budget = rnd(max_blocks - 1);
  for (int i = 0; i < budget; ++i) {
    if (static_cast<int>(g.d.blocks.size()) >= max_blocks - 1) break;
    auto any = [&]() { return wires[rnd(static_cast<int>(wires.size()))]; };
    switch (rnd(8)) {
      case 0:
      case 1: {
        static const bdt::BlockKind ks[] = {
            bdt::BlockKind::add, bdt::BlockKind::sub, bdt::BlockKind::mul};
        std::string id = fresh("op");
        bdt::Block b = gen_block(id, ks[rnd(3)]);
        b.in_count = 2;
        b.out_count = 1;
        g.d.blocks.push_back(std::move(b));
        connect(any(), id + ".in0");
        connect(any(), id + ".in1");
        wires.push_back(id + ".out0");
        break;
      }
      case 2: {
        std::string id = fresh("g");
        bdt::Block b = gen_block(id, bdt::BlockKind::gain);
        b.in_count = 1;
        b.out_count = 1;
        b.gain = static_cast<double>(2 + rnd(3));
        g.d.blocks.push_back(std::move(b));
        connect(any(), id + ".in0");
        wires.push_back(id + ".out0");
        break;
      }
      case 3: {
        static const bdt::RelOp ops[] = {bdt::RelOp::eq, bdt::RelOp::ne,
                                         bdt::RelOp::lt, bdt::RelOp::ge};
        std::string id = fresh("r");
        bdt::Block b = gen_block(id, bdt::BlockKind::relational);
        b.in_count = 2;
        b.out_count = 1;
        b.rel_op = ops[rnd(4)];
        g.d.blocks.push_back(std::move(b));
        connect(any(), id + ".in0");
        connect(any(), id + ".in1");
        wires.push_back(id + ".out0");
        break;
      }
      case 4: {
        std::string id = fresh("l");
        bdt::Block b = gen_block(id, rnd(2) == 0 ? bdt::BlockKind::logic_and
                                                 : bdt::BlockKind::logic_or);
        b.in_count = 2;
        b.out_count = 1;
        g.d.blocks.push_back(std::move(b));
        connect(any(), id + ".in0");
        connect(any(), id + ".in1");
        wires.push_back(id + ".out0");
        break;
      }
      case 5: {
        std::string id = fresh("cv");
        bdt::Block b = gen_block(id, bdt::BlockKind::convert);
        b.in_count = 1;
        b.out_count = 1;
        static const bdt::Ground gs[] = {bdt::Ground::boolean,
                                         bdt::Ground::real,
                                         bdt::Ground::integer};
        b.convert_to = gs[rnd(3)];
        g.d.blocks.push_back(std::move(b));
        connect(any(), id + ".in0");
        wires.push_back(id + ".out0");
        break;
      }
      case 6: {
        std::string id = fresh("int");
        bdt::Block b = gen_block(id, bdt::BlockKind::integrator);
        b.in_count = 1;
        b.out_count = 1;
        g.d.blocks.push_back(std::move(b));
        connect(any(), id + ".in0");
        wires.push_back(id + ".out0");
        break;
      }
      case 7: {
        std::string id = fresh("d");
        bdt::Block b = gen_block(id, bdt::BlockKind::unit_delay);
        b.in_count = 1;
        b.out_count = 1;
        g.d.blocks.push_back(std::move(b));
        connect(any(), id + ".in0");
        wires.push_back(id + ".out0");
        break;
      }
    }
  }

  std::string id = fresh("o");
  bdt::Block b = gen_block(id, bdt::BlockKind::outport);
  b.in_count = 1;
  b.out_count = 0;
  b.port_index = 0;
  g.d.blocks.push_back(std::move(b));
  connect(wires[rnd(static_cast<int>(wires.size()))], id + ".in0");
  return g;
}

}  // namespace support

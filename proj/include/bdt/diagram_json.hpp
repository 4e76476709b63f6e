#pragma once

// Diagram file format (.bdt.json):
//
//   {
//     "version": 1,
//     "name": "fig1_left",
//     "blocks": [
//       {"id": "c2", "kind": "Constant", "params": {"value": 2, "out_type": "bool"}},
//       {"id": "add", "kind": "Add"},
//       {"id": "scope", "kind": "Scope"}
//     ],
//     "wires": [
//       {"from": "c2.out0", "to": "add.in0"}
//     ]
//   }
//
// Port references are "<block>.<in|out><index>". Parsing is total: any
// byte sequence yields either a diagram or a located error.

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "bdt/diagram.hpp"
#include "json.hpp"

namespace bdt {

struct ParseError {
  std::string message;
  int line = 0;    // 1-based; 0 when unknown
  int column = 0;  // 1-based; 0 when unknown
  std::string path;  // JSON path of the offending value, when known

  std::string str() const {
    std::string out = "parse error";
    if (line > 0)
      out += " at line " + std::to_string(line) + ", column " +
             std::to_string(column);
    if (!path.empty()) out += " at " + path;
    return out + ": " + message;
  }
};

struct ParseResult {
  std::optional<Diagram> diagram;
  std::optional<ParseError> error;
  bool ok() const { return diagram.has_value(); }
};

namespace detail {

using nlohmann::json;

struct SemanticError {
  std::string path;
  std::string message;
};

inline void line_col_of_offset(const std::string& text, std::size_t offset,
                               int& line, int& col) {
  line = 1;
  col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

inline std::optional<BlockKind> kind_from_string(const std::string& s) {
  static const std::map<std::string, BlockKind> table = {
      {"Constant", BlockKind::constant},
      {"Add", BlockKind::add},
      {"Sub", BlockKind::sub},
      {"Mul", BlockKind::mul},
      {"Gain", BlockKind::gain},
      {"Relational", BlockKind::relational},
      {"And", BlockKind::logic_and},
      {"Or", BlockKind::logic_or},
      {"Not", BlockKind::logic_not},
      {"Convert", BlockKind::convert},
      {"Integrator", BlockKind::integrator},
      {"UnitDelay", BlockKind::unit_delay},
      {"Mux", BlockKind::mux},
      {"Demux", BlockKind::demux},
      {"Inport", BlockKind::inport},
      {"Outport", BlockKind::outport},
      {"Scope", BlockKind::scope},
      {"Subsystem", BlockKind::subsystem},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

inline std::optional<Ground> ground_from_string(const std::string& s) {
  if (s == "bool") return Ground::boolean;
  if (s == "real") return Ground::real;
  if (s == "int") return Ground::integer;
  if (s == "unit") return Ground::unit;
  return std::nullopt;
}

inline std::optional<RelOp> relop_from_string(const std::string& s) {
  if (s == "=" || s == "==") return RelOp::eq;
  if (s == "!=" || s == "≠" || s == "~=") return RelOp::ne;
  if (s == "<") return RelOp::lt;
  if (s == "<=" || s == "≤") return RelOp::le;
  if (s == ">") return RelOp::gt;
  if (s == ">=" || s == "≥") return RelOp::ge;
  return std::nullopt;
}

inline std::optional<PortRef> parse_port_ref(const std::string& s) {
  auto dot = s.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= s.size())
    return std::nullopt;
  PortRef p;
  p.block = s.substr(0, dot);
  std::string rest = s.substr(dot + 1);
  std::string dir;
  std::size_t i = 0;
  while (i < rest.size() && std::isalpha(static_cast<unsigned char>(rest[i])))
    dir += rest[i++];
  if (dir == "out")
    p.is_out = true;
  else if (dir == "in")
    p.is_out = false;
  else
    return std::nullopt;
  if (i >= rest.size()) return std::nullopt;
  int idx = 0;
  for (; i < rest.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(rest[i])))
      return std::nullopt;
    if (idx > 100000) return std::nullopt;
    idx = idx * 10 + (rest[i] - '0');
  }
  p.index = idx;
  return p;
}

Diagram parse_diagram_json(const json& j, const std::string& path);

inline Block parse_block_json(const json& j, const std::string& path,
                              const std::vector<Wire>& wires) {
  if (!j.is_object()) throw SemanticError{path, "block must be an object"};
  Block b;
  if (!j.contains("id") || !j["id"].is_string())
    throw SemanticError{path + ".id", "block id must be a string"};
  b.id = j["id"].get<std::string>();
  if (b.id.empty() || b.id.find('.') != std::string::npos ||
      b.id.find('/') != std::string::npos)
    throw SemanticError{path + ".id",
                        "block id must be nonempty and contain no '.' or '/'"};
  if (!j.contains("kind") || !j["kind"].is_string())
    throw SemanticError{path + ".kind", "block kind must be a string"};
  auto kind = kind_from_string(j["kind"].get<std::string>());
  if (!kind)
    throw SemanticError{path + ".kind",
                        "unknown block kind " + j["kind"].dump()};
  b.kind = *kind;

  json params = j.value("params", json::object());
  if (!params.is_object())
    throw SemanticError{path + ".params", "params must be an object"};
  auto ppath = path + ".params";

  auto get_ground = [&](const char* key) -> std::optional<Ground> {
    if (!params.contains(key)) return std::nullopt;
    if (!params[key].is_string())
      throw SemanticError{ppath + "." + key, "expected a type name string"};
    auto g = ground_from_string(params[key].get<std::string>());
    if (!g)
      throw SemanticError{ppath + "." + key,
                          "unknown type " + params[key].dump()};
    return g;
  };

  switch (b.kind) {
    case BlockKind::constant: {
      if (!params.contains("value"))
        throw SemanticError{ppath, "Constant requires params.value"};
      const json& v = params["value"];
      if (v.is_boolean())
        b.bool_value = v.get<bool>();
      else if (v.is_number())
        b.value = v.get<double>();
      else
        throw SemanticError{ppath + ".value",
                            "constant value must be a number or boolean"};
      b.out_type = get_ground("out_type");
      break;
    }
    case BlockKind::gain: {
      if (!params.contains("gain") || !params["gain"].is_number())
        throw SemanticError{ppath, "Gain requires numeric params.gain"};
      b.gain = params["gain"].get<double>();
      break;
    }
    case BlockKind::relational: {
      if (!params.contains("op") || !params["op"].is_string())
        throw SemanticError{ppath, "Relational requires params.op"};
      auto op = relop_from_string(params["op"].get<std::string>());
      if (!op)
        throw SemanticError{ppath + ".op",
                            "unknown relational op " + params["op"].dump()};
      b.rel_op = *op;
      break;
    }
    case BlockKind::convert:
      b.convert_to = get_ground("to");
      break;
    case BlockKind::integrator:
    case BlockKind::unit_delay:
      if (params.contains("initial")) {
        if (!params["initial"].is_number())
          throw SemanticError{ppath + ".initial",
                              "initial state must be a number"};
        b.initial = params["initial"].get<double>();
      }
      break;
    case BlockKind::inport:
    case BlockKind::outport:
      if (params.contains("port")) {
        if (!params["port"].is_number_integer() ||
            params["port"].get<int>() < 0)
          throw SemanticError{ppath + ".port",
                              "port index must be a nonnegative integer"};
        b.port_index = params["port"].get<int>();
      }
      break;
    case BlockKind::subsystem: {
      if (!params.contains("diagram"))
        throw SemanticError{ppath, "Subsystem requires params.diagram"};
      b.body = std::make_shared<Diagram>(
          parse_diagram_json(params["diagram"], ppath + ".diagram"));
      break;
    }
    default:
      break;
  }

  // Port counts: explicit params.inputs/outputs win; otherwise variable
  // arity kinds get max(wired index + 1, minimum), fixed kinds get their
  // signature.
  auto sig = detail::kind_signature(b);
  int wired_in = 0, wired_out = 0;
  for (const Wire& w : wires) {
    if (w.to.block == b.id) wired_in = std::max(wired_in, w.to.index + 1);
    if (w.from.block == b.id) wired_out = std::max(wired_out, w.from.index + 1);
  }
  auto explicit_count = [&](const char* key) -> std::optional<int> {
    if (!params.contains(key)) return std::nullopt;
    if (!params[key].is_number_integer() || params[key].get<int>() < 0)
      throw SemanticError{ppath + "." + key,
                          "port count must be a nonnegative integer"};
    return params[key].get<int>();
  };

  if (b.kind == BlockKind::subsystem) {
    int ins = 0, outs = 0;
    for (const Block& c : b.body->blocks) {
      if (c.kind == BlockKind::inport) ++ins;
      if (c.kind == BlockKind::outport) ++outs;
    }
    b.in_count = ins;
    b.out_count = outs;
  } else {
    if (auto n = explicit_count("inputs"))
      b.in_count = *n;
    else if (sig.max_in == sig.min_in)
      b.in_count = sig.min_in;
    else
      b.in_count = std::max(wired_in, sig.min_in);
    if (auto n = explicit_count("outputs"))
      b.out_count = *n;
    else if (sig.max_out == sig.min_out)
      b.out_count = sig.min_out;
    else
      b.out_count = std::max(wired_out, sig.min_out);
  }
  return b;
}

inline Diagram parse_diagram_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw SemanticError{path, "diagram must be an object"};
  Diagram d;
  if (path.empty() || path == "$") {
    if (!j.contains("version") || !j["version"].is_number_integer() ||
        j["version"].get<int>() != 1)
      throw SemanticError{path + ".version", "expected \"version\": 1"};
  }
  if (j.contains("name")) {
    if (!j["name"].is_string())
      throw SemanticError{path + ".name", "diagram name must be a string"};
    d.name = j["name"].get<std::string>();
  }

  // Wires first: variable-arity port counts depend on them.
  if (j.contains("wires")) {
    if (!j["wires"].is_array())
      throw SemanticError{path + ".wires", "wires must be an array"};
    int i = 0;
    for (const json& wj : j["wires"]) {
      std::string wpath = path + ".wires[" + std::to_string(i++) + "]";
      if (!wj.is_object() || !wj.contains("from") || !wj.contains("to") ||
          !wj["from"].is_string() || !wj["to"].is_string())
        throw SemanticError{wpath,
                            "wire must be {\"from\": \"b.outN\", \"to\": \"b.inN\"}"};
      auto from = parse_port_ref(wj["from"].get<std::string>());
      auto to = parse_port_ref(wj["to"].get<std::string>());
      if (!from || !from->is_out)
        throw SemanticError{wpath + ".from",
                            "expected an out-port reference <block>.out<k>"};
      if (!to || to->is_out)
        throw SemanticError{wpath + ".to",
                            "expected an in-port reference <block>.in<k>"};
      d.wires.push_back(Wire{*from, *to});
    }
  }

  if (!j.contains("blocks") || !j["blocks"].is_array())
    throw SemanticError{path + ".blocks", "diagram requires a blocks array"};
  int i = 0;
  int next_inport = 0, next_outport = 0;
  for (const json& bj : j["blocks"]) {
    std::string bpath = path + ".blocks[" + std::to_string(i++) + "]";
    Block b = parse_block_json(bj, bpath, d.wires);
    // Positional defaults for interface ports.
    if (b.kind == BlockKind::inport && !b.port_index)
      b.port_index = next_inport;
    if (b.kind == BlockKind::outport && !b.port_index)
      b.port_index = next_outport;
    if (b.kind == BlockKind::inport) ++next_inport;
    if (b.kind == BlockKind::outport) ++next_outport;
    d.blocks.push_back(std::move(b));
  }
  return d;
}

}  // namespace detail

inline ParseResult parse_diagram(const std::string& text) {
  ParseResult r;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    ParseError err;
    err.message = e.what();
    detail::line_col_of_offset(text, e.byte > 0 ? e.byte - 1 : 0, err.line,
                               err.column);
    r.error = err;
    return r;
  }
  try {
    r.diagram = detail::parse_diagram_json(doc, "$");
  } catch (const detail::SemanticError& e) {
    r.error = ParseError{e.message, 0, 0, e.path};
  } catch (const nlohmann::json::exception& e) {
    r.error = ParseError{e.what(), 0, 0, "$"};
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization (canonical form; parse ∘ serialize is the identity)

namespace detail {

inline json block_to_json(const Block& b) {
  json j;
  j["id"] = b.id;
  j["kind"] = to_string(b.kind);
  json params = json::object();
  if (b.kind == BlockKind::constant) {
    if (b.bool_value)
      params["value"] = *b.bool_value;
    else
      params["value"] = *b.value;
    if (b.out_type) params["out_type"] = to_string(*b.out_type);
  }
  if (b.gain) params["gain"] = *b.gain;
  if (b.rel_op) params["op"] = to_string(*b.rel_op);
  if (b.convert_to) params["to"] = to_string(*b.convert_to);
  if (b.initial) params["initial"] = *b.initial;
  if (b.port_index) params["port"] = *b.port_index;
  auto sig = kind_signature(b);
  if (b.kind != BlockKind::subsystem) {
    if (sig.max_in != sig.min_in) params["inputs"] = b.in_count;
    if (sig.max_out != sig.min_out) params["outputs"] = b.out_count;
  }
  if (b.body) {
    json sub;
    sub["name"] = b.body->name;
    json blocks = json::array();
    for (const Block& c : b.body->blocks) blocks.push_back(block_to_json(c));
    sub["blocks"] = blocks;
    json wires = json::array();
    for (const Wire& w : b.body->wires)
      wires.push_back(json{{"from", w.from.str()}, {"to", w.to.str()}});
    sub["wires"] = wires;
    params["diagram"] = sub;
  }
  if (!params.empty()) j["params"] = params;
  return j;
}

}  // namespace detail

inline std::string serialize_diagram(const Diagram& d) {
  using detail::json;
  json j;
  j["version"] = 1;
  j["name"] = d.name;
  json blocks = json::array();
  for (const Block& b : d.blocks) blocks.push_back(detail::block_to_json(b));
  j["blocks"] = blocks;
  json wires = json::array();
  for (const Wire& w : d.wires)
    wires.push_back(json{{"from", w.from.str()}, {"to", w.to.str()}});
  j["wires"] = wires;
  return j.dump(2) + "\n";
}

}  // namespace bdt

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "bdt/arity.hpp"
#include "support.hpp"

using namespace bdt;

TEST_CASE("nested mux tree equals one wide mux") {
  Diagram tree = support::load_fixture("fig4a.bdt.json");
  Diagram wide = support::load_fixture("fig4b.bdt.json");

  ArityResult a = compute_arity(tree);
  REQUIRE(a.ok());
  CHECK(a.ports.at("m1.out0") == 4);
  CHECK(a.ports.at("m2.out0") == 2);
  CHECK(a.ports.at("m3.out0") == 2);

  ArityResult b = compute_arity(wide);
  REQUIRE(b.ok());
  CHECK(b.ports.at("m1.out0") == 4);
  CHECK(a.ports.at("m1.out0") == b.ports.at("m1.out0"));
}

TEST_CASE("mux feeding itself through a delay grows past the bound") {
  Diagram d = support::load_fixture("fig6.bdt.json");
  ArityResult r = compute_arity(d);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error->kind == ArityError::Kind::non_convergence);
  CHECK(r.bound == 4);
  CHECK(to_string(*r.error).find("NonConvergence") == 0);
  CHECK(r.error->message.find("did not converge within 4 sweeps") !=
        std::string::npos);
  CHECK(r.error->message.find("still growing:") != std::string::npos);
  CHECK(r.error->message.find("m.out0") != std::string::npos);
}

TEST_CASE("converged arities are independent of block order") {
  std::mt19937 rng(41);
  for (const std::string& name : support::corpus_files()) {
    Diagram base = support::load_fixture(name);
    ArityResult ref = compute_arity(base);
    for (int trial = 0; trial < 20; ++trial) {
      Diagram shuffled = base;
      std::shuffle(shuffled.blocks.begin(), shuffled.blocks.end(), rng);
      ArityResult got = compute_arity(shuffled);
      INFO(name << " trial " << trial);
      REQUIRE(got.ok() == ref.ok());
      if (ref.ok()) CHECK(got.ports == ref.ports);
    }
  }
}

TEST_CASE("scalar-only blocks reject vector inputs") {
  ParseResult r = parse_diagram(R"({
    "version": 1,
    "blocks": [
      {"id": "a", "kind": "Constant", "params": {"value": 1}},
      {"id": "b", "kind": "Constant", "params": {"value": 2}},
      {"id": "m", "kind": "Mux"},
      {"id": "g", "kind": "Gain", "params": {"gain": 2}},
      {"id": "p", "kind": "Add"},
      {"id": "s", "kind": "Scope"}
    ],
    "wires": [
      {"from": "a.out0", "to": "m.in0"},
      {"from": "b.out0", "to": "m.in1"},
      {"from": "m.out0", "to": "g.in0"},
      {"from": "g.out0", "to": "p.in0"},
      {"from": "a.out0", "to": "p.in1"},
      {"from": "p.out0", "to": "s.in0"}
    ]
  })");
  REQUIRE(r.ok());
  ArityResult res = compute_arity(*r.diagram);
  REQUIRE_FALSE(res.ok());
  CHECK(res.error->kind == ArityError::Kind::mismatch);
  CHECK(res.error->where == "p.in0");
  CHECK(res.error->message.find("scalar-only but receives arity 2") !=
        std::string::npos);
}

TEST_CASE("demux splits evenly or reports the remainder") {
  Diagram ok = support::load_fixture("muxdemux.bdt.json");
  ArityResult r = compute_arity(ok);
  REQUIRE(r.ok());
  CHECK(r.ports.at("m.out0") == 2);
  CHECK(r.ports.at("dm.out0") == 1);
  CHECK(r.ports.at("dm.out1") == 1);

  ParseResult bad = parse_diagram(R"({
    "version": 1,
    "blocks": [
      {"id": "a", "kind": "Constant", "params": {"value": 1}},
      {"id": "b", "kind": "Constant", "params": {"value": 2}},
      {"id": "c", "kind": "Constant", "params": {"value": 3}},
      {"id": "m", "kind": "Mux"},
      {"id": "dm", "kind": "Demux", "params": {"outputs": 2}},
      {"id": "s", "kind": "Scope"}
    ],
    "wires": [
      {"from": "a.out0", "to": "m.in0"},
      {"from": "b.out0", "to": "m.in1"},
      {"from": "c.out0", "to": "m.in2"},
      {"from": "m.out0", "to": "dm.in0"},
      {"from": "dm.out0", "to": "s.in0"},
      {"from": "dm.out1", "to": "s.in1"}
    ]
  })");
  REQUIRE(bad.ok());
  ArityResult res = compute_arity(*bad.diagram);
  REQUIRE_FALSE(res.ok());
  CHECK(res.error->kind == ArityError::Kind::mismatch);
  CHECK(res.error->where == "dm.in0");
  CHECK(res.error->message ==
        "Demux input arity 3 does not split evenly across 2 outputs");
}

TEST_CASE("subsystems forward arities across their interface") {
  ParseResult r = parse_diagram(R"({
    "version": 1,
    "blocks": [
      {"id": "a", "kind": "Constant", "params": {"value": 1}},
      {"id": "b", "kind": "Constant", "params": {"value": 2}},
      {"id": "m", "kind": "Mux"},
      {"id": "sub", "kind": "Subsystem", "params": {"diagram": {
        "name": "inner",
        "blocks": [
          {"id": "i", "kind": "Inport"},
          {"id": "g", "kind": "Gain", "params": {"gain": 3}},
          {"id": "o", "kind": "Outport"}
        ],
        "wires": [
          {"from": "i.out0", "to": "g.in0"},
          {"from": "g.out0", "to": "o.in0"}
        ]
      }}},
      {"id": "s", "kind": "Scope"}
    ],
    "wires": [
      {"from": "a.out0", "to": "m.in0"},
      {"from": "b.out0", "to": "m.in1"},
      {"from": "m.out0", "to": "sub.in0"},
      {"from": "sub.out0", "to": "s.in0"}
    ]
  })");
  REQUIRE(r.ok());
  ArityResult res = compute_arity(*r.diagram);
  REQUIRE(res.ok());
  CHECK(res.ports.at("sub/i.out0") == 2);
  CHECK(res.ports.at("sub/g.out0") == 2);
  CHECK(res.ports.at("sub.out0") == 2);
  CHECK(res.bound == 7);  // a, b, m, s plus the child's i, g, o
}

TEST_CASE("empty diagram converges trivially") {
  Diagram d;
  ArityResult r = compute_arity(d);
  CHECK(r.ok());
  CHECK(r.sweeps == 0);
  CHECK(r.bound == 0);
  CHECK(r.ports.empty());
}

TEST_CASE("converging run reports its sweep count within the bound") {
  Diagram d = support::load_fixture("fig4a.bdt.json");
  ArityResult r = compute_arity(d);
  REQUIRE(r.ok());
  CHECK(r.bound == 8);
  CHECK(r.sweeps >= 1);
  CHECK(r.sweeps <= r.bound);
}

#pragma once

// Report assembly: runs the translation, simplifies, and renders the
// outcome as text or JSON. One shared type printer keeps variable names
// consistent across the signature, the transformer type, and warnings.

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bdt/simplify.hpp"
#include "bdt/translate.hpp"
#include "json.hpp"

namespace bdt {

struct DefReport {
  std::string name;       // bare definition name
  std::string signature;  // name with parameter list
  std::string type_str;
  std::string simplified;
  std::vector<std::string> warnings;
};

struct Report {
  bool ok = false;
  int exit_code = 1;
  std::string name;
  std::vector<DefReport> definitions;
  ArityMap arities;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline DefReport render_definition(const TranslationResult& tr,
                                   const std::string& name) {
  DefReport def;
  def.name = name;
  TypePrinter printer;

  std::string sig = name;
  if (!tr.param_names.empty()) {
    sig += "(";
    for (std::size_t i = 0; i < tr.param_names.size(); ++i) {
      if (i) sig += ", ";
      sig += tr.param_names[i];
      if (i < tr.param_types.size()) {
        TypeTerm t = tr.subst.apply(tr.param_types[i]);
        if (t.is_var()) sig += ":" + printer.print(t);
      }
    }
    sig += ")";
  }
  def.signature = sig;

  NormalizedUpdate norm =
      normalize_update(tr.update, tr.subst, tr.state_count,
                       static_cast<int>(tr.param_values.size()));
  def.simplified = to_string(norm.update);
  def.type_str = printer.print(tr.subst.apply(tr.type));

  // Warn about type variables the simplified body still depends on; slots
  // that folded away no longer parameterize the definition.
  for (const TypeTerm& v : detail::dangling_var_terms(
           norm.update.outputs, tr.subst, tr.type, tr.param_types))
    def.warnings.push_back("free type parameter " +
                           printer.print(tr.subst.apply(v)));
  return def;
}

}  // namespace detail

inline Report build_report(const Diagram& d, const TranslationMode& mode) {
  Report rep;
  TranslationResult tr = translate(d, mode);
  rep.name = tr.name;
  rep.arities = tr.arities;

  for (const DiagramError& e : tr.validation)
    rep.diagnostics.push_back(to_string(e));
  if (tr.arity_error) rep.diagnostics.push_back(to_string(*tr.arity_error));
  if (tr.error) rep.diagnostics.push_back(tr.error->str());
  if (!tr.ok) {
    rep.exit_code = 1;
    return rep;
  }

  rep.definitions.push_back(detail::render_definition(tr, tr.name));

  if (mode.target_type) {
    TranslationResult grounded = tr;
    if (auto err = instantiate_at(grounded, *mode.target_type)) {
      rep.diagnostics.push_back(err->str());
      rep.exit_code = 1;
      return rep;
    }
    grounded.param_names.clear();
    grounded.param_types.clear();
    grounded.param_values.clear();
    if (grounded.uses_dt) grounded.param_names.push_back("dt");
    rep.definitions.push_back(
        detail::render_definition(grounded, tr.name + "_type"));
  }

  rep.ok = true;
  rep.exit_code = 0;
  return rep;
}

inline std::string render_text(const Report& rep) {
  std::ostringstream os;
  for (const DefReport& def : rep.definitions) {
    os << def.signature << " = " << def.simplified << "\n";
    os << "  type: " << def.type_str << "\n";
    for (const std::string& w : def.warnings) os << "  warning: " << w << "\n";
  }
  for (const std::string& diag : rep.diagnostics)
    os << "error: " << diag << "\n";
  if (rep.ok && rep.definitions.empty()) os << rep.name << ": ok\n";
  return os.str();
}

inline nlohmann::json render_json(const Report& rep) {
  nlohmann::json j;
  j["version"] = 1;
  j["name"] = rep.name;
  j["definitions"] = nlohmann::json::array();
  for (const DefReport& def : rep.definitions) {
    nlohmann::json jd;
    jd["name"] = def.signature;
    jd["type"] = def.type_str;
    jd["simplified"] = def.simplified;
    jd["warnings"] = def.warnings;
    j["definitions"].push_back(jd);
  }
  j["arities"] = nlohmann::json::object();
  for (const auto& [port, n] : rep.arities) j["arities"][port] = n;
  j["diagnostics"] = rep.diagnostics;
  return j;
}

struct ArityReport {
  bool ok = false;
  int exit_code = 1;
  ArityMap ports;
  int sweeps = 0;
  int bound = 0;
  std::optional<ArityError> error;
};

inline ArityReport build_arity_report(const Diagram& d) {
  ArityReport rep;
  auto errors = validate(d);
  if (!errors.empty()) {
    rep.error = ArityError{ArityError::Kind::mismatch, errors.front().where,
                           to_string(errors.front())};
    return rep;
  }
  ArityResult ar = compute_arity(d);
  rep.ports = ar.ports;
  rep.sweeps = ar.sweeps;
  rep.bound = ar.bound;
  rep.error = ar.error;
  rep.ok = !ar.error.has_value();
  rep.exit_code = rep.ok ? 0 : 1;
  return rep;
}

inline std::string render_arity_text(const ArityReport& rep) {
  std::ostringstream os;
  for (const auto& [port, n] : rep.ports) os << port << " : " << n << "\n";
  if (rep.error) {
    os << "error: " << to_string(*rep.error) << "\n";
  } else {
    os << "converged in " << rep.sweeps << " sweep(s), bound " << rep.bound
       << "\n";
  }
  return os.str();
}

inline nlohmann::json render_arity_json(const ArityReport& rep) {
  nlohmann::json j;
  j["version"] = 1;
  j["arities"] = nlohmann::json::object();
  for (const auto& [port, n] : rep.ports) j["arities"][port] = n;
  j["sweeps"] = rep.sweeps;
  j["bound"] = rep.bound;
  if (rep.error) j["error"] = to_string(*rep.error);
  return j;
}

}  // namespace bdt

// bdt: type check, simulate and inspect block diagrams.
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bdt/diagram_json.hpp"
#include "bdt/report.hpp"
#include "bdt/simulate.hpp"

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

std::optional<bdt::Ground> ground_of(const std::string& s) {
  if (s == "bool") return bdt::Ground::boolean;
  if (s == "real") return bdt::Ground::real;
  if (s == "int") return bdt::Ground::integer;
  return std::nullopt;
}

// single-dash spellings (-const, -type real, ...) are accepted as aliases
std::vector<std::string> expand_aliases(int argc, char** argv) {
  static const std::set<std::string> long_names = {
      "const", "generic", "type", "dt", "horizon", "out", "format"};
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.size() > 1 && a[0] == '-' && a[1] != '-') {
      auto eq = a.find('=');
      std::string name =
          eq == std::string::npos ? a.substr(1) : a.substr(1, eq - 1);
      if (long_names.count(name)) a = "-" + a;
    }
    args.push_back(a);
  }
  return args;
}

struct ModeFlags {
  bool as_params = false;
  bool generic = false;
  std::string type_name;

  bdt::TranslationMode to_mode() const {
    bdt::TranslationMode m;
    m.const_params = as_params;
    m.generic = generic;
    if (!type_name.empty()) m.target_type = ground_of(type_name);
    return m;
  }
};

void add_mode_flags(CLI::App* cmd, ModeFlags& mf) {
  cmd->add_flag("--const", mf.as_params,
                "turn undeclared constants into value parameters");
  cmd->add_flag("--generic", mf.generic,
                "ignore declarations and type at the most generic class");
  cmd->add_option("--type", mf.type_name,
                  "instantiate all type variables at a ground type")
      ->check(CLI::IsMember({"bool", "real", "int"}));
}

int load_diagram(const std::string& path, bdt::Diagram& out) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "error: cannot read " << path << "\n";
    return 2;
  }
  auto parsed = bdt::parse_diagram(text);
  if (!parsed.ok()) {
    std::cerr << "error: " << parsed.error->str() << "\n";
    return 1;
  }
  out = std::move(*parsed.diagram);
  return 0;
}

int run_check(const std::string& path, const ModeFlags& mf,
              const std::string& format) {
  bdt::Diagram d;
  if (int rc = load_diagram(path, d)) return rc;
  auto rep = bdt::build_report(d, mf.to_mode());
  if (format == "json")
    std::cout << bdt::render_json(rep);
  else
    std::cout << bdt::render_text(rep);
  return rep.exit_code;
}

int run_arity(const std::string& path, const std::string& format) {
  bdt::Diagram d;
  if (int rc = load_diagram(path, d)) return rc;
  auto rep = bdt::build_arity_report(d);
  if (format == "json")
    std::cout << bdt::render_arity_json(rep);
  else
    std::cout << bdt::render_arity_text(rep);
  return rep.exit_code;
}

int run_simulate(const std::string& path, const ModeFlags& mf, double dt,
                 double horizon, const std::string& out_path) {
  bdt::Diagram d;
  if (int rc = load_diagram(path, d)) return rc;
  auto mode = mf.to_mode();
  auto tr = bdt::translate(d, mode);
  std::vector<std::string> diags;
  for (const auto& e : tr.validation) diags.push_back(bdt::to_string(e));
  if (tr.arity_error) diags.push_back(bdt::to_string(*tr.arity_error));
  if (tr.error) diags.push_back(tr.error->str());
  if (!tr.ok) {
    for (const auto& m : diags) std::cerr << "error: " << m << "\n";
    return 1;
  }
  if (mode.target_type) {
    if (auto err = bdt::instantiate_at(tr, *mode.target_type)) {
      std::cerr << "error: " << err->str() << "\n";
      return 1;
    }
  }
  bdt::SimConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  auto res = bdt::simulate(tr, cfg);
  if (std::holds_alternative<bdt::SimError>(res)) {
    std::cerr << "error: " << std::get<bdt::SimError>(res).message << "\n";
    return 1;
  }
  const auto& trace = std::get<bdt::Trace>(res);
  if (out_path.empty()) {
    bdt::write_csv(trace, std::cout);
  } else {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 2;
    }
    bdt::write_csv(trace, os);
    if (!trace.rows.empty()) {
      const auto& last = trace.rows.back();
      for (std::size_t i = 0; i < trace.labels.size(); ++i)
        std::cout << "final " << trace.labels[i] << " = "
                  << bdt::csv_value(last[i]) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block diagram type checker, translator and simulator"};
  app.require_subcommand(1);

  std::string check_file, check_format = "text";
  ModeFlags check_mf;
  auto* check = app.add_subcommand("check", "type check and report");
  check->add_option("file", check_file, "diagram file")->required();
  add_mode_flags(check, check_mf);
  check->add_option("--format", check_format, "output format")
      ->check(CLI::IsMember({"text", "json"}));

  std::string sim_file, sim_out;
  ModeFlags sim_mf;
  double sim_dt = 0.01, sim_horizon = 1.0;
  auto* sim = app.add_subcommand("simulate", "run a discrete-time simulation");
  sim->add_option("file", sim_file, "diagram file")->required();
  add_mode_flags(sim, sim_mf);
  sim->add_option("--dt", sim_dt, "time step");
  sim->add_option("--horizon", sim_horizon, "end time");
  sim->add_option("--out", sim_out, "CSV output path (default stdout)");

  std::string arity_file, arity_format = "text";
  auto* arity = app.add_subcommand("arity", "compute wire arities");
  arity->add_option("file", arity_file, "diagram file")->required();
  arity->add_option("--format", arity_format, "output format")
      ->check(CLI::IsMember({"text", "json"}));

  auto args = expand_aliases(argc, argv);
  std::vector<const char*> cargv;
  cargv.push_back(argv[0]);
  for (const auto& s : args) cargv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (check->parsed()) return run_check(check_file, check_mf, check_format);
  if (sim->parsed())
    return run_simulate(sim_file, sim_mf, sim_dt, sim_horizon, sim_out);
  if (arity->parsed()) return run_arity(arity_file, arity_format);
  return 2;
}

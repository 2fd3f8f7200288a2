// Command-line front end: generate, solve, sweep, check, ingest.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "deanon/error.hpp"
#include "deanon/harness.hpp"
#include "deanon/sbm.hpp"
#include "deanon/theory.hpp"

using namespace deanon;

namespace {

// Every config key doubles as a --key flag; values are applied after the
// --config file so the command line wins.
struct Settings {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "config file of 'key = value' lines");
    for (const auto& key : config_keys()) {
      app.add_option("--" + key, overrides[key], "config key '" + key + "'");
    }
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& [key, value] : overrides)
      if (!value.empty()) apply_setting(cfg, key, value);
    return cfg;
  }
};

void write_graph(const std::string& path, const Graph& g, const std::vector<std::string>& names) {
  std::ofstream out(path);
  require(out.good(), "cannot write '" + path + "'");
  for (const auto& [u, v] : g.edges()) out << names[u] << ' ' << names[v] << '\n';
}

void write_communities(const std::string& path, const CommunityAssignment& c,
                       const std::vector<std::string>& names) {
  std::ofstream out(path);
  require(out.good(), "cannot write '" + path + "'");
  for (std::size_t i = 0; i < c.size(); ++i) out << names[i] << ' ' << c.label(i) << '\n';
}

std::vector<std::string> numbered(std::size_t n, const std::string& prefix) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = prefix + std::to_string(i + 1);
  return out;
}

int cmd_generate(const RunConfig& cfg, const std::string& prefix) {
  const std::size_t n = cfg.n_list.at(0);
  const int kappa = cfg.kappa_list.at(0);
  const double s = cfg.s_list.at(0);
  const DeanonInstance inst = build_cell_instance(cfg, n, kappa, s, cfg.base_seed);
  const auto names1 = numbered(inst.size(), "a");
  const auto names2 = numbered(inst.size(), "b");
  write_graph(prefix + ".g1.edges", inst.g1, names1);
  write_communities(prefix + ".g1.comm", inst.c1, names1);
  write_graph(prefix + ".g2.edges", inst.g2, names2);
  if (inst.c2) write_communities(prefix + ".g2.comm", *inst.c2, names2);
  std::ofstream truth(prefix + ".truth");
  for (std::size_t i = 0; i < inst.size(); ++i) truth << names1[i] << ' ' << names2[(*inst.truth)[i]] << '\n';
  std::cout << "wrote " << prefix << ".{g1.edges,g1.comm,g2.edges" << (inst.c2 ? ",g2.comm" : "")
            << ",truth}: n=" << inst.size() << " kappa=" << inst.c1.kappa()
            << " |E1|=" << inst.g1.edge_count() << " |E2|=" << inst.g2.edge_count() << '\n';
  return 0;
}

int cmd_solve(const RunConfig& cfg, const std::string& mapping_path) {
  require(cfg.solvers.size() == 1, "solve runs exactly one solver (use --solvers)");
  const DeanonInstance inst = build_cell_instance(cfg, cfg.n_list.at(0), cfg.kappa_list.at(0),
                                                  cfg.s_list.at(0), cfg.base_seed);
  Mapping mapping;
  const ReportRow row = run_solver(cfg, cfg.solvers[0], inst, cfg.base_seed, &mapping);
  write_csv(std::cout, {row});
  if (!mapping_path.empty() && mapping.size() == inst.size()) {
    std::ofstream out(mapping_path);
    for (std::size_t i = 0; i < mapping.size(); ++i) out << i + 1 << ' ' << mapping[i] + 1 << '\n';
  }
  return row.status.rfind("error", 0) == 0 ? 1 : 0;
}

int cmd_sweep(const RunConfig& cfg) {
  const ExperimentReport report = run_experiment(cfg);
  if (cfg.out.empty()) {
    write_csv(std::cout, report.rows);
  } else {
    std::ofstream out(cfg.out);
    require(out.good(), "cannot write '" + cfg.out + "'");
    write_csv(out, report.rows);
    std::ofstream diag(cfg.out + ".diag.csv");
    write_diagnostics(diag, report.diagnostics);
  }
  return report.all_ok() ? 0 : 1;
}

// Params file: "kappa", "affinity" (row-major list), "s1", "s2" as key = value.
ModelParams read_params(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open params '" + path + "'");
  int kappa = 0;
  std::vector<double> aff;
  double s1 = 0.5, s2 = 0.5;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    std::istringstream value(line.substr(eq + 1));
    if (key == "kappa") {
      value >> kappa;
    } else if (key == "affinity") {
      for (double p; value >> p;) aff.push_back(p);
    } else if (key == "s1") {
      value >> s1;
    } else if (key == "s2") {
      value >> s2;
    } else {
      throw Error("params: unknown key '" + key + "'");
    }
  }
  return ModelParams(kappa, std::move(aff), s1, s2);
}

void print_report(const ConditionReport& rep) {
  std::cout << rep.name << " (" << to_string(rep.mode) << "): " << (rep.satisfied ? "satisfied" : "not satisfied")
            << '\n';
  for (const auto& [k, v] : rep.quantities) std::cout << "  " << k << " = " << format_double(v) << '\n';
  std::cout << "  note: " << rep.advisory << '\n';
}

int cmd_check(const std::string& params_path, std::size_t n, double constant, double delta,
              const std::string& mode) {
  const ModelParams params = read_params(params_path);
  print_report(thm41_condition(params, n, constant, parse_mode(mode)));
  print_report(cor41_condition(params, n, delta, constant, parse_mode(mode)));
  std::cout << "appendix_bound = " << format_double(appendixA_bound(params, n))
            << "  (bound-variant weights)\n";
  return 0;
}

int cmd_ingest(const RunConfig& cfg) {
  require(cfg.ingest.has_value(), "ingest needs --edges and --communities");
  IngestOptions opt;
  opt.mode = cfg.mode;
  opt.seed = cfg.base_seed;
  const auto result = ingest(*cfg.ingest, opt);
  const DeanonInstance& inst = result.instance;
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "n = " << inst.size() << "\nkappa = " << inst.c1.kappa() << "\n|E1| = "
            << inst.g1.edge_count() << "\n|E2| = " << inst.g2.edge_count()
            << "\ntruth = " << (inst.truth ? "yes" : "no") << "\ncommunities:";
  for (int a = 1; a <= inst.c1.kappa(); ++a)
    std::cout << ' ' << a << '=' << inst.c1.names()[a - 1] << '(' << inst.c1.community_size(a) << ')';
  std::cout << "\naffinity:";
  for (double p : inst.params.affinity()) std::cout << ' ' << format_double(p);
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seedless de-anonymization of community-structured graph pairs"};
  app.require_subcommand(1);

  Settings gen_settings, solve_settings, sweep_settings, ingest_settings;
  std::string prefix = "instance";
  auto* gen = app.add_subcommand("generate", "sample a synthetic instance and write its files");
  gen_settings.attach(*gen);
  gen->add_option("--prefix", prefix, "output path prefix");

  std::string mapping_path;
  auto* solve = app.add_subcommand("solve", "run one solver on one instance and print a CSV row");
  solve_settings.attach(*solve);
  solve->add_option("--mapping-out", mapping_path, "write the mapping (1-based ids)");

  auto* sweep = app.add_subcommand("sweep", "run the experiment grid and write the CSV report");
  sweep_settings.attach(*sweep);

  std::string params_path, check_mode = "bilateral";
  std::size_t check_n = 128;
  double constant = 1.0, delta = 0.0;
  auto* check = app.add_subcommand("check", "evaluate the recovery conditions for a params file");
  check->add_option("--params", params_path, "file with kappa, affinity, s1, s2")->required();
  check->add_option("--n", check_n, "number of nodes");
  check->add_option("--constant", constant, "constant hidden in the asymptotic condition");
  check->add_option("--delta", delta, "tolerated fraction of mistakes for the partial condition");
  check->add_option("--mode", check_mode, "bilateral or unilateral (label only)");

  auto* ing = app.add_subcommand(
      "ingest",
      "validate dataset files and print the estimated model. Affinities are estimated as "
      "p_ab = e_ab/(n_a n_b) between communities and 2 e_aa/(n_a(n_a-1)) inside one, clamped to "
      "[1e-6, 1-1e-6]; with a graph pair the estimate from g1 is divided by s1. s1 = s2 = 0.5 "
      "unless configured.");
  ingest_settings.attach(*ing);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return cmd_generate(gen_settings.resolve(), prefix);
    if (*solve) return cmd_solve(solve_settings.resolve(), mapping_path);
    if (*sweep) return cmd_sweep(sweep_settings.resolve());
    if (*check) return cmd_check(params_path, check_n, constant, delta, check_mode);
    if (*ing) return cmd_ingest(ingest_settings.resolve());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
